#include "npcflow/oracles.hpp"

#include <Eigen/Dense>

namespace npcflow {

namespace {

Eigen::MatrixXd graph_laplacian(const Grid& g)
{
  const auto m = static_cast<Eigen::Index>(g.size());
  const double ih2 = 1.0 / (g.h() * g.h());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto c = g.coords(x);
    const auto i = static_cast<Eigen::Index>(x);
    for (int axis = 0; axis < g.dim(); ++axis)
      for (int s : {-1, 1}) {
        auto cn = c;
        cn[static_cast<std::size_t>(axis)] += s;
        L(i, static_cast<Eigen::Index>(g.index(cn))) -= ih2;
        L(i, i) += ih2;
      }
  }
  return L;
}

} // namespace

FlowTrace euclid_heat_oracle(const GridMap& u0, double tau, int steps)
{
  if (!u0.space().is<EuclideanSpace>()) throw KindMismatch("heat oracle needs a Euclidean target");
  if (!(tau > 0.0) || steps < 1) throw DomainError("heat oracle needs tau > 0 and steps >= 1");
  const Grid& g = u0.grid();
  const int d = u0.space().as<EuclideanSpace>().dim;
  const auto m = static_cast<Eigen::Index>(g.size());

  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) + tau * graph_laplacian(g);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);

  Eigen::MatrixXd U(m, d);
  for (Eigen::Index i = 0; i < m; ++i)
    for (int k = 0; k < d; ++k) U(i, k) = u0[static_cast<std::size_t>(i)].as<EuclideanPoint>().coords[static_cast<std::size_t>(k)];

  FlowTrace trace;
  trace.tau = tau;
  trace.slices.push_back(u0);
  trace.diagnostics.push_back(SliceDiagnostics{dirichlet_energy(u0), 0.0, 0, 0.0});
  for (int s = 0; s < steps; ++s) {
    U = lu.solve(U);
    std::vector<TargetPoint> vals;
    vals.reserve(g.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      std::vector<double> c(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) c[static_cast<std::size_t>(k)] = U(i, k);
      vals.push_back(TargetPoint::euclidean(std::move(c)));
    }
    GridMap next(g, u0.space(), std::move(vals));
    SliceDiagnostics diag{dirichlet_energy(next), time_density(trace.slices.back(), next, tau).max(), 1, 0.0};
    trace.slices.push_back(std::move(next));
    trace.diagnostics.push_back(diag);
  }
  return trace;
}

} // namespace npcflow
