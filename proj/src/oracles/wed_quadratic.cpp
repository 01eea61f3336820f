#include "npcflow/oracles.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace npcflow {

SpaceTimeMap wed_quadratic_oracle(const GridMap& u0, double eps, double dt, double T, WedQuadrature quadrature)
{
  if (!u0.space().is<EuclideanSpace>()) throw KindMismatch("WED oracle needs a Euclidean target");
  if (!(eps > 0.0) || !(dt > 0.0) || !(T > 0.0)) throw DomainError("WED oracle needs eps, dt, T > 0");
  const Grid& g = u0.grid();
  const int d = u0.space().as<EuclideanSpace>().dim;
  const auto J = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const std::size_t m = g.size();
  if (J * m * static_cast<std::size_t>(d) > 20000) throw DomainError("WED oracle limited to 20000 unknowns");

  const double cell = g.cell_volume();
  const double h2 = g.h() * g.h();
  const double theta = quadrature == WedQuadrature::midpoint ? 0.5 : 0.0;
  const auto weight = [&](double j) { return std::exp(-j * dt / eps) / eps; };
  const auto unknown = [&](std::size_t j, std::size_t x) { return static_cast<Eigen::Index>((j - 1) * m + x); };
  const auto u0c = [&](std::size_t x, int k) { return u0[x].as<EuclideanPoint>().coords[static_cast<std::size_t>(k)]; };

  // The functional is a sum of c (a - b)^2 over pairs; assemble its Hessian.
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(J * m), d);
  const auto pair = [&](Eigen::Index a, Eigen::Index b, double c) {
    trip.emplace_back(a, a, 2.0 * c);
    trip.emplace_back(b, b, 2.0 * c);
    trip.emplace_back(a, b, -2.0 * c);
    trip.emplace_back(b, a, -2.0 * c);
  };
  for (std::size_t j = 0; j < J; ++j) {
    const double ck = weight(static_cast<double>(j) + theta) * eps * cell / (2.0 * dt);
    const double ce = weight(static_cast<double>(j)) * dt * cell / (2.0 * h2);
    for (std::size_t x = 0; x < m; ++x) {
      if (j == 0) {
        const Eigen::Index a = unknown(1, x);
        trip.emplace_back(a, a, 2.0 * ck);
        for (int k = 0; k < d; ++k) rhs(a, k) += 2.0 * ck * u0c(x, k);
        continue;
      }
      pair(unknown(j + 1, x), unknown(j, x), ck);
      const auto c = g.coords(x);
      for (int axis = 0; axis < g.dim(); ++axis) {
        auto cn = c;
        cn[static_cast<std::size_t>(axis)] += 1;
        pair(unknown(j, x), unknown(j, g.index(cn)), ce);
      }
    }
  }
  Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(J * m), static_cast<Eigen::Index>(J * m));
  H.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(H);
  if (solver.info() != Eigen::Success) throw SolverError("WED oracle factorization failed");
  const Eigen::MatrixXd sol = solver.solve(rhs);

  SpaceTimeMap st;
  st.dt = dt;
  st.horizon = static_cast<double>(J) * dt;
  st.eps = eps;
  st.quadrature = quadrature;
  st.slices.push_back(u0);
  for (std::size_t j = 1; j <= J; ++j) {
    std::vector<TargetPoint> vals;
    vals.reserve(m);
    for (std::size_t x = 0; x < m; ++x) {
      std::vector<double> c(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) c[static_cast<std::size_t>(k)] = sol(unknown(j, x), k);
      vals.push_back(TargetPoint::euclidean(std::move(c)));
    }
    st.slices.emplace_back(g, u0.space(), std::move(vals));
  }

  // Functional value from the coordinates directly.
  const auto value = [&](std::size_t j, std::size_t x, int k) { return j == 0 ? u0c(x, k) : sol(unknown(j, x), k); };
  double functional = 0.0, dissipation = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    double kin = 0.0, grad = 0.0;
    for (std::size_t x = 0; x < m; ++x)
      for (int k = 0; k < d; ++k) {
        const double dv = value(j + 1, x, k) - value(j, x, k);
        kin += dv * dv;
        const auto c = g.coords(x);
        for (int axis = 0; axis < g.dim(); ++axis) {
          auto cn = c;
          cn[static_cast<std::size_t>(axis)] += 1;
          const double de = value(j, g.index(cn), k) - value(j, x, k);
          grad += de * de;
        }
      }
    functional += dt * (weight(static_cast<double>(j) + theta) * 0.5 * eps * cell * kin / (dt * dt) +
                         weight(static_cast<double>(j)) * 0.5 * cell * grad / h2);
    dissipation += cell * kin / dt;
  }
  st.functional = functional;
  st.dissipation = dissipation;
  for (const auto& s : st.slices) st.energies.push_back(dirichlet_energy(s));
  st.initial_energy = st.energies.front();
  return st;
}

} // namespace npcflow
