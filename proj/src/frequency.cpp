#include "npcflow/verifiers.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace npcflow {

namespace {

FrequencyValue weighted_sums(const GridMap& u, const TargetPoint& base, std::size_t x0, double R)
{
  const Grid& g = u.grid();
  const double s2 = 2.0 * R * R; // kernel variance per axis
  const double cut2 = 36.0 * s2;
  const double norm = std::pow(4.0 * std::numbers::pi * R * R, -0.5 * g.dim());
  const auto dens = energy_density(u);
  CompensatedSum e, h;
  for (std::size_t x = 0; x < g.size(); ++x) {
    const double r2 = g.torus_dist2(x, x0);
    if (r2 > cut2) continue;
    const double G = norm * std::exp(-r2 / (4.0 * R * R));
    e.add(G * dens.values[x]);
    h.add(G * dist2(u.space(), u[x], base));
  }
  const double cell = g.cell_volume();
  return {0.0, 2.0 * R * R * cell * e.value(), cell * h.value()};
}

} // namespace

FrequencyValue frequency(const SliceView& view, SpaceTimeNode z0, double R)
{
  const Grid& g = view.grid();
  if (!(R > 0.0)) throw DomainError("frequency scale must be positive");
  if (6.0 * std::sqrt(2.0) * R > 0.5 * g.length())
    throw DomainError("kernel collar of six standard deviations does not fit in half the torus");
  if (z0.slice < 0 || static_cast<std::size_t>(z0.slice) >= view.count() || z0.node >= g.size())
    throw DomainError("frequency base point outside the trace");

  const double s = z0.slice - R * R / view.dt;
  if (s < -1e-9) throw DomainError("t0 - R^2 precedes the first slice");
  const auto j0 = static_cast<std::size_t>(std::max(0.0, std::floor(s + 1e-9)));
  const double frac = std::max(0.0, s - static_cast<double>(j0));
  const auto& slices = *view.slices;
  const TargetPoint& base = slices[static_cast<std::size_t>(z0.slice)][z0.node];

  FrequencyValue v = weighted_sums(slices[j0], base, z0.node, R);
  if (frac > 1e-9 && j0 + 1 < slices.size()) {
    const FrequencyValue w = weighted_sums(slices[j0 + 1], base, z0.node, R);
    v.E = (1.0 - frac) * v.E + frac * w.E;
    v.H = (1.0 - frac) * v.H + frac * w.H;
  }
  if (v.H < 1e-14) {
    std::ostringstream os;
    os << "degenerate frequency: H = " << v.H << " at node " << z0.node << ", slice " << z0.slice << ", R " << R;
    throw DegenerateFrequency(os.str());
  }
  v.N = v.E / v.H;
  return v;
}

VerifierReport frequency_profile(const SliceView& view, SpaceTimeNode z0, const std::vector<double>& R_list,
                                 double tolerance)
{
  const Grid& g = view.grid();
  const double t0 = z0.slice * view.dt;
  const double lo = 4.0 * g.h(), hi = 0.5 * std::sqrt(t0);
  for (std::size_t i = 0; i < R_list.size(); ++i) {
    if (R_list[i] < lo * (1.0 - 1e-12) || R_list[i] > hi * (1.0 + 1e-12))
      throw DomainError("frequency radius outside the resolvable range [4h, sqrt(t0)/2]");
    if (i > 0 && !(R_list[i] > R_list[i - 1])) throw DomainError("frequency radii must ascend");
  }
  VerifierReport rep;
  rep.id = "frequency_profile";
  rep.tolerance = tolerance;
  {
    std::ostringstream os;
    os << "n=" << g.dim() << " N=" << g.nodes_per_axis() << " L=" << g.length() << " dt=" << view.dt;
    rep.resolution = os.str();
  }
  std::vector<double> N;
  for (double R : R_list) {
    N.push_back(frequency(view, z0, R).N);
    std::ostringstream key;
    key << "N(R=" << R << ")";
    rep.metrics.emplace_back(key.str(), N.back());
  }
  rep.worst_value = 0.0;
  int violations = 0;
  for (std::size_t i = 0; i + 1 < N.size(); ++i) {
    const double d = N[i + 1] - N[i];
    if (d < -tolerance) ++violations;
    if (d < rep.worst_value) {
      rep.worst_value = d;
      std::ostringstream os;
      os << "R " << R_list[i] << " -> " << R_list[i + 1];
      rep.location = os.str();
    }
  }
  rep.metrics.emplace_back("violations", violations);
  rep.pass = violations == 0;
  return rep;
}

} // namespace npcflow
