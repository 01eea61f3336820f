#pragma once

// The two constructions of the flow:
//  - implicit minimizing movement: u^{k+1} = argmin_v E(v) + d_2^2(v, u^k) / (2 tau),
//  - weighted energy-dissipation (WED) minimization over a truncated
//    space-time grid with weight exp(-t/eps)/eps.
// Both are solved by cyclic per-node barycenter updates (nonlinear
// Gauss-Seidel), which is exact coordinate minimization in a CAT(0) target.

#include "npcflow/grid.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace npcflow {

enum class SweepOrder { lexicographic, red_black, seeded_random };

SweepOrder parse_sweep_order(const std::string& s);
std::string to_string(SweepOrder order);

struct SolverOptions {
  SweepOrder order = SweepOrder::lexicographic;
  int max_sweeps = 200000;
  /// A solve stops once one full sweep moves the iterate by less than
  /// `tolerance` in volume-normalized L2 (RMS over the domain).
  double tolerance = 1e-12;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A solve that did not reach its tolerance.  `slice` is the trace slice
/// being computed, or -1 for a standalone solve.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, int slice = -1, int sweeps = 0, double residual = 0.0)
      : std::runtime_error(what), slice(slice), sweeps(sweeps), residual(residual)
  {
  }
  int slice;
  int sweeps;
  double residual;
};

struct ProximalResult {
  GridMap map;
  int sweeps = 0;
  double residual = 0.0;
};

/// Objective of one proximal step: E(v) + d_2^2(v, u) / (2 tau).
double proximal_objective(const GridMap& v, const GridMap& u, double tau);

ProximalResult proximal_step(const GridMap& u, double tau, const SolverOptions& opts);

struct SliceDiagnostics {
  double energy = 0.0;
  double max_time_density = 0.0;
  int sweeps = 0;
  double residual = 0.0;

  bool operator==(const SliceDiagnostics&) const = default;
};

struct FlowTrace {
  double tau = 0.0;
  std::vector<GridMap> slices;
  std::vector<SliceDiagnostics> diagnostics;

  const Grid& grid() const { return slices.front().grid(); }
  const TargetSpace& space() const { return slices.front().space(); }
  std::size_t steps() const { return slices.size() - 1; }
};

FlowTrace run_flow(const GridMap& u0, double tau, int steps, const SolverOptions& opts);

enum class WedStart {
  /// Every unknown slice starts as a copy of u0.
  initial_data,
  /// Unknown slices start from the minimizing-movement trace with tau = dt.
  proximal_flow,
};

/// Where the weight of the kinetic term on [t_j, t_{j+1}] is evaluated.
/// The energy term always uses w(t_j).  With the left endpoint the discrete
/// Euler-Lagrange equation runs the flow faster by (e^r - 1)/r, r = dt/eps;
/// the midpoint cancels that first-order bias.
enum class WedQuadrature { left_endpoint, midpoint };

WedQuadrature parse_wed_quadrature(const std::string& s);
std::string to_string(WedQuadrature q);

struct WedOptions {
  SolverOptions solver;
  WedStart start = WedStart::proximal_flow;
  WedQuadrature quadrature = WedQuadrature::midpoint;
  /// Record the functional value after every sweep.
  bool record_history = false;
};

struct SpaceTimeMap {
  double dt = 0.0;
  double horizon = 0.0;
  double eps = 0.0;
  WedQuadrature quadrature = WedQuadrature::midpoint;
  /// Slices at t_j = j dt for j = 0..J; slice 0 is the initial data.
  std::vector<GridMap> slices;

  double functional = 0.0;
  std::vector<double> energies;
  int sweeps = 0;
  double residual = 0.0;
  std::vector<double> functional_history;

  /// sum_j h^n dt sum_x d^2(u_{j+1}, u_j) / dt^2.
  double dissipation = 0.0;
  double initial_energy = 0.0;

  const Grid& grid() const { return slices.front().grid(); }
  const TargetSpace& space() const { return slices.front().space(); }
  /// Dissipation relative to E(u0); the continuum bound says this is <= 1.
  double dissipation_ratio() const { return initial_energy > 0.0 ? dissipation / initial_energy : 0.0; }
};

/// exp(-t/eps) / eps.
double wed_weight(double t, double eps);

/// Discrete WED functional of a slice sequence (slice 0 included):
/// sum_{j<J} dt [w(t_j + theta dt) (eps/2) d_2^2(u_{j+1}, u_j) / dt^2 + w(t_j) E(u_j)],
/// theta = 0 or 1/2 by quadrature.
double wed_functional(const std::vector<GridMap>& slices, double eps, double dt,
                      WedQuadrature quadrature = WedQuadrature::midpoint);

/// Requires eps > 0, dt <= eps / 4 and T >= 10 eps.
SpaceTimeMap wed_minimize(const GridMap& u0, double eps, double dt, double T, const WedOptions& opts);

} // namespace npcflow
