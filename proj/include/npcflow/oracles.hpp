#pragma once

// Brute-force references for tests.  Nothing here calls the barycenter or
// sweep code of the solvers: Euclidean problems are assembled as linear
// systems and solved directly, spider barycenters are found by exhaustive
// scanning, and periodic heat solutions are built from discrete Fourier modes.

#include "npcflow/solvers.hpp"

#include <span>
#include <string>
#include <vector>

namespace npcflow {

struct OracleResult {
  std::string id;
  std::vector<double> values;
  std::string method;
  std::string resolution;
};

/// Implicit Euler for the graph Laplacian, (I + tau L_h) u^{k+1} = u^k,
/// componentwise, with a dense LU factorization.  Euclidean targets only.
FlowTrace euclid_heat_oracle(const GridMap& u0, double tau, int steps);

/// Exhaustive scan of every ray of a spider at spacing `step`, followed by
/// ternary refinement around the best sample.
TargetPoint grid_barycenter_oracle(const TargetSpace& space, std::span<const TargetPoint> points,
                                   std::span<const double> weights, double step);

/// Direct solve of the normal equations of the discrete WED functional for
/// a Euclidean target.  At most 20000 unknowns (J N^n times the dimension).
SpaceTimeMap wed_quadratic_oracle(const GridMap& u0, double eps, double dt, double T,
                                  WedQuadrature quadrature = WedQuadrature::midpoint);

/// Eigenvalue of the periodic graph Laplacian for wave numbers (k0, k1).
double laplacian_eigenvalue(const Grid& grid, int k0, int k1 = 0);

/// Scalar periodic heat data propagated mode by mode.  With tau > 0 the
/// modes are damped by (1 + tau lambda)^-steps (implicit Euler); with
/// tau = 0, by exp(-lambda t) (exact semi-discrete flow up to time t).
OracleResult fourier_heat_oracle(const Grid& grid, std::span<const double> f0, double tau, int steps, double t = 0.0);

} // namespace npcflow
