#pragma once

// Discrete audits of the inequalities satisfied by the flow: weak parabolic
// inequalities tested against families of space-time bumps, the discrete
// evolution variational inequality, Gaussian-weighted frequency, Lipschitz
// and Harnack scaling scans, and the eps -> 0 convergence of WED minimizers.

#include "npcflow/solvers.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace npcflow {

struct VerifierReport {
  std::string id;
  bool pass = true;
  /// Most negative normalized pairing, largest residual, largest ratio...
  /// depending on the check; `tolerance` is on the same scale.
  double worst_value = 0.0;
  double tolerance = 0.0;
  double normalization = 1.0;
  std::string location;
  std::uint64_t seed = 0;
  std::string resolution;
  /// Named auxiliary numbers, in insertion order.
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;

  double metric(const std::string& name) const;
};

/// A time-indexed sequence of maps with uniform spacing, viewed from either
/// a FlowTrace or a SpaceTimeMap.
struct SliceView {
  const std::vector<GridMap>* slices = nullptr;
  double dt = 0.0;

  static SliceView of(const FlowTrace& trace) { return {&trace.slices, trace.tau}; }
  static SliceView of(const SpaceTimeMap& st) { return {&st.slices, st.dt}; }
  const Grid& grid() const { return slices->front().grid(); }
  std::size_t count() const { return slices->size(); }
};

struct SpaceTimeNode {
  std::size_t node = 0;
  int slice = 0;
};

struct BumpRadius {
  /// In nodes along every spatial axis.
  int space = 1;
  /// In slices.
  int time = 1;
};

/// Tensor-product bumps eta(x, t) = prod_i phi(dx_i / rs) * phi(dt / rt),
/// phi(s) = (1 - s^2)^2 on |s| < 1, one per (center, radius) pair.
struct TestFunctionFamily {
  std::vector<SpaceTimeNode> centers;
  std::vector<BumpRadius> radii;

  std::size_t size() const { return centers.size() * radii.size(); }

  /// Centers on a sublattice with the given strides, restricted to slices
  /// where every radius keeps the bump off the first and last two slices
  /// of a field with `slices` time levels.
  static TestFunctionFamily lattice(const Grid& grid, int slices, int space_stride, int time_stride,
                                    std::vector<BumpRadius> radii);
};

/// Bump profile (1 - s^2)^2 on |s| < 1, zero outside.
double bump_profile(double s);

enum class FieldKind { grad_density, time_density, pair_distance };

struct FieldSpec {
  FieldKind kind = FieldKind::grad_density;
  /// Slice offset for pair_distance.
  int delta = 1;

  std::string label() const;
};

/// Scalar field sampled per slice and node: values[j][x].
struct SliceField {
  Grid grid;
  double dt = 0.0;
  std::vector<std::vector<double>> values;
};

/// grad_density: |grad u|^2 of slice j; time_density: d^2(u_j, u_{j+1}) / dt^2;
/// pair_distance(delta): d^2(u_j, u_{j+delta}).
SliceField compute_field(const SliceView& view, const FieldSpec& spec);

/// Coefficients of L = a_tt d_t^2 - a_t d_t + a_lap Delta + a_0; the audited
/// inequality is L f >= 0 in the weak sense.  a_0 carries a curvature
/// constant for sensitivity runs (0 on flat grids).
struct ParabolicCoefficients {
  double a_tt = 0.0;
  double a_t = 1.0;
  double a_lap = 1.0;
  double a_0 = 0.0;
};

/// Weak pairing of f with L^* eta = a_tt D_t^2 eta + a_t D_t eta + a_lap Delta_h eta + a_0 eta
/// (centered differences), times h^n dt.  The member must vanish on the
/// first and last two slices of the field.
double weak_pairing(const SliceField& f, const ParabolicCoefficients& c, const TestFunctionFamily& family,
                    std::size_t member);

/// The same pairing with the differences applied to f instead:
/// sum eta [a_tt D_t^2 f - a_t D_t f + a_lap Delta_h f] h^n dt.
double weak_pairing_on_field(const SliceField& f, const ParabolicCoefficients& c,
                             const TestFunctionFamily& family, std::size_t member);

/// h^n dt sum eta for one member.
double bump_mass(const SliceField& f, const TestFunctionFamily& family, std::size_t member);

/// Minimum over the family of pairing / (||f||_inf ||eta||_1), where the sup
/// norm is taken over the slices the family covers.  PASS iff the minimum is
/// >= -tolerance.
VerifierReport weak_parabolic_residual(const SliceView& view, const FieldSpec& field, const ParabolicCoefficients& c,
                                       const TestFunctionFamily& family, double tolerance = 5e-2);

/// max over steps k and competitors w of
/// [d^2(u^{k+1}, w) - d^2(u^k, w)] / (2 tau) + E(u^{k+1}) - E(w);
/// PASS iff <= rel_tolerance (1 + E(u^0)).
VerifierReport evi_residual(const FlowTrace& trace, const std::vector<GridMap>& competitors,
                            double rel_tolerance = 1e-8);

/// Largest increase of d_2(u^k, v^k) between consecutive steps of two traces.
VerifierReport contraction_check(const FlowTrace& a, const FlowTrace& b, double tolerance = 1e-9);

/// Largest per-step E(u^{k+1}) + d_2^2(u^{k+1}, u^k) / (2 tau) - E(u^k),
/// PASS iff <= rel_tolerance E(u^0).
VerifierReport dissipation_check(const FlowTrace& trace, double rel_tolerance = 1e-9);

/// Raised when the Gaussian-weighted displacement H vanishes.
class DegenerateFrequency : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FrequencyValue {
  double N = 0.0;
  double E = 0.0;
  double H = 0.0;
};

/// Frequency at base point z0 = (node, slice) and scale R, with the
/// backward heat kernel evaluated at time t0 - R^2 (linearly interpolated
/// between slices).  The kernel is cut at six standard deviations, which
/// must fit in half the torus.
FrequencyValue frequency(const SliceView& view, SpaceTimeNode z0, double R);

/// Adjacent decreases N(R_{i+1}) - N(R_i) below -tolerance; R_list ascending
/// within [4h, sqrt(t0)/2].
VerifierReport frequency_profile(const SliceView& view, SpaceTimeNode z0, const std::vector<double>& R_list,
                                 double tolerance = 5e-2);

/// Largest value of c = sup_{P_r(z0)} |grad u|^2 / ([eps / r^{n+2} + 1 / r^n] E0)
/// over centers and radii, eps = st.eps <= r^2.  Cylinders must stay inside
/// the time range.  With `reference`, PASS iff the maximum exceeds it by at
/// most 25%.
VerifierReport lipschitz_scan(const SpaceTimeMap& st, const std::vector<SpaceTimeNode>& centers,
                              const std::vector<double>& r_list, double E0,
                              std::optional<double> reference = std::nullopt);

/// sup_{P_R(z0)} |d_t u|^2 R^{n+2} / E0 over centers, one value per R, on a
/// trace; the time density is taken from forward differences.
std::vector<double> harnack_values(const SliceView& view, const std::vector<SpaceTimeNode>& centers,
                                   const std::vector<double>& R_list, double E0);

/// Centers given as times; converted to slices of each WED solve.
struct ScanCenter {
  std::size_t node = 0;
  double time = 0.0;
};

/// For each r: eps = r^2, dt = eps / dt_divisor, WED on [0, max(10 eps, t + 2 r^2)],
/// then c(r) from lipschitz_scan.  PASS iff max c / min c <= ratio_limit.
VerifierReport lipschitz_scaling_study(const GridMap& u0, const std::vector<ScanCenter>& centers,
                                       const std::vector<double>& r_list, const WedOptions& opts,
                                       double dt_divisor = 4.0, double ratio_limit = 4.0);

/// Same ratio test for harnack_values on a proximal trace.
VerifierReport harnack_scaling_study(const FlowTrace& trace, const std::vector<ScanCenter>& centers,
                                     const std::vector<double>& R_list, double ratio_limit = 4.0);

/// gap(eps) = (sum_j dt d_2^2(u_eps(t_j), u(t_j)))^{1/2} over t_j <= t_compare,
/// against the minimizing-movement trace with tau = dt; PASS iff strictly
/// decreasing along eps_list (descending).
struct ConvergenceStudyOptions {
  double dt = 0.0;
  double t_compare = 0.5;
  WedOptions wed;
};

VerifierReport wed_convergence_study(const GridMap& u0, const std::vector<double>& eps_list,
                                     const ConvergenceStudyOptions& opts);

/// Dissipation of a WED minimizer relative to E(u0); reports delta_h = max(0, ratio - 1).
VerifierReport wed_energy_bound(const SpaceTimeMap& st);

} // namespace npcflow
