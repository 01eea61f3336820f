#pragma once

// Initial data for scenarios.

#include "npcflow/grid.hpp"

#include <cstdint>
#include <string>

namespace npcflow {

enum class PresetKind { constant, linear_core, two_ray_step, three_ray_symmetric, random_smooth };

PresetKind parse_preset(const std::string& s);
std::string to_string(PresetKind p);

struct PresetParams {
  PresetKind kind = PresetKind::random_smooth;
  std::uint64_t seed = 1;
  double amplitude = 1.0;
  /// Decay length of the random Fourier coefficients.
  double correlation_length = 0.5;
  /// Half-width of the linear part of linear_core, in physical units.
  double core_half_width = 1.0;
  /// Steepness of the two_ray_step transition.
  double sharpness = 4.0;
};

/// Unit-speed geodesic line through the base point, t in R.  On a spider it
/// runs along rays 0 and 1; on a product, in the first factor.
TargetPoint line_point(const TargetSpace& space, double t);

/// constant: the base point.
/// linear_core: line_point(clamp(x_0 - L/2, -a, a)).
/// two_ray_step: line_point(A tanh(k sin(2 pi x_0 / L))), a smoothed step.
/// three_ray_symmetric (spider only): thirds of the x_0 period sent to rays
///   0, 1, 2 with radius A sin^2; invariant under ray rotation + shift by L/3.
/// random_smooth: low Fourier modes with seeded coefficients; on a spider
///   the ray is the argmax of k random functions and the radius is the gap
///   between the two largest.
GridMap make_preset(const Grid& grid, const TargetSpace& space, const PresetParams& params);

/// Random smooth scalar field with zero mean and max |f| = amplitude.
std::vector<double> random_smooth_field(const Grid& grid, std::uint64_t seed, double amplitude,
                                        double correlation_length);

} // namespace npcflow
