#include "npcflow/presets.hpp"

#include "npcflow/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace npcflow {

PresetKind parse_preset(const std::string& s)
{
  if (s == "constant") return PresetKind::constant;
  if (s == "linear_core") return PresetKind::linear_core;
  if (s == "two_ray_step") return PresetKind::two_ray_step;
  if (s == "three_ray_symmetric") return PresetKind::three_ray_symmetric;
  if (s == "random_smooth") return PresetKind::random_smooth;
  throw DomainError("unknown preset '" + s + "'");
}

std::string to_string(PresetKind p)
{
  switch (p) {
  case PresetKind::constant: return "constant";
  case PresetKind::linear_core: return "linear_core";
  case PresetKind::two_ray_step: return "two_ray_step";
  case PresetKind::three_ray_symmetric: return "three_ray_symmetric";
  case PresetKind::random_smooth: return "random_smooth";
  }
  return "?";
}

TargetPoint line_point(const TargetSpace& space, double t)
{
  if (space.is<EuclideanSpace>()) {
    std::vector<double> c(static_cast<std::size_t>(space.as<EuclideanSpace>().dim), 0.0);
    c[0] = t;
    return TargetPoint::euclidean(std::move(c));
  }
  if (space.is<SpiderSpace>()) return t >= 0.0 ? TargetPoint::spider(0, t) : TargetPoint::spider(1, -t);
  if (space.is<Hyperbolic2Space>()) return TargetPoint::hyperboloid(std::sinh(t), 0.0);
  const auto& factors = space.as<ProductSpace>().factors;
  std::vector<TargetPoint> parts;
  for (std::size_t i = 0; i < factors.size(); ++i)
    parts.push_back(i == 0 ? line_point(factors[i], t) : base_point(factors[i]));
  return TargetPoint::product(std::move(parts));
}

std::vector<double> random_smooth_field(const Grid& grid, std::uint64_t seed, double amplitude,
                                        double correlation_length)
{
  constexpr int K = 6;
  Rng rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
  const double L = grid.length();
  const int K1 = grid.dim() == 2 ? K : 0;
  struct Mode {
    int k0, k1;
    double a, phi;
  };
  std::vector<Mode> modes;
  for (int k0 = 0; k0 <= K; ++k0)
    for (int k1 = -K1; k1 <= K1; ++k1) {
      if (k0 == 0 && k1 <= 0) continue;
      const double kk = 2.0 * std::numbers::pi * std::hypot(k0, k1) * correlation_length / L;
      const double a = coef(rng) * std::exp(-0.25 * kk * kk);
      modes.push_back({k0, k1, a, phase(rng)});
    }
  std::vector<double> f(grid.size(), 0.0);
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const auto p = grid.position(x);
    for (const auto& m : modes)
      f[x] += m.a * std::cos(2.0 * std::numbers::pi * (m.k0 * p[0] + m.k1 * p[1]) / L + m.phi);
  }
  double mx = 0.0;
  for (double v : f) mx = std::max(mx, std::abs(v));
  if (mx > 0.0)
    for (double& v : f) v *= amplitude / mx;
  return f;
}

namespace {

TargetPoint random_smooth_point(const TargetSpace& space, const std::vector<std::vector<double>>& fields,
                                std::size_t& next, std::size_t x)
{
  if (space.is<EuclideanSpace>()) {
    std::vector<double> c;
    for (int k = 0; k < space.as<EuclideanSpace>().dim; ++k) c.push_back(fields[next++][x]);
    return TargetPoint::euclidean(std::move(c));
  }
  if (space.is<SpiderSpace>()) {
    const int k = space.as<SpiderSpace>().num_rays;
    int best = 0;
    double first = -1e300, second = -1e300;
    for (int i = 0; i < k; ++i) {
      const double v = fields[next + static_cast<std::size_t>(i)][x];
      if (v > first) {
        second = first;
        first = v;
        best = i;
      } else if (v > second) {
        second = v;
      }
    }
    next += static_cast<std::size_t>(k);
    return TargetPoint::spider(best, first - second);
  }
  if (space.is<Hyperbolic2Space>()) {
    const double a = fields[next][x], b = fields[next + 1][x];
    next += 2;
    return TargetPoint::hyperboloid(a, b);
  }
  std::vector<TargetPoint> parts;
  for (const auto& f : space.as<ProductSpace>().factors) parts.push_back(random_smooth_point(f, fields, next, x));
  return TargetPoint::product(std::move(parts));
}

std::size_t fields_needed(const TargetSpace& space)
{
  if (space.is<EuclideanSpace>()) return static_cast<std::size_t>(space.as<EuclideanSpace>().dim);
  if (space.is<SpiderSpace>()) return static_cast<std::size_t>(space.as<SpiderSpace>().num_rays);
  if (space.is<Hyperbolic2Space>()) return 2;
  std::size_t total = 0;
  for (const auto& f : space.as<ProductSpace>().factors) total += fields_needed(f);
  return total;
}

} // namespace

GridMap make_preset(const Grid& grid, const TargetSpace& space, const PresetParams& p)
{
  if (!(p.amplitude >= 0.0)) throw DomainError("preset amplitude must be nonnegative");
  const double L = grid.length();
  std::vector<TargetPoint> vals;
  vals.reserve(grid.size());
  switch (p.kind) {
  case PresetKind::constant: return GridMap(grid, space, base_point(space));
  case PresetKind::linear_core:
    if (!(p.core_half_width > 0.0) || p.core_half_width >= 0.5 * L)
      throw DomainError("linear core half-width must be in (0, L/2)");
    for (std::size_t x = 0; x < grid.size(); ++x)
      vals.push_back(line_point(space, std::clamp(grid.position(x)[0] - 0.5 * L, -p.core_half_width, p.core_half_width)));
    break;
  case PresetKind::two_ray_step:
    for (std::size_t x = 0; x < grid.size(); ++x)
      vals.push_back(line_point(
          space, p.amplitude * std::tanh(p.sharpness * std::sin(2.0 * std::numbers::pi * grid.position(x)[0] / L))));
    break;
  case PresetKind::three_ray_symmetric: {
    if (!space.is<SpiderSpace>()) throw KindMismatch("three_ray_symmetric needs a spider target");
    const int N = grid.nodes_per_axis();
    for (std::size_t x = 0; x < grid.size(); ++x) {
      // Integer arithmetic so that the shift by N/3 maps arcs onto arcs exactly.
      const int i = grid.coords(x)[0];
      const int arc = (3 * i) / N;
      const double s = std::sin(std::numbers::pi * (3.0 * i - arc * N) / N);
      vals.push_back(TargetPoint::spider(arc, p.amplitude * s * s));
    }
    break;
  }
  case PresetKind::random_smooth: {
    std::vector<std::vector<double>> fields;
    for (std::size_t k = 0; k < fields_needed(space); ++k)
      fields.push_back(random_smooth_field(grid, p.seed * 1000003ULL + k, p.amplitude, p.correlation_length));
    for (std::size_t x = 0; x < grid.size(); ++x) {
      std::size_t next = 0;
      vals.push_back(random_smooth_point(space, fields, next, x));
    }
    break;
  }
  }
  return GridMap(grid, space, std::move(vals));
}

} // namespace npcflow
