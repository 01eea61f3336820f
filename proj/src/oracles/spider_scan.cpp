#include "npcflow/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace npcflow {

namespace {

struct Candidate {
  int ray;
  double radius;
};

double tree_dist(const Candidate& a, const SpiderPoint& b)
{
  return a.ray == b.ray ? std::abs(a.radius - b.radius) : a.radius + b.radius;
}

double objective(const Candidate& c, std::span<const TargetPoint> pts, std::span<const double> w)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = tree_dist(c, pts[i].as<SpiderPoint>());
    acc += w[i] * d * d;
  }
  return acc;
}

} // namespace

TargetPoint grid_barycenter_oracle(const TargetSpace& space, std::span<const TargetPoint> points,
                                   std::span<const double> weights, double step)
{
  if (!space.is<SpiderSpace>()) throw KindMismatch("grid barycenter oracle needs a spider target");
  if (points.empty() || points.size() != weights.size()) throw DomainError("points and weights must match");
  if (!(step > 0.0)) throw DomainError("scan step must be positive");
  for (const auto& p : points) check_point(space, p);

  double rmax = 0.0;
  for (const auto& p : points) rmax = std::max(rmax, p.as<SpiderPoint>().radius);
  const int k = space.as<SpiderSpace>().num_rays;
  const auto samples = static_cast<long>(std::ceil(rmax / step));

  Candidate best{0, 0.0};
  double best_val = objective(best, points, weights);
  for (int ray = 0; ray < k; ++ray)
    for (long i = 1; i <= samples; ++i) {
      const Candidate c{ray, static_cast<double>(i) * step};
      const double v = objective(c, points, weights);
      if (v < best_val) {
        best_val = v;
        best = c;
      }
    }

  // The objective is convex along each ray, so refine in one bracket.
  if (best.radius > 0.0) {
    double lo = std::max(0.0, best.radius - step), hi = best.radius + step;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (objective({best.ray, m1}, points, weights) < objective({best.ray, m2}, points, weights))
        hi = m2;
      else
        lo = m1;
    }
    best.radius = 0.5 * (lo + hi);
  }
  return TargetPoint::spider(best.ray, best.radius);
}

} // namespace npcflow
