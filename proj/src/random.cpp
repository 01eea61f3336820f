#include "npcflow/random.hpp"

namespace npcflow {

TargetPoint random_point(const TargetSpace& space, Rng& rng, double scale)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if (space.is<EuclideanSpace>()) {
    std::vector<double> c(static_cast<std::size_t>(space.as<EuclideanSpace>().dim));
    for (auto& v : c) v = scale * u(rng);
    return TargetPoint::euclidean(std::move(c));
  }
  if (space.is<SpiderSpace>()) {
    const int k = space.as<SpiderSpace>().num_rays;
    std::uniform_int_distribution<int> ray(0, k - 1);
    std::uniform_real_distribution<double> r(0.0, scale);
    const int j = ray(rng);
    // One sample in sixteen sits on the apex, where geodesics branch.
    if (std::uniform_int_distribution<int>(0, 15)(rng) == 0) return TargetPoint::spider(0, 0.0);
    return TargetPoint::spider(j, r(rng));
  }
  if (space.is<Hyperbolic2Space>()) return TargetPoint::hyperboloid(scale * u(rng), scale * u(rng));
  const auto& factors = space.as<ProductSpace>().factors;
  std::vector<TargetPoint> parts;
  parts.reserve(factors.size());
  for (const auto& f : factors) parts.push_back(random_point(f, rng, scale));
  return TargetPoint::product(std::move(parts));
}

TargetPoint base_point(const TargetSpace& space)
{
  if (space.is<EuclideanSpace>())
    return TargetPoint::euclidean(std::vector<double>(static_cast<std::size_t>(space.as<EuclideanSpace>().dim), 0.0));
  if (space.is<SpiderSpace>()) return TargetPoint::spider(0, 0.0);
  if (space.is<Hyperbolic2Space>()) return TargetPoint::hyperboloid(0.0, 0.0);
  std::vector<TargetPoint> parts;
  for (const auto& f : space.as<ProductSpace>().factors) parts.push_back(base_point(f));
  return TargetPoint::product(std::move(parts));
}

} // namespace npcflow
