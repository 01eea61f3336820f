#pragma once

#include "npcflow/cat0.hpp"

#include <cstdint>
#include <random>

namespace npcflow {

using Rng = std::mt19937_64;

/// Uniform-ish random point of `space` at distance roughly <= `scale` from
/// the space's base point (origin / apex / identity tuple).  Spider samples
/// put a small fraction of their mass exactly at the branch point.
TargetPoint random_point(const TargetSpace& space, Rng& rng, double scale = 2.0);

/// Base point: origin of R^d, spider apex, (0,0,1) on the hyperboloid.
TargetPoint base_point(const TargetSpace& space);

} // namespace npcflow
