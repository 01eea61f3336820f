#include "npcflow/grid.hpp"
#include "npcflow/presets.hpp"
#include "npcflow/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace npcflow;

namespace {

GridMap e1_map(const Grid& g, const std::vector<double>& v)
{
  std::vector<TargetPoint> pts;
  for (double x : v) pts.push_back(TargetPoint::euclidean({x}));
  return GridMap(g, TargetSpace::euclidean(1), pts);
}

GridMap random_map(const Grid& g, const TargetSpace& s, Rng& rng)
{
  std::vector<TargetPoint> pts;
  for (std::size_t i = 0; i < g.size(); ++i) pts.push_back(random_point(s, rng));
  return GridMap(g, s, pts);
}

} // namespace

TEST_CASE("grid geometry")
{
  const Grid g(2, 8, 4.0);
  CHECK(g.size() == 64);
  CHECK(g.h() == 0.5);
  CHECK(g.cell_volume() == 0.25);
  // periodic neighbors, row-major order
  CHECK(g.index({7, 0}) == 56);
  CHECK(g.index({0, 1}) == 1);
  CHECK(g.neighbor(7, 0, +1) == 15);
  CHECK(g.neighbor(0, 1, -1) == 7);
  CHECK(g.neighbor(56, 0, +1) == 0);
  CHECK_THROWS_AS(Grid(3, 8, 1.0), DomainError);
  CHECK_THROWS_AS(Grid(1, 3, 1.0), DomainError);
  CHECK_THROWS_AS(Grid(1, 8, 0.0), DomainError);
}

TEST_CASE("gridmap validation")
{
  const Grid g(1, 4, 4.0);
  CHECK_THROWS(GridMap(g, TargetSpace::euclidean(1), std::vector<TargetPoint>(3, TargetPoint::euclidean({0.0}))));
  CHECK_THROWS(GridMap(g, TargetSpace::spider(3), TargetPoint::euclidean({0.0})));
}

TEST_CASE("dirichlet energy examples")
{
  const Grid g(1, 4, 4.0);
  CHECK(dirichlet_energy(GridMap(g, TargetSpace::spider(3), TargetPoint::spider(1, 2.0))) == 0.0);
  CHECK(dirichlet_energy(e1_map(g, {0, 1, 0, 1})) == doctest::Approx(2.0).epsilon(1e-15));
  const auto s3 = TargetSpace::spider(3);
  const GridMap m(g, s3,
                  {TargetPoint::spider(0, 1), TargetPoint::spider(0, 0), TargetPoint::spider(1, 1),
                   TargetPoint::spider(0, 0)});
  CHECK(dirichlet_energy(m) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("energy density examples")
{
  const Grid g(1, 4, 4.0);
  for (double v : energy_density(GridMap(g, TargetSpace::euclidean(1), TargetPoint::euclidean({3.0}))).values)
    CHECK(v == 0.0);
  for (double v : energy_density(e1_map(g, {0, 1, 0, 1})).values) CHECK(v == 1.0);

  const Grid g8(1, 8, 8.0);
  const double d = 0.3;
  const auto f = energy_density(e1_map(g8, {0, 0, 0, d, 0, 0, 0, 0})).values;
  CHECK(f[3] == doctest::Approx(d * d).epsilon(1e-15));
  CHECK(f[2] == doctest::Approx(d * d / 2).epsilon(1e-15));
  CHECK(f[4] == doctest::Approx(d * d / 2).epsilon(1e-15));
  CHECK(f[0] == 0.0);
  CHECK(f[6] == 0.0);
}

TEST_CASE("l2 distance examples")
{
  const Grid g(1, 4, 4.0);
  const auto u = e1_map(g, {0, 0, 0, 0}), v = e1_map(g, {1, 1, 1, 1});
  CHECK(l2_distance(u, u) == 0.0);
  CHECK(l2_distance(u, v) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(l2_distance(u, e1_map(Grid(1, 4, 2.0), {0, 0, 0, 0})), DomainError);
}

TEST_CASE("l2 triangle inequality on random triples")
{
  Rng rng(21);
  const Grid g(1, 8, 2.0);
  for (const auto& s : {TargetSpace::spider(3), TargetSpace::hyperbolic2(), TargetSpace::euclidean(2)}) {
    for (int i = 0; i < 10000 / 3; ++i) {
      const auto a = random_map(g, s, rng), b = random_map(g, s, rng), c = random_map(g, s, rng);
      CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-10);
    }
  }
}

TEST_CASE("time density examples")
{
  const Grid g(1, 4, 4.0);
  const auto u = e1_map(g, {0, 1, 2, 3});
  for (double v : time_density(u, u, 0.1).values) CHECK(v == 0.0);
  for (double v : time_density(u, e1_map(g, {0.2, 1.2, 2.2, 3.2}), 0.1).values)
    CHECK(v == doctest::Approx(4.0).epsilon(1e-12));
  const auto s3 = TargetSpace::spider(3);
  const auto f = time_density(GridMap(g, s3, TargetPoint::spider(0, 1)), GridMap(g, s3, TargetPoint::spider(1, 1)), 1.0);
  for (double v : f.values) CHECK(v == 4.0);
  CHECK_THROWS_AS(time_density(u, u, 0.0), DomainError);
}

TEST_CASE("energy density integrates to twice the energy")
{
  Rng rng(22);
  for (int n : {1, 2}) {
    const Grid g(n, 8, 3.0);
    for (const auto& s : {TargetSpace::spider(3), TargetSpace::hyperbolic2(),
                          TargetSpace::product({TargetSpace::euclidean(2), TargetSpace::spider(4)})}) {
      for (int i = 0; i < 20; ++i) {
        const auto u = random_map(g, s, rng);
        const double E = dirichlet_energy(u);
        CHECK(std::abs(energy_density(u).integral() - 2.0 * E) <= 1e-10 * E);
      }
    }
  }
}

TEST_CASE("energy is invariant under translations and axis swaps")
{
  Rng rng(23);
  const Grid g(2, 6, 3.0);
  const auto s = TargetSpace::spider(3);
  const auto u = random_map(g, s, rng);
  const double E = dirichlet_energy(u);
  std::vector<TargetPoint> shifted(g.size()), swapped(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    const auto c = g.coords(x);
    shifted[g.index({(c[0] + 2) % 6, (c[1] + 5) % 6})] = u[x];
    swapped[g.index({c[1], c[0]})] = u[x];
  }
  CHECK(std::abs(dirichlet_energy(GridMap(g, s, shifted)) - E) <= 1e-12 * E);
  CHECK(std::abs(dirichlet_energy(GridMap(g, s, swapped)) - E) <= 1e-12 * E);
}

TEST_CASE("Euclidean energy equals the quadratic form of the difference operator")
{
  Rng rng(24);
  const Grid g(2, 5, 2.5);
  const auto s = TargetSpace::euclidean(2);
  const auto u = random_map(g, s, rng);
  // dense D_h: one row per (node, axis, component)
  double q = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x)
    for (int axis = 0; axis < 2; ++axis)
      for (int comp = 0; comp < 2; ++comp) {
        double row = 0.0;
        for (std::size_t y = 0; y < g.size(); ++y) {
          double coef = 0.0;
          if (y == g.neighbor(x, axis, +1)) coef += 1.0 / g.h();
          if (y == x) coef -= 1.0 / g.h();
          row += coef * u[y].as<EuclideanPoint>().coords[static_cast<std::size_t>(comp)];
        }
        q += row * row;
      }
  const double E = dirichlet_energy(u);
  CHECK(std::abs(0.5 * g.cell_volume() * q - E) <= 1e-12 * E);
}

TEST_CASE("compensated sum keeps small terms")
{
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 10; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-15).epsilon(1e-6));
}

TEST_CASE("presets")
{
  const Grid g(1, 24, 6.0);
  const auto s3 = TargetSpace::spider(3);
  SUBCASE("constant")
  {
    const auto u = make_preset(g, s3, {PresetKind::constant});
    CHECK(dirichlet_energy(u) == 0.0);
  }
  SUBCASE("three_ray_symmetric is invariant under rotation plus a third-period shift")
  {
    PresetParams p;
    p.kind = PresetKind::three_ray_symmetric;
    const auto u = make_preset(g, s3, p);
    for (std::size_t x = 0; x < g.size(); ++x) {
      const auto& a = u[x].as<SpiderPoint>();
      const auto& b = u[(x + 8) % 24].as<SpiderPoint>();
      CHECK(b.radius == a.radius);
      if (a.radius > 0) CHECK(b.ray == (a.ray + 1) % 3);
    }
    CHECK_THROWS_AS(make_preset(g, TargetSpace::euclidean(1), p), KindMismatch);
  }
  SUBCASE("two_ray_step uses rays 0 and 1 only")
  {
    PresetParams p;
    p.kind = PresetKind::two_ray_step;
    const auto u = make_preset(g, s3, p);
    for (const auto& v : u.values()) CHECK(v.as<SpiderPoint>().ray != 2);
  }
  SUBCASE("random_smooth is seeded and scaled")
  {
    PresetParams p;
    p.seed = 5;
    p.amplitude = 0.7;
    const auto f = random_smooth_field(g, 5, 0.7, 0.5);
    double mx = 0.0;
    for (double v : f) mx = std::max(mx, std::abs(v));
    CHECK(mx == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(make_preset(g, s3, p) == make_preset(g, s3, p));
    PresetParams q = p;
    q.seed = 6;
    CHECK(!(make_preset(g, s3, p) == make_preset(g, s3, q)));
  }
  SUBCASE("linear_core is the clamped coordinate")
  {
    PresetParams p;
    p.kind = PresetKind::linear_core;
    p.core_half_width = 2.0;
    const auto u = make_preset(g, TargetSpace::euclidean(1), p);
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double want = std::clamp(g.position(x)[0] - 3.0, -2.0, 2.0);
      CHECK(u[x].as<EuclideanPoint>().coords[0] == doctest::Approx(want).epsilon(1e-15));
    }
  }
}
