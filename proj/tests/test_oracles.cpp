#include "npcflow/oracles.hpp"
#include "npcflow/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace npcflow;

TEST_CASE("heat oracle: constant stays constant")
{
  const Grid g(1, 16, 2.0);
  const GridMap u(g, TargetSpace::euclidean(2), TargetPoint::euclidean({1.5, -2.0}));
  const auto t = euclid_heat_oracle(u, 0.1, 5);
  for (const auto& sl : t.slices)
    for (const auto& p : sl.values()) {
      CHECK(std::abs(p.as<EuclideanPoint>().coords[0] - 1.5) < 1e-14);
      CHECK(std::abs(p.as<EuclideanPoint>().coords[1] + 2.0) < 1e-14);
    }
  CHECK_THROWS_AS(euclid_heat_oracle(GridMap(g, TargetSpace::spider(3), TargetPoint::spider(0, 1)), 0.1, 1),
                  KindMismatch);
}

TEST_CASE("heat oracle: single Fourier mode decays by 1/(1 + tau lambda) per step")
{
  const Grid g(1, 32, 4.0);
  const int k = 3;
  std::vector<TargetPoint> pts;
  for (std::size_t x = 0; x < g.size(); ++x)
    pts.push_back(TargetPoint::euclidean({std::cos(2.0 * std::numbers::pi * k * static_cast<double>(x) / 32.0)}));
  const GridMap u(g, TargetSpace::euclidean(1), pts);
  const double tau = 0.01;
  const double lam = (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / 32.0)) / (g.h() * g.h());
  CHECK(laplacian_eigenvalue(g, k) == doctest::Approx(lam).epsilon(1e-14));
  const auto t = euclid_heat_oracle(u, tau, 4);
  const double damp = std::pow(1.0 + tau * lam, -4);
  for (std::size_t x = 0; x < g.size(); ++x)
    CHECK(std::abs(t.slices.back()[x].as<EuclideanPoint>().coords[0] - damp * pts[x].as<EuclideanPoint>().coords[0]) <
          1e-13);
}

TEST_CASE("heat oracle: mean conserved")
{
  const Grid g(2, 8, 2.0);
  PresetParams p;
  p.seed = 3;
  const auto u = make_preset(g, TargetSpace::euclidean(1), p);
  const auto t = euclid_heat_oracle(u, 0.05, 10);
  auto mean = [](const GridMap& m) {
    double s = 0.0;
    for (const auto& q : m.values()) s += q.as<EuclideanPoint>().coords[0];
    return s / static_cast<double>(m.size());
  };
  for (const auto& sl : t.slices) CHECK(std::abs(mean(sl) - mean(u)) < 1e-14);
}

TEST_CASE("grid barycenter oracle examples")
{
  const auto s = TargetSpace::spider(3);
  {
    const std::vector<TargetPoint> pts{TargetPoint::spider(0, 1), TargetPoint::spider(1, 1), TargetPoint::spider(2, 1)};
    const std::vector<double> w{1, 1, 1};
    CHECK(dist(s, grid_barycenter_oracle(s, pts, w, 1e-4), TargetPoint::spider(0, 0)) < 1e-4);
  }
  {
    const std::vector<TargetPoint> pts{TargetPoint::spider(0, 2), TargetPoint::spider(1, 1), TargetPoint::spider(2, 1)};
    const std::vector<double> w{0.5, 0.25, 0.25};
    CHECK(dist(s, grid_barycenter_oracle(s, pts, w, 1e-4), TargetPoint::spider(0, 0.5)) < 1e-4);
  }
  {
    const std::vector<TargetPoint> pts{TargetPoint::spider(2, 1.3)};
    const std::vector<double> w{1.0};
    CHECK(dist(s, grid_barycenter_oracle(s, pts, w, 1e-4), pts[0]) < 1e-4);
  }
}

TEST_CASE("wed oracle: constant and size cap")
{
  const Grid g(1, 8, 2.0);
  const GridMap u(g, TargetSpace::euclidean(1), TargetPoint::euclidean({0.3}));
  const auto st = wed_quadratic_oracle(u, 0.1, 0.025, 1.0);
  CHECK(st.functional == doctest::Approx(0.0));
  for (const auto& sl : st.slices)
    for (const auto& p : sl.values()) CHECK(std::abs(p.as<EuclideanPoint>().coords[0] - 0.3) < 1e-12);
  const Grid big(2, 32, 2.0);
  CHECK_THROWS_AS(wed_quadratic_oracle(GridMap(big, TargetSpace::euclidean(1), TargetPoint::euclidean({0.0})), 0.1,
                                       0.025, 1.0),
                  DomainError);
}

TEST_CASE("wed oracle: single mode stays a single mode")
{
  const Grid g(1, 16, 2.0);
  std::vector<TargetPoint> pts;
  for (std::size_t x = 0; x < g.size(); ++x)
    pts.push_back(TargetPoint::euclidean({std::sin(2.0 * std::numbers::pi * 2.0 * static_cast<double>(x) / 16.0)}));
  const auto st = wed_quadratic_oracle(GridMap(g, TargetSpace::euclidean(1), pts), 0.1, 0.025, 1.0);
  for (const auto& sl : st.slices) {
    // ratio to the initial mode is the same at every node where it is resolvable
    double a = 0.0;
    bool first = true;
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double p0 = pts[x].as<EuclideanPoint>().coords[0];
      if (std::abs(p0) < 0.5) continue;
      const double r = sl[x].as<EuclideanPoint>().coords[0] / p0;
      if (first) a = r, first = false;
      CHECK(std::abs(r - a) < 1e-12);
    }
  }
}

TEST_CASE("fourier oracle matches the heat oracle")
{
  const Grid g(1, 32, 4.0);
  PresetParams p;
  p.seed = 8;
  const auto u = make_preset(g, TargetSpace::euclidean(1), p);
  std::vector<double> f0;
  for (const auto& q : u.values()) f0.push_back(q.as<EuclideanPoint>().coords[0]);
  const auto fo = fourier_heat_oracle(g, f0, 0.01, 20);
  const auto ho = euclid_heat_oracle(u, 0.01, 20);
  for (std::size_t x = 0; x < g.size(); ++x)
    CHECK(std::abs(fo.values[x] - ho.slices.back()[x].as<EuclideanPoint>().coords[0]) < 1e-12);
}
