#include "npcflow/cat0.hpp"
#include "npcflow/oracles.hpp"
#include "npcflow/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace npcflow;

namespace {

const TargetSpace kE2 = TargetSpace::euclidean(2);
const TargetSpace kS3 = TargetSpace::spider(3);
const TargetSpace kH2 = TargetSpace::hyperbolic2();

TargetPoint e2(double a, double b) { return TargetPoint::euclidean({a, b}); }
TargetPoint sp(int ray, double r) { return TargetPoint::spider(ray, r); }

std::vector<TargetSpace> all_spaces()
{
  return {kE2, kS3, TargetSpace::spider(5), kH2,
          TargetSpace::product({TargetSpace::euclidean(1), TargetSpace::spider(3)})};
}

} // namespace

TEST_CASE("dist examples")
{
  CHECK(dist(kE2, e2(0, 0), e2(3, 4)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(dist(kS3, sp(0, 1.5), sp(2, 2.5)) == doctest::Approx(4.0).epsilon(1e-15));
  const TargetPoint far = TargetPoint::hyperboloid(std::sinh(1.0), 0.0);
  CHECK(std::abs(dist(kH2, base_point(kH2), far) - 1.0) < 1e-12);
}

TEST_CASE("spider origin is canonical")
{
  CHECK(sp(2, 0.0) == sp(0, 0.0));
  CHECK(dist(kS3, sp(1, 0.0), sp(2, 0.0)) == 0.0);
  CHECK(sp(2, 0.0).as<SpiderPoint>().ray == 0);
}

TEST_CASE("kind mismatch and invalid points are rejected")
{
  CHECK_THROWS_AS(dist(kE2, e2(0, 0), sp(0, 1)), KindMismatch);
  CHECK_THROWS_AS(dist(kS3, sp(3, 1.0), sp(0, 1.0)), KindMismatch);
  CHECK_THROWS_AS(dist(TargetSpace::euclidean(3), e2(0, 0), e2(1, 1)), KindMismatch);
  CHECK_THROWS_AS(interp(kE2, e2(0, 0), e2(1, 0), 1.5), DomainError);
  CHECK_THROWS_AS(interp(kE2, e2(0, 0), e2(1, 0), -0.1), DomainError);
  const std::vector<TargetPoint> pts{e2(0, 0), e2(1, 0)};
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(barycenter(kE2, pts, zero), DomainError);
}

TEST_CASE("interp examples")
{
  Rng rng(11);
  for (const auto& s : all_spaces()) {
    const auto p = random_point(s, rng), q = random_point(s, rng);
    CHECK(interp(s, p, q, 0.0) == p);
  }
  CHECK(interp(kS3, sp(0, 2), sp(1, 2), 0.5) == sp(0, 0));
  const auto m = interp(kE2, e2(0, 0), e2(4, 0), 0.25);
  CHECK(m == e2(1, 0));
}

TEST_CASE("interp lands at the right distances on every target")
{
  Rng rng(12);
  for (const auto& s : all_spaces()) {
    for (int i = 0; i < 2000; ++i) {
      const auto p = random_point(s, rng), q = random_point(s, rng);
      const double lam = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const auto m = interp(s, p, q, lam);
      const double d = dist(s, p, q);
      CHECK(std::abs(dist(s, m, p) - lam * d) < 1e-10);
      CHECK(std::abs(dist(s, m, q) - (1.0 - lam) * d) < 1e-10);
      // geodesic uniqueness: the same point from the other end
      CHECK(dist(s, m, interp(s, q, p, 1.0 - lam)) < 1e-10);
    }
  }
}

TEST_CASE("hyperboloid points stay on the sheet")
{
  Rng rng(13);
  auto p = random_point(kH2, rng);
  for (int i = 0; i < 500; ++i) {
    p = interp(kH2, p, random_point(kH2, rng), 0.37);
    const auto& x = p.as<HyperboloidPoint>().x;
    CHECK(std::abs(minkowski(x, x) + 1.0) < 1e-12);
    CHECK(x[2] > 0.0);
  }
}

TEST_CASE("barycenter examples")
{
  {
    const std::vector<TargetPoint> pts{e2(0, 0), e2(2, 0)};
    const std::vector<double> w{1.0, 1.0};
    CHECK(dist(kE2, barycenter(kE2, pts, w), e2(1, 0)) < 1e-15);
  }
  {
    const std::vector<TargetPoint> pts{sp(0, 1), sp(1, 1), sp(2, 1)};
    const std::vector<double> w{1.0, 1.0, 1.0};
    CHECK(barycenter(kS3, pts, w) == sp(0, 0));
  }
  {
    const std::vector<TargetPoint> pts{sp(0, 2), sp(1, 1), sp(2, 1)};
    const std::vector<double> w{0.5, 0.25, 0.25};
    const auto b = barycenter(kS3, pts, w);
    CHECK(b.as<SpiderPoint>().ray == 0);
    CHECK(std::abs(b.as<SpiderPoint>().radius - 0.5) < 1e-15);
    // independent exhaustive scan agrees
    const auto o = grid_barycenter_oracle(kS3, pts, w, 1e-4);
    CHECK(dist(kS3, b, o) < 1e-4);
  }
}

TEST_CASE("barycenter first-order certificate on every target")
{
  Rng rng(14);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& s : all_spaces()) {
    for (int i = 0; i < 300; ++i) {
      const int k = 1 + static_cast<int>(rng() % 6);
      std::vector<TargetPoint> pts;
      std::vector<double> w;
      for (int j = 0; j < k; ++j) {
        pts.push_back(random_point(s, rng));
        w.push_back(U(rng) + 0.01);
      }
      const auto b = barycenter(s, pts, w);
      CHECK(barycenter_certificate(s, pts, w, b, 1e-6) <= 1e-10);
      // no sampled competitor does better
      const double f = barycenter_objective(s, pts, w, b);
      for (int j = 0; j < 5; ++j)
        CHECK(barycenter_objective(s, pts, w, interp(s, b, random_point(s, rng), 0.01)) >= f - 1e-12);
    }
  }
}

TEST_CASE("spider barycenter matches the exhaustive scan on random instances")
{
  Rng rng(15);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const int rays : {3, 5}) {
    const auto s = TargetSpace::spider(rays);
    for (int i = 0; i < 1000; ++i) {
      const int k = 1 + static_cast<int>(rng() % 5);
      std::vector<TargetPoint> pts;
      std::vector<double> w;
      double rmax = 0.0;
      for (int j = 0; j < k; ++j) {
        pts.push_back(random_point(s, rng));
        rmax = std::max(rmax, pts.back().as<SpiderPoint>().radius);
        w.push_back(U(rng) + 0.01);
      }
      const double step = 1e-4 * std::max(rmax, 1.0);
      const auto b = barycenter(s, pts, w);
      const auto o = grid_barycenter_oracle(s, pts, w, step);
      CHECK(dist(s, b, o) < 1e-4 * std::max(rmax, 1.0));
    }
  }
}

TEST_CASE("npc quadruple residual examples")
{
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point(kE2, rng), q = random_point(kE2, rng), r = random_point(kE2, rng);
    const double lam = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(std::abs(npc_quadruple_residual(kE2, p, q, r, lam)) < 1e-12);
  }
  CHECK(npc_quadruple_residual(kS3, sp(2, 1), sp(0, 1), sp(1, 1), 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  for (const auto& s : all_spaces()) {
    const auto p = random_point(s, rng);
    CHECK(std::abs(npc_quadruple_residual(s, p, p, p, 0.3)) < 1e-14);
  }
}

TEST_CASE("quadrilateral residual examples")
{
  CHECK(std::abs(quadrilateral_residual(kE2, e2(0, 0), e2(1, 0), e2(1, 1), e2(0, 1))) < 1e-15);
  Rng rng(17);
  for (const auto& s : all_spaces()) {
    const auto p = random_point(s, rng);
    CHECK(quadrilateral_residual(s, p, p, p, p) == 0.0);
  }
  // d(p,q)=2, d(p,r)=2, d(q,r)=2, d(p,s)=d(q,s)=d(r,s)=1:
  // 4 + 1 - (1 - 2)^2 - [4 + 1 - 4 - 1] = 4
  const double v = quadrilateral_residual(kS3, sp(0, 1), sp(1, 1), sp(2, 1), sp(0, 0));
  CHECK(v == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(v >= 0.0);
}

TEST_CASE("interpolation inequality residual examples")
{
  Rng rng(18);
  for (const auto& s : all_spaces()) {
    const auto p = random_point(s, rng), q = random_point(s, rng), r = random_point(s, rng);
    CHECK(std::abs(interpolation_inequality_residual(s, p, q, r, 0.0)) < 1e-12);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_point(kE2, rng), q = random_point(kE2, rng), r = random_point(kE2, rng);
    CHECK(std::abs(interpolation_inequality_residual(kE2, p, q, r, 1.0)) < 1e-12);
  }
}

TEST_CASE("comparison inequalities hold on random samples of every target")
{
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& s : all_spaces()) {
    Rng rng(0xC0FFEE);
    double worst_npc = 0.0, worst_quad = 0.0, worst_interp = 0.0, worst_convex = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const auto p = random_point(s, rng), q = random_point(s, rng), r = random_point(s, rng),
                 t = random_point(s, rng);
      const double lam = U(rng);
      worst_npc = std::min(worst_npc, npc_quadruple_residual(s, p, q, r, lam));
      worst_quad = std::min(worst_quad, quadrilateral_residual(s, p, q, r, t));
      worst_interp = std::min(worst_interp, interpolation_inequality_residual(s, p, q, r, lam));
      // convexity of d^2 re-anchored at t
      const auto m = interp(s, p, q, lam);
      const double rhs = (1 - lam) * dist2(s, t, p) + lam * dist2(s, t, q) - lam * (1 - lam) * dist2(s, p, q);
      worst_convex = std::min(worst_convex, rhs - dist2(s, t, m));
    }
    INFO(s.label());
    CHECK(worst_npc >= -1e-10);
    CHECK(worst_quad >= -1e-10);
    CHECK(worst_interp >= -1e-10);
    CHECK(worst_convex >= -1e-10);
  }
}

TEST_CASE("distance axioms on random samples")
{
  Rng rng(19);
  for (const auto& s : all_spaces()) {
    for (int i = 0; i < 2000; ++i) {
      const auto p = random_point(s, rng), q = random_point(s, rng), r = random_point(s, rng);
      CHECK(dist(s, p, q) == dist(s, q, p));
      CHECK(dist(s, p, p) == 0.0);
      CHECK(dist(s, p, r) <= dist(s, p, q) + dist(s, q, r) + 1e-12);
    }
  }
}
