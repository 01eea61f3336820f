#include "npcflow/oracles.hpp"
#include "npcflow/presets.hpp"
#include "npcflow/random.hpp"
#include "npcflow/verifiers.hpp"

#include <doctest.h>

#include <sstream>

#include <cmath>

using namespace npcflow;

namespace {

GridMap smooth(const Grid& g, const TargetSpace& s, std::uint64_t seed)
{
  PresetParams p;
  p.seed = seed;
  return make_preset(g, s, p);
}

SliceField random_field(const Grid& g, int slices, Rng& rng)
{
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SliceField f{g, 0.01, {}};
  for (int j = 0; j < slices; ++j) {
    std::vector<double> row(g.size());
    for (auto& v : row) v = U(rng);
    f.values.push_back(std::move(row));
  }
  return f;
}

} // namespace

TEST_CASE("bump profile")
{
  CHECK(bump_profile(0.0) == 1.0);
  CHECK(bump_profile(0.5) == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(-1.5) == 0.0);
}

TEST_CASE("family stays off the first and last two slices")
{
  const Grid g(1, 32, 2.0);
  const auto fam = TestFunctionFamily::lattice(g, 40, 4, 4, {{4, 4}, {8, 8}});
  REQUIRE(fam.size() > 0);
  for (const auto& c : fam.centers) {
    CHECK(c.slice - 8 >= 1);
    CHECK(c.slice + 8 <= 38);
  }
  Rng rng(41);
  const auto f = random_field(g, 40, rng);
  TestFunctionFamily bad{{{0, 2}}, {{2, 2}}};
  CHECK_THROWS_AS(weak_pairing(f, {}, bad, 0), DomainError);
  TestFunctionFamily wide{{{0, 10}}, {{16, 2}}};
  CHECK_THROWS_AS(weak_pairing(f, {}, wide, 0), DomainError);
}

TEST_CASE("summation by parts is exact")
{
  Rng rng(42);
  for (int n : {1, 2}) {
    const Grid g(n, n == 1 ? 24 : 12, 3.0);
    const auto f = random_field(g, 30, rng);
    const auto fam = TestFunctionFamily::lattice(g, 30, 3, 3, {{2, 3}, {4, 5}});
    for (const ParabolicCoefficients c : {ParabolicCoefficients{0, 1, 1, 0}, ParabolicCoefficients{0.05, 1, 1, 0},
                                          ParabolicCoefficients{0, 1, 2, 0}, ParabolicCoefficients{0.3, -0.7, 1.9, 2.5}}) {
      for (std::size_t m = 0; m < fam.size(); ++m) {
        const double a = weak_pairing(f, c, fam, m), b = weak_pairing_on_field(f, c, fam, m);
        const double scale = std::max(1.0, bump_mass(f, fam, m) * (c.a_tt / (f.dt * f.dt) + c.a_t / f.dt +
                                                                   c.a_lap / (g.h() * g.h()) + std::abs(c.a_0)));
        CHECK(std::abs(a - b) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("constant-in-time trace: time density pairings vanish")
{
  const Grid g(1, 32, 2.0);
  const auto u = smooth(g, TargetSpace::spider(3), 1);
  FlowTrace t;
  t.tau = 0.01;
  t.slices.assign(30, u);
  const auto view = SliceView::of(t);
  const auto fam = TestFunctionFamily::lattice(g, 29, 4, 4, {{4, 4}});
  const auto f = compute_field(view, {FieldKind::time_density, 1});
  for (std::size_t m = 0; m < fam.size(); ++m) CHECK(weak_pairing(f, {0, 1, 2, 0}, fam, m) == 0.0);
  const auto rep = weak_parabolic_residual(view, {FieldKind::time_density, 1}, {0, 1, 2, 0}, fam);
  CHECK(rep.pass);
  CHECK(rep.worst_value == 0.0);
}

TEST_CASE("gradient density audit on the linear heat flow, cross-checked with the Fourier solution")
{
  const Grid g(1, 64, 4.0);
  const auto u0 = smooth(g, TargetSpace::euclidean(1), 2);
  const auto trace = run_flow(u0, 0.005, 100, {});
  const auto view = SliceView::of(trace);
  const auto fam = TestFunctionFamily::lattice(g, 101, 4, 4, {{4, 4}, {8, 8}});
  const auto rep = weak_parabolic_residual(view, {FieldKind::grad_density, 1}, {0, 1, 1, 0}, fam);
  CHECK(rep.pass);
  // |grad u|^2 of the mode-by-mode solution agrees with the solver field
  std::vector<double> f0;
  for (const auto& p : u0.values()) f0.push_back(p.as<EuclideanPoint>().coords[0]);
  const auto f = compute_field(view, {FieldKind::grad_density, 1});
  for (int k : {0, 37, 100}) {
    const auto mode = fourier_heat_oracle(g, f0, 0.005, k);
    std::vector<TargetPoint> pts;
    for (double v : mode.values) pts.push_back(TargetPoint::euclidean({v}));
    const auto dens = energy_density(GridMap(g, TargetSpace::euclidean(1), pts)).values;
    for (std::size_t x = 0; x < g.size(); ++x) CHECK(std::abs(dens[x] - f.values[static_cast<std::size_t>(k)][x]) < 1e-9);
  }
  // the strong form (d_t - Delta)|grad u|^2 <= 0 holds pointwise on the oracle solution
  const auto oracle = euclid_heat_oracle(u0, 0.005, 100);
  const auto fo = compute_field(SliceView::of(oracle), {FieldKind::grad_density, 1});
  const auto ro = weak_parabolic_residual(SliceView::of(oracle), {FieldKind::grad_density, 1}, {0, 1, 1, 0}, fam);
  CHECK(std::abs(ro.worst_value - rep.worst_value) < 1e-8);
}

TEST_CASE("curvature term shifts the pairing by a_0 times the mass-weighted field")
{
  Rng rng(43);
  const Grid g(1, 16, 2.0);
  auto f = random_field(g, 20, rng);
  for (auto& row : f.values)
    for (auto& v : row) v = 1.0;
  const auto fam = TestFunctionFamily::lattice(g, 20, 4, 4, {{3, 3}});
  for (std::size_t m = 0; m < fam.size(); ++m) {
    const double base = weak_pairing(f, {0, 1, 1, 0}, fam, m);
    const double with = weak_pairing(f, {0, 1, 1, 0.5}, fam, m);
    CHECK(std::abs(with - base - 0.5 * bump_mass(f, fam, m)) < 1e-12);
  }
}

TEST_CASE("evi residual")
{
  const Grid g(1, 32, 4.0);
  const auto u0 = smooth(g, TargetSpace::euclidean(1), 3);
  const auto trace = run_flow(u0, 0.01, 40, {});
  const auto oracle = euclid_heat_oracle(u0, 0.01, 40);
  std::vector<GridMap> comps{u0, smooth(g, TargetSpace::euclidean(1), 4)};
  const auto a = evi_residual(trace, comps), b = evi_residual(oracle, comps);
  CHECK(a.pass);
  CHECK(std::abs(a.worst_value - b.worst_value) < 1e-10);

  // competitor at the barycenter of u0
  const auto s = TargetSpace::spider(3);
  const auto v0 = smooth(g, s, 5);
  const std::vector<double> w(g.size(), 1.0);
  const GridMap bary(g, s, barycenter(s, v0.values(), w));
  const auto st = run_flow(v0, 0.01, 100, {});
  const auto r = evi_residual(st, {bary});
  CHECK(r.pass);
  CHECK(r.worst_value <= 0.0);

  // w = u^{k+1}: first term nonpositive, energy terms cancel
  for (std::size_t k = 0; k + 1 < st.slices.size(); k += 10) {
    FlowTrace one;
    one.tau = st.tau;
    one.slices = {st.slices[k], st.slices[k + 1]};
    CHECK(evi_residual(one, {st.slices[k + 1]}).worst_value <= 0.0);
  }
}

TEST_CASE("dissipation and contraction on a spider flow")
{
  const Grid g(1, 32, 4.0);
  const auto s = TargetSpace::spider(3);
  const auto a = run_flow(smooth(g, s, 6), 0.01, 50, {});
  const auto b = run_flow(smooth(g, s, 7), 0.01, 50, {});
  CHECK(dissipation_check(a).pass);
  CHECK(contraction_check(a, b).pass);
  CHECK(contraction_check(a, b).worst_value <= 1e-9);
}

TEST_CASE("frequency")
{
  SUBCASE("constant map is degenerate")
  {
    const Grid g(1, 128, 8.0);
    FlowTrace t;
    t.tau = 0.01;
    t.slices.assign(60, GridMap(g, TargetSpace::spider(3), TargetPoint::spider(0, 1)));
    CHECK_THROWS_AS(frequency(SliceView::of(t), {64, 59}, 0.3), DegenerateFrequency);
  }
  SUBCASE("linear core has frequency one")
  {
    const Grid g(1, 256, 16.0);
    PresetParams p;
    p.kind = PresetKind::linear_core;
    p.core_half_width = 6.0;
    const auto u0 = make_preset(g, TargetSpace::euclidean(1), p);
    const auto t = run_flow(u0, 0.01, 100, {});
    const auto view = SliceView::of(t);
    const std::vector<double> R{0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
    for (double r : R) CHECK(std::abs(frequency(view, {128, 100}, r).N - 1.0) < 2e-2);
    CHECK(frequency_profile(view, {128, 100}, R).pass);
    CHECK(frequency_profile(view, {128, 100}, {0.3}).pass);
    // collar: six standard deviations must fit in half the torus
    CHECK_THROWS_AS(frequency(view, {128, 100}, 1.0), DomainError);
    // radii outside [4h, sqrt(t0)/2]
    CHECK_THROWS_AS(frequency_profile(view, {128, 100}, {0.1, 0.3}), DomainError);
    CHECK_THROWS_AS(frequency_profile(view, {128, 100}, {0.4, 0.3}), DomainError);
  }
  SUBCASE("spider data: profile nondecreasing and N >= 1")
  {
    const Grid g(1, 128, 8.0);
    PresetParams p;
    p.kind = PresetKind::two_ray_step;
    const auto t = run_flow(make_preset(g, TargetSpace::spider(3), p), 0.005, 100, {});
    const auto view = SliceView::of(t);
    const std::vector<double> R{0.25, 0.3, 0.35};
    for (std::size_t x : {std::size_t{0}, std::size_t{32}, std::size_t{64}, std::size_t{96}}) {
      const auto rep = frequency_profile(view, {x, 100}, R);
      CHECK(rep.pass);
      for (double r : R) CHECK(frequency(view, {x, 100}, r).N >= 1.0 - 5e-2);
    }
  }
}

TEST_CASE("lipschitz scan")
{
  const Grid g(1, 32, 4.0);
  const GridMap c(g, TargetSpace::spider(3), TargetPoint::spider(1, 0.5));
  const auto stc = wed_minimize(c, 0.04, 0.01, 0.6, {});
  CHECK(lipschitz_scan(stc, {{0, 20}}, {0.2}, 0.0).worst_value == 0.0);

  const auto u0 = smooth(g, TargetSpace::spider(3), 8);
  const double E0 = dirichlet_energy(u0);
  const auto st = wed_minimize(u0, 0.04, 0.01, 0.6, {});
  // c from the definition, by hand
  const double r = 0.2;
  const int j0 = 30;
  double sup = 0.0;
  for (int j = j0 - 4; j <= j0 + 4; ++j) {
    const auto d = energy_density(st.slices[static_cast<std::size_t>(j)]).values;
    for (std::size_t x = 0; x < g.size(); ++x)
      if (g.torus_dist2(x, 5) <= r * r + 1e-12) sup = std::max(sup, d[x]);
  }
  const double want = sup / ((0.04 / std::pow(r, 3) + 1.0 / r) * E0);
  const auto rep = lipschitz_scan(st, {{5, j0}}, {r}, E0);
  CHECK(rep.worst_value == doctest::Approx(want).epsilon(1e-12));
  CHECK(lipschitz_scan(st, {{5, j0}}, {r}, E0, want).pass);
  CHECK_FALSE(lipschitz_scan(st, {{5, j0}}, {r}, E0, 0.5 * want).pass);
  CHECK_THROWS_AS(lipschitz_scan(st, {{5, j0}}, {0.1}, E0), DomainError); // eps > r^2
  CHECK_THROWS_AS(lipschitz_scan(st, {{5, 2}}, {0.2}, E0), DomainError);  // exits the time range
}

TEST_CASE("harnack values")
{
  const Grid g(1, 32, 4.0);
  FlowTrace t;
  t.tau = 0.01;
  t.slices.assign(80, GridMap(g, TargetSpace::spider(3), TargetPoint::spider(0, 0.2)));
  const auto v = harnack_values(SliceView::of(t), {{0, 40}}, {0.2, 0.1}, 1.0);
  CHECK(v == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(harnack_values(SliceView::of(t), {{0, 75}}, {0.2}, 1.0), DomainError);
}

TEST_CASE("wed convergence study")
{
  const Grid g(1, 16, 2.0);
  SUBCASE("single eps passes trivially")
  {
    ConvergenceStudyOptions o;
    o.dt = 0.0125;
    o.t_compare = 0.25;
    const auto rep = wed_convergence_study(smooth(g, TargetSpace::spider(3), 9), {0.1}, o);
    CHECK(rep.pass);
    CHECK(rep.worst_value > 0.0);
  }
  SUBCASE("Euclidean gaps match the oracle gaps")
  {
    const auto u0 = smooth(g, TargetSpace::euclidean(1), 10);
    ConvergenceStudyOptions o;
    o.dt = 0.0125;
    o.t_compare = 0.25;
    o.wed.solver.tolerance = 1e-11;
    const std::vector<double> eps{0.1, 0.05};
    const auto rep = wed_convergence_study(u0, eps, o);
    const auto ref = euclid_heat_oracle(u0, o.dt, 20);
    for (double e : eps) {
      const auto st = wed_quadratic_oracle(u0, e, o.dt, o.t_compare + 10 * e);
      double acc = 0.0;
      for (int j = 0; j <= 20; ++j)
        acc += o.dt * l2_distance2(st.slices[static_cast<std::size_t>(j)], ref.slices[static_cast<std::size_t>(j)]);
      std::ostringstream key;
      key << "gap(eps=" << e << ")";
      CHECK(std::abs(rep.metric(key.str()) - std::sqrt(acc)) < 1e-8);
    }
  }
}

TEST_CASE("wed energy bound")
{
  const Grid g(1, 16, 2.0);
  const auto st = wed_minimize(smooth(g, TargetSpace::spider(3), 11), 0.1, 0.025, 1.0, {});
  const auto rep = wed_energy_bound(st);
  CHECK(rep.pass);
  CHECK(rep.metric("ratio") > 0.0);
  CHECK(rep.worst_value == std::max(0.0, rep.metric("ratio") - 1.0));
}
