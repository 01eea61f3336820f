#include "npcflow/verifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace npcflow {

namespace {

std::string resolution_of(const Grid& g, double dt)
{
  std::ostringstream os;
  os << "n=" << g.dim() << " N=" << g.nodes_per_axis() << " L=" << g.length() << " dt=" << dt;
  return os.str();
}

std::string node_label(const Grid& g, std::size_t node)
{
  const auto c = g.coords(node);
  std::ostringstream os;
  os << "node " << node << " (" << c[0];
  if (g.dim() == 2) os << "," << c[1];
  os << ")";
  return os.str();
}

struct Member {
  SpaceTimeNode center;
  BumpRadius radius;
};

Member member_of(const TestFunctionFamily& family, std::size_t m)
{
  if (m >= family.size()) throw DomainError("test function index out of range");
  return {family.centers[m / family.radii.size()], family.radii[m % family.radii.size()]};
}

void check_member(const SliceField& f, const Member& mb)
{
  const int K = static_cast<int>(f.values.size());
  if (mb.radius.space < 1 || mb.radius.time < 1) throw DomainError("bump radii must be at least one cell");
  if (2 * mb.radius.space >= f.grid.nodes_per_axis()) throw DomainError("bump wider than half the torus");
  if (mb.center.slice - mb.radius.time < 1 || mb.center.slice + mb.radius.time > K - 2)
    throw DomainError("test function touches the first or last two slices");
  if (mb.center.node >= f.grid.size()) throw DomainError("bump center outside the grid");
}

double eta(const Member& mb, int a0, int a1, int b, int n)
{
  double v = bump_profile(static_cast<double>(b) / mb.radius.time) *
             bump_profile(static_cast<double>(a0) / mb.radius.space);
  if (n == 2) v *= bump_profile(static_cast<double>(a1) / mb.radius.space);
  return v;
}

std::size_t shifted(const Grid& g, std::size_t node, int a0, int a1)
{
  auto c = g.coords(node);
  c[0] += a0;
  if (g.dim() == 2) c[1] += a1;
  return g.index(c);
}

// Visits all offsets (a0, a1, b) with |a_i| <= rs, |b| <= rt.
template <class Fn> void for_box(const Grid& g, const Member& mb, int shrink, Fn&& fn)
{
  const int rs = mb.radius.space - shrink, rt = mb.radius.time - shrink;
  const int r1 = g.dim() == 2 ? rs : 0;
  for (int b = -rt; b <= rt; ++b)
    for (int a0 = -rs; a0 <= rs; ++a0)
      for (int a1 = -r1; a1 <= r1; ++a1) fn(a0, a1, b);
}

double ratio_of(const std::vector<double>& v)
{
  const double mx = *std::max_element(v.begin(), v.end());
  const double mn = *std::min_element(v.begin(), v.end());
  // all-zero values (constant data): nothing to compare, report 0
  if (mx == 0.0 && mn == 0.0) return 0.0;
  if (mn <= 0.0) return std::numeric_limits<double>::infinity();
  return mx / mn;
}

std::string fmt(double v)
{
  std::ostringstream os;
  os << v;
  return os.str();
}

} // namespace

double VerifierReport::metric(const std::string& name) const
{
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw std::out_of_range("no metric '" + name + "' in report " + id);
}

double bump_profile(double s)
{
  if (std::abs(s) >= 1.0) return 0.0;
  const double u = 1.0 - s * s;
  return u * u;
}

TestFunctionFamily TestFunctionFamily::lattice(const Grid& grid, int slices, int space_stride, int time_stride,
                                               std::vector<BumpRadius> radii)
{
  if (space_stride < 1 || time_stride < 1) throw DomainError("family strides must be positive");
  if (radii.empty()) throw DomainError("family needs at least one radius");
  int rt = 0;
  for (const auto& r : radii) rt = std::max(rt, r.time);
  TestFunctionFamily fam;
  fam.radii = std::move(radii);
  const int N = grid.nodes_per_axis();
  for (int j = 1 + rt; j + rt <= slices - 2; j += time_stride)
    for (int i0 = 0; i0 < N; i0 += space_stride) {
      if (grid.dim() == 1) {
        fam.centers.push_back({grid.index({i0, 0}), j});
        continue;
      }
      for (int i1 = 0; i1 < N; i1 += space_stride) fam.centers.push_back({grid.index({i0, i1}), j});
    }
  return fam;
}

std::string FieldSpec::label() const
{
  switch (kind) {
  case FieldKind::grad_density: return "grad_density";
  case FieldKind::time_density: return "time_density";
  case FieldKind::pair_distance: return "pair_distance(" + std::to_string(delta) + ")";
  }
  return "?";
}

SliceField compute_field(const SliceView& view, const FieldSpec& spec)
{
  if (view.slices == nullptr || view.slices->empty()) throw DomainError("empty slice sequence");
  const auto& s = *view.slices;
  SliceField f{view.grid(), view.dt, {}};
  switch (spec.kind) {
  case FieldKind::grad_density:
    for (const auto& u : s) f.values.push_back(energy_density(u).values);
    break;
  case FieldKind::time_density:
    if (s.size() < 2) throw DomainError("time density needs two slices");
    for (std::size_t j = 0; j + 1 < s.size(); ++j) f.values.push_back(time_density(s[j], s[j + 1], view.dt).values);
    break;
  case FieldKind::pair_distance: {
    if (spec.delta < 1) throw DomainError("pair distance offset must be positive");
    const auto d = static_cast<std::size_t>(spec.delta);
    if (s.size() <= d) throw DomainError("pair distance offset exceeds the trace");
    for (std::size_t j = 0; j + d < s.size(); ++j) f.values.push_back(pointwise_dist2(s[j], s[j + d]).values);
    break;
  }
  }
  return f;
}

double bump_mass(const SliceField& f, const TestFunctionFamily& family, std::size_t member)
{
  const Member mb = member_of(family, member);
  check_member(f, mb);
  CompensatedSum acc;
  for_box(f.grid, mb, 0, [&](int a0, int a1, int b) { acc.add(eta(mb, a0, a1, b, f.grid.dim())); });
  return acc.value() * f.grid.cell_volume() * f.dt;
}

double weak_pairing(const SliceField& f, const ParabolicCoefficients& c, const TestFunctionFamily& family,
                    std::size_t member)
{
  const Member mb = member_of(family, member);
  check_member(f, mb);
  const Grid& g = f.grid;
  const int n = g.dim();
  const double dt = f.dt, h2 = g.h() * g.h();
  CompensatedSum acc;
  for_box(g, mb, 0, [&](int a0, int a1, int b) {
    const double e = eta(mb, a0, a1, b, n);
    const double ep = eta(mb, a0, a1, b + 1, n), em = eta(mb, a0, a1, b - 1, n);
    double lap = eta(mb, a0 + 1, a1, b, n) + eta(mb, a0 - 1, a1, b, n) - 2.0 * e;
    if (n == 2) lap += eta(mb, a0, a1 + 1, b, n) + eta(mb, a0, a1 - 1, b, n) - 2.0 * e;
    const double L = c.a_tt * (ep - 2.0 * e + em) / (dt * dt) + c.a_t * (ep - em) / (2.0 * dt) + c.a_lap * lap / h2 +
                     c.a_0 * e;
    if (L == 0.0) return;
    const auto j = static_cast<std::size_t>(mb.center.slice + b);
    acc.add(f.values[j][shifted(g, mb.center.node, a0, a1)] * L);
  });
  return acc.value() * g.cell_volume() * dt;
}

double weak_pairing_on_field(const SliceField& f, const ParabolicCoefficients& c,
                             const TestFunctionFamily& family, std::size_t member)
{
  const Member mb = member_of(family, member);
  check_member(f, mb);
  const Grid& g = f.grid;
  const int n = g.dim();
  const double dt = f.dt, h2 = g.h() * g.h();
  CompensatedSum acc;
  for_box(g, mb, 1, [&](int a0, int a1, int b) {
    const double e = eta(mb, a0, a1, b, n);
    if (e == 0.0) return;
    const auto j = static_cast<std::size_t>(mb.center.slice + b);
    const std::size_t x = shifted(g, mb.center.node, a0, a1);
    const auto& fj = f.values[j];
    const double fx = fj[x];
    double lap = fj[shifted(g, x, 1, 0)] + fj[shifted(g, x, -1, 0)] - 2.0 * fx;
    if (n == 2) lap += fj[shifted(g, x, 0, 1)] + fj[shifted(g, x, 0, -1)] - 2.0 * fx;
    const double fp = f.values[j + 1][x], fm = f.values[j - 1][x];
    acc.add(e * (c.a_tt * (fp - 2.0 * fx + fm) / (dt * dt) - c.a_t * (fp - fm) / (2.0 * dt) + c.a_lap * lap / h2 + c.a_0 * fx));
  });
  return acc.value() * g.cell_volume() * dt;
}

VerifierReport weak_parabolic_residual(const SliceView& view, const FieldSpec& field, const ParabolicCoefficients& c,
                                       const TestFunctionFamily& family, double tolerance)
{
  const SliceField f = compute_field(view, field);
  VerifierReport r;
  std::ostringstream id;
  id << "weak_parabolic[" << field.label() << "; " << c.a_tt << "," << c.a_t << "," << c.a_lap;
  if (c.a_0 != 0.0) id << "," << c.a_0;
  id << "]";
  r.id = id.str();
  r.tolerance = tolerance;
  r.resolution = resolution_of(f.grid, f.dt);
  if (family.size() == 0) {
    r.note = "empty test function family";
    return r;
  }

  int lo = std::numeric_limits<int>::max(), hi = 0;
  for (std::size_t m = 0; m < family.size(); ++m) {
    const Member mb = member_of(family, m);
    check_member(f, mb);
    lo = std::min(lo, mb.center.slice - mb.radius.time);
    hi = std::max(hi, mb.center.slice + mb.radius.time);
  }
  double fmax = 0.0;
  for (int j = lo; j <= hi; ++j)
    for (double v : f.values[static_cast<std::size_t>(j)]) fmax = std::max(fmax, std::abs(v));

  double worst = std::numeric_limits<double>::infinity();
  double worst_raw = 0.0, worst_norm = 1.0;
  std::size_t worst_m = 0;
  for (std::size_t m = 0; m < family.size(); ++m) {
    const double p = weak_pairing(f, c, family, m);
    const double norm = fmax * bump_mass(f, family, m);
    const double v = norm > 0.0 ? p / norm : 0.0;
    if (v < worst) {
      worst = v;
      worst_raw = p;
      worst_norm = norm;
      worst_m = m;
    }
  }
  const Member mb = member_of(family, worst_m);
  r.worst_value = worst;
  r.normalization = worst_norm;
  r.pass = worst >= -tolerance;
  r.location = node_label(f.grid, mb.center.node) + ", slice " + std::to_string(mb.center.slice) + ", radius (" +
               std::to_string(mb.radius.space) + "," + std::to_string(mb.radius.time) + ")";
  r.metrics = {{"raw_pairing", worst_raw}, {"field_sup", fmax}, {"members", static_cast<double>(family.size())}};
  return r;
}

VerifierReport evi_residual(const FlowTrace& trace, const std::vector<GridMap>& competitors, double rel_tolerance)
{
  VerifierReport r;
  r.id = "evi";
  r.resolution = resolution_of(trace.grid(), trace.tau);
  const double E0 = dirichlet_energy(trace.slices.front());
  r.tolerance = rel_tolerance * (1.0 + E0);
  r.worst_value = -std::numeric_limits<double>::infinity();
  const double tau = trace.tau;
  for (std::size_t i = 0; i < competitors.size(); ++i) {
    const GridMap& w = competitors[i];
    check_compatible(trace.slices.front(), w);
    const double Ew = dirichlet_energy(w);
    double d_prev = l2_distance2(trace.slices.front(), w);
    for (std::size_t k = 0; k + 1 < trace.slices.size(); ++k) {
      const double d_next = l2_distance2(trace.slices[k + 1], w);
      const double v = (d_next - d_prev) / (2.0 * tau) + dirichlet_energy(trace.slices[k + 1]) - Ew;
      if (v > r.worst_value) {
        r.worst_value = v;
        r.location = "step " + std::to_string(k) + ", competitor " + std::to_string(i);
      }
      d_prev = d_next;
    }
  }
  if (competitors.empty() || trace.slices.size() < 2) r.worst_value = 0.0;
  r.pass = r.worst_value <= r.tolerance;
  r.metrics = {{"initial_energy", E0}, {"competitors", static_cast<double>(competitors.size())}};
  return r;
}

VerifierReport contraction_check(const FlowTrace& a, const FlowTrace& b, double tolerance)
{
  if (a.slices.size() != b.slices.size()) throw DomainError("contraction check needs traces of equal length");
  VerifierReport r;
  r.id = "contraction";
  r.tolerance = tolerance;
  r.resolution = resolution_of(a.grid(), a.tau);
  r.worst_value = -std::numeric_limits<double>::infinity();
  double prev = l2_distance(a.slices[0], b.slices[0]);
  const double first = prev;
  for (std::size_t k = 1; k < a.slices.size(); ++k) {
    const double d = l2_distance(a.slices[k], b.slices[k]);
    if (d - prev > r.worst_value) {
      r.worst_value = d - prev;
      r.location = "step " + std::to_string(k - 1);
    }
    prev = d;
  }
  if (a.slices.size() < 2) r.worst_value = 0.0;
  r.pass = r.worst_value <= tolerance;
  r.metrics = {{"initial_distance", first}, {"final_distance", prev}};
  return r;
}

VerifierReport dissipation_check(const FlowTrace& trace, double rel_tolerance)
{
  VerifierReport r;
  r.id = "dissipation";
  r.resolution = resolution_of(trace.grid(), trace.tau);
  const double E0 = dirichlet_energy(trace.slices.front());
  r.tolerance = rel_tolerance * E0;
  r.worst_value = -std::numeric_limits<double>::infinity();
  double max_increase = -std::numeric_limits<double>::infinity();
  double E_prev = E0;
  for (std::size_t k = 0; k + 1 < trace.slices.size(); ++k) {
    const double E = dirichlet_energy(trace.slices[k + 1]);
    const double v = E + l2_distance2(trace.slices[k + 1], trace.slices[k]) / (2.0 * trace.tau) - E_prev;
    if (v > r.worst_value) {
      r.worst_value = v;
      r.location = "step " + std::to_string(k);
    }
    max_increase = std::max(max_increase, E - E_prev);
    E_prev = E;
  }
  if (trace.slices.size() < 2) r.worst_value = max_increase = 0.0;
  r.pass = r.worst_value <= r.tolerance;
  r.metrics = {{"initial_energy", E0}, {"final_energy", E_prev}, {"max_energy_increase", max_increase}};
  return r;
}

VerifierReport lipschitz_scan(const SpaceTimeMap& st, const std::vector<SpaceTimeNode>& centers,
                              const std::vector<double>& r_list, double E0, std::optional<double> reference)
{
  const Grid& g = st.grid();
  const int n = g.dim();
  const double dt = st.dt;
  const int K = static_cast<int>(st.slices.size());
  std::vector<std::vector<double>> density(st.slices.size());

  VerifierReport rep;
  rep.id = "lipschitz_scan";
  rep.resolution = resolution_of(g, dt) + " eps=" + fmt(st.eps);
  rep.worst_value = 0.0;
  for (double r : r_list) {
    if (!(r > 0.0)) throw DomainError("scan radius must be positive");
    if (st.eps > r * r * (1.0 + 1e-12)) throw DomainError("lipschitz scan needs eps <= r^2");
    if (r >= 0.5 * g.length()) throw DomainError("scan ball wider than half the torus");
    const double bound = (st.eps / std::pow(r, n + 2) + 1.0 / std::pow(r, n)) * E0;
    double c_max = 0.0;
    for (const auto& z : centers) {
      const double t0 = z.slice * dt;
      const int j_lo = static_cast<int>(std::ceil((t0 - r * r) / dt - 1e-9));
      const int j_hi = static_cast<int>(std::floor((t0 + r * r) / dt + 1e-9));
      if (t0 - r * r < -1e-12 || j_hi > K - 1) throw DomainError("parabolic cylinder exits the time range");
      double sup = 0.0;
      for (int j = std::max(j_lo, 0); j <= j_hi; ++j) {
        auto& dj = density[static_cast<std::size_t>(j)];
        if (dj.empty()) dj = energy_density(st.slices[static_cast<std::size_t>(j)]).values;
        for (std::size_t x = 0; x < g.size(); ++x)
          if (g.torus_dist2(x, z.node) <= r * r) sup = std::max(sup, dj[x]);
      }
      const double c = bound > 0.0 ? sup / bound : 0.0;
      if (c > c_max) c_max = c;
      if (c > rep.worst_value) {
        rep.worst_value = c;
        rep.location = node_label(g, z.node) + ", slice " + std::to_string(z.slice) + ", r " + fmt(r);
      }
    }
    rep.metrics.emplace_back("c(r=" + fmt(r) + ")", c_max);
  }
  if (reference) {
    rep.tolerance = 1.25 * *reference;
    rep.pass = rep.worst_value <= rep.tolerance;
  } else {
    rep.tolerance = std::numeric_limits<double>::infinity();
    rep.pass = std::isfinite(rep.worst_value);
  }
  return rep;
}

std::vector<double> harnack_values(const SliceView& view, const std::vector<SpaceTimeNode>& centers,
                                   const std::vector<double>& R_list, double E0)
{
  const SliceField f = compute_field(view, FieldSpec{FieldKind::time_density, 1});
  const Grid& g = f.grid;
  const int n = g.dim();
  const int K = static_cast<int>(f.values.size());
  std::vector<double> out;
  for (double R : R_list) {
    if (!(R > 0.0) || R >= 0.5 * g.length()) throw DomainError("Harnack radius must be in (0, L/2)");
    double best = 0.0;
    for (const auto& z : centers) {
      const double t0 = z.slice * f.dt;
      const int j_lo = static_cast<int>(std::ceil((t0 - R * R) / f.dt - 1e-9));
      const int j_hi = static_cast<int>(std::floor((t0 + R * R) / f.dt + 1e-9));
      if (t0 - R * R < -1e-12 || j_hi > K - 1) throw DomainError("parabolic cylinder exits the time range");
      double sup = 0.0;
      for (int j = std::max(j_lo, 0); j <= j_hi; ++j)
        for (std::size_t x = 0; x < g.size(); ++x)
          if (g.torus_dist2(x, z.node) <= R * R) sup = std::max(sup, f.values[static_cast<std::size_t>(j)][x]);
      best = std::max(best, E0 > 0.0 ? sup * std::pow(R, n + 2) / E0 : 0.0);
    }
    out.push_back(best);
  }
  return out;
}

VerifierReport lipschitz_scaling_study(const GridMap& u0, const std::vector<ScanCenter>& centers,
                                       const std::vector<double>& r_list, const WedOptions& opts,
                                       double dt_divisor, double ratio_limit)
{
  if (r_list.empty() || centers.empty()) throw DomainError("scaling study needs radii and centers");
  VerifierReport rep;
  rep.id = "lipschitz_scaling";
  rep.tolerance = ratio_limit;
  rep.resolution = resolution_of(u0.grid(), 0.0);
  const double E0 = dirichlet_energy(u0);
  double t_max = 0.0;
  for (const auto& c : centers) t_max = std::max(t_max, c.time);
  std::vector<double> values;
  for (double r : r_list) {
    const double eps = r * r;
    const double dt = eps / dt_divisor;
    const double T = std::max(10.0 * eps, t_max + eps + dt);
    const SpaceTimeMap st = wed_minimize(u0, eps, dt, T, opts);
    std::vector<SpaceTimeNode> nodes;
    for (const auto& c : centers) nodes.push_back({c.node, static_cast<int>(std::lround(c.time / dt))});
    const VerifierReport one = lipschitz_scan(st, nodes, {r}, E0);
    values.push_back(one.worst_value);
    rep.metrics.emplace_back("c(r=" + fmt(r) + ")", one.worst_value);
    rep.metrics.emplace_back("sweeps(r=" + fmt(r) + ")", st.sweeps);
  }
  rep.worst_value = ratio_of(values);
  rep.pass = rep.worst_value <= ratio_limit;
  rep.location = "max/min of c over r";
  return rep;
}

VerifierReport harnack_scaling_study(const FlowTrace& trace, const std::vector<ScanCenter>& centers,
                                     const std::vector<double>& R_list, double ratio_limit)
{
  VerifierReport rep;
  rep.id = "harnack_scaling";
  rep.tolerance = ratio_limit;
  rep.resolution = resolution_of(trace.grid(), trace.tau);
  std::vector<SpaceTimeNode> nodes;
  for (const auto& c : centers) nodes.push_back({c.node, static_cast<int>(std::lround(c.time / trace.tau))});
  const auto values = harnack_values(SliceView::of(trace), nodes, R_list, dirichlet_energy(trace.slices.front()));
  for (std::size_t i = 0; i < R_list.size(); ++i) rep.metrics.emplace_back("value(R=" + fmt(R_list[i]) + ")", values[i]);
  rep.worst_value = ratio_of(values);
  rep.pass = rep.worst_value <= ratio_limit;
  rep.location = "max/min over R";
  return rep;
}

VerifierReport wed_convergence_study(const GridMap& u0, const std::vector<double>& eps_list,
                                     const ConvergenceStudyOptions& opts)
{
  if (eps_list.empty()) throw DomainError("convergence study needs at least one eps");
  if (!(opts.dt > 0.0) || !(opts.t_compare > 0.0)) throw DomainError("convergence study needs dt, t_compare > 0");
  const auto steps = static_cast<int>(std::lround(opts.t_compare / opts.dt));
  const FlowTrace ref = run_flow(u0, opts.dt, steps, opts.wed.solver);

  VerifierReport rep;
  rep.id = "wed_convergence";
  rep.resolution = resolution_of(u0.grid(), opts.dt);
  rep.tolerance = 0.0;
  std::vector<double> gaps;
  for (double eps : eps_list) {
    const SpaceTimeMap st = wed_minimize(u0, eps, opts.dt, opts.t_compare + 10.0 * eps, opts.wed);
    CompensatedSum acc;
    for (int j = 0; j <= steps; ++j)
      acc.add(opts.dt * l2_distance2(st.slices[static_cast<std::size_t>(j)], ref.slices[static_cast<std::size_t>(j)]));
    gaps.push_back(std::sqrt(acc.value()));
    rep.metrics.emplace_back("gap(eps=" + fmt(eps) + ")", gaps.back());
    rep.metrics.emplace_back("sweeps(eps=" + fmt(eps) + ")", st.sweeps);
  }
  // Smallest decrease between neighbors; must stay positive.
  rep.worst_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    const double drop = gaps[i] - gaps[i + 1];
    if (drop < rep.worst_value) {
      rep.worst_value = drop;
      rep.location = "eps " + fmt(eps_list[i]) + " -> " + fmt(eps_list[i + 1]);
    }
    if (gaps[i + 1] > 0.0 && gaps[i] > 0.0)
      rep.metrics.emplace_back("rate(" + fmt(eps_list[i]) + ")", std::log(gaps[i] / gaps[i + 1]) /
                                                                      std::log(eps_list[i] / eps_list[i + 1]));
  }
  const bool all_zero = std::all_of(gaps.begin(), gaps.end(), [](double g) { return g == 0.0; });
  if (all_zero) {
    // flow and WED agree exactly (constant data)
    rep.worst_value = 0.0;
    rep.location = "all gaps zero";
    rep.pass = true;
  } else if (gaps.size() == 1) {
    rep.worst_value = gaps.front();
    rep.location = "single eps";
    rep.pass = true;
  } else {
    rep.pass = rep.worst_value > 0.0;
  }
  return rep;
}

VerifierReport wed_energy_bound(const SpaceTimeMap& st)
{
  VerifierReport rep;
  rep.id = "wed_energy_bound";
  rep.resolution = resolution_of(st.grid(), st.dt) + " eps=" + fmt(st.eps);
  const double ratio = st.dissipation_ratio();
  rep.worst_value = std::max(0.0, ratio - 1.0);
  rep.tolerance = 5e-2;
  rep.pass = rep.worst_value <= rep.tolerance;
  rep.location = "whole horizon";
  rep.metrics = {{"dissipation", st.dissipation}, {"initial_energy", st.initial_energy}, {"ratio", ratio}};
  return rep;
}

} // namespace npcflow
