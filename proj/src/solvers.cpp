#include "npcflow/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace npcflow {

namespace {

// Node visiting order for one sweep.
class SweepSchedule {
public:
  SweepSchedule(const Grid& grid, const SolverOptions& opts) : order_(opts.order), rng_(opts.seed)
  {
    nodes_.resize(grid.size());
    std::iota(nodes_.begin(), nodes_.end(), std::size_t{0});
    if (order_ == SweepOrder::red_black) {
      if (grid.nodes_per_axis() % 2 != 0) throw DomainError("red-black sweeps need an even number of nodes per axis");
      std::stable_partition(nodes_.begin(), nodes_.end(), [&](std::size_t x) {
        const auto c = grid.coords(x);
        return (c[0] + c[1]) % 2 == 0;
      });
    }
  }

  const std::vector<std::size_t>& next()
  {
    if (order_ == SweepOrder::seeded_random) {
      // Fisher-Yates with an explicit draw so the permutation depends only on the seed.
      for (std::size_t i = nodes_.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng_() % i);
        std::swap(nodes_[i - 1], nodes_[j]);
      }
    }
    return nodes_;
  }

private:
  SweepOrder order_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> nodes_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k)
{
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

SweepOrder parse_sweep_order(const std::string& s)
{
  if (s == "lexicographic") return SweepOrder::lexicographic;
  if (s == "red_black") return SweepOrder::red_black;
  if (s == "seeded_random") return SweepOrder::seeded_random;
  throw DomainError("unknown sweep order '" + s + "'");
}

std::string to_string(SweepOrder order)
{
  switch (order) {
  case SweepOrder::lexicographic: return "lexicographic";
  case SweepOrder::red_black: return "red_black";
  case SweepOrder::seeded_random: return "seeded_random";
  }
  return "?";
}

WedQuadrature parse_wed_quadrature(const std::string& s)
{
  if (s == "left_endpoint") return WedQuadrature::left_endpoint;
  if (s == "midpoint") return WedQuadrature::midpoint;
  throw DomainError("unknown WED quadrature '" + s + "'");
}

std::string to_string(WedQuadrature q) { return q == WedQuadrature::midpoint ? "midpoint" : "left_endpoint"; }

void SolverOptions::validate() const
{
  if (!(tolerance > 0.0)) throw DomainError("solver tolerance must be positive");
  if (max_sweeps < 1) throw DomainError("solver needs at least one sweep");
}

double proximal_objective(const GridMap& v, const GridMap& u, double tau)
{
  return dirichlet_energy(v) + l2_distance2(v, u) / (2.0 * tau);
}

ProximalResult proximal_step(const GridMap& u, double tau, const SolverOptions& opts)
{
  if (!(tau > 0.0)) throw DomainError("time step tau must be positive");
  opts.validate();

  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.h();
  const double cell = g.cell_volume();
  const std::size_t nnb = static_cast<std::size_t>(2 * n);

  // Node update: barycenter of the 2n neighbors (weight h^{n-2} each) and
  // of the previous value u(x) (weight h^n / tau).
  std::vector<double> weights(nnb + 1, cell / (h * h));
  weights[nnb] = cell / tau;
  std::vector<const TargetPoint*> pts(nnb + 1);
  std::vector<std::size_t> nbr(g.size() * nnb);
  for (std::size_t x = 0; x < g.size(); ++x)
    for (int axis = 0; axis < n; ++axis) {
      nbr[x * nnb + 2 * static_cast<std::size_t>(axis)] = g.neighbor(x, axis, -1);
      nbr[x * nnb + 2 * static_cast<std::size_t>(axis) + 1] = g.neighbor(x, axis, +1);
    }

  GridMap v = u;
  SweepSchedule schedule(g, opts);
  const double norm = 1.0 / g.volume();
  double move = 0.0;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    CompensatedSum move2;
    for (std::size_t x : schedule.next()) {
      for (std::size_t k = 0; k < nnb; ++k) pts[k] = &v[nbr[x * nnb + k]];
      pts[nnb] = &u[x];
      TargetPoint next = barycenter(u.space(), std::span<const TargetPoint* const>(pts), weights);
      move2.add(dist2(u.space(), v[x], next));
      v.set_unchecked(x, std::move(next));
    }
    move = std::sqrt(cell * move2.value() * norm);
    if (move <= opts.tolerance) return ProximalResult{std::move(v), sweep, move};
  }
  throw SolverError("proximal step did not converge: sweep move " + std::to_string(move) + " > tolerance " +
                        std::to_string(opts.tolerance),
                    -1, opts.max_sweeps, move);
}

FlowTrace run_flow(const GridMap& u0, double tau, int steps, const SolverOptions& opts)
{
  if (steps < 1) throw DomainError("flow needs at least one step");
  if (!(tau > 0.0)) throw DomainError("time step tau must be positive");
  opts.validate();

  FlowTrace trace;
  trace.tau = tau;
  trace.slices.reserve(static_cast<std::size_t>(steps) + 1);
  trace.slices.push_back(u0);
  trace.diagnostics.push_back(SliceDiagnostics{dirichlet_energy(u0), 0.0, 0, 0.0});
  for (int k = 0; k < steps; ++k) {
    SolverOptions step_opts = opts;
    step_opts.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(k));
    ProximalResult r = [&] {
      try {
        return proximal_step(trace.slices.back(), tau, step_opts);
      } catch (const SolverError& e) {
        throw SolverError(std::string("slice ") + std::to_string(k + 1) + ": " + e.what(), k + 1, e.sweeps,
                          e.residual);
      }
    }();
    SliceDiagnostics d;
    d.energy = dirichlet_energy(r.map);
    d.max_time_density = time_density(trace.slices.back(), r.map, tau).max();
    d.sweeps = r.sweeps;
    d.residual = r.residual;
    trace.slices.push_back(std::move(r.map));
    trace.diagnostics.push_back(d);
  }
  return trace;
}

double wed_weight(double t, double eps) { return std::exp(-t / eps) / eps; }

double wed_functional(const std::vector<GridMap>& slices, double eps, double dt, WedQuadrature quadrature)
{
  if (slices.size() < 2) return 0.0;
  const double theta = quadrature == WedQuadrature::midpoint ? 0.5 : 0.0;
  CompensatedSum total;
  for (std::size_t j = 0; j + 1 < slices.size(); ++j) {
    const double t = static_cast<double>(j) * dt;
    const double kinetic = 0.5 * eps * l2_distance2(slices[j + 1], slices[j]) / (dt * dt);
    total.add(dt * (wed_weight(t + theta * dt, eps) * kinetic + wed_weight(t, eps) * dirichlet_energy(slices[j])));
  }
  return total.value();
}

SpaceTimeMap wed_minimize(const GridMap& u0, double eps, double dt, double T, const WedOptions& opts)
{
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (dt > eps / 4.0 * (1.0 + 1e-12)) throw DomainError("dt too coarse relative to eps (need dt <= eps/4)");
  if (T < 10.0 * eps * (1.0 - 1e-12)) throw DomainError("horizon T must be at least 10 eps");
  opts.solver.validate();

  const auto J = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  const Grid& g = u0.grid();
  const int n = g.dim();
  const double h = g.h();
  const double cell = g.cell_volume();
  const std::size_t nnb = static_cast<std::size_t>(2 * n);

  SpaceTimeMap st;
  st.dt = dt;
  st.horizon = static_cast<double>(J) * dt;
  st.eps = eps;
  st.quadrature = opts.quadrature;
  if (opts.start == WedStart::proximal_flow) {
    SolverOptions warm = opts.solver;
    warm.tolerance = std::max(opts.solver.tolerance, 1e-10);
    st.slices = run_flow(u0, dt, static_cast<int>(J), warm).slices;
  } else {
    st.slices.assign(J + 1, u0);
  }

  // Weights relative to that of the kinetic term on [t_{j-1}, t_j], so they
  // do not underflow on long horizons: the coupling to slice j-1 has weight
  // eps h^n / (2 dt), to slice j+1 the factor q = exp(-dt/eps) more, and to
  // the spatial neighbors q (left endpoint) or sqrt(q) (midpoint) times
  // dt h^{n-2} / 2.
  const double q = std::exp(-dt / eps);
  const double w_prev = eps * cell / (2.0 * dt);
  const double w_next = q * w_prev;
  const double w_space = (opts.quadrature == WedQuadrature::midpoint ? std::sqrt(q) : q) * dt * cell / (2.0 * h * h);

  std::vector<double> inner_weights(nnb + 2, w_space);
  inner_weights[nnb] = w_prev;
  inner_weights[nnb + 1] = w_next;
  std::vector<const TargetPoint*> pts(nnb + 2);
  std::vector<std::size_t> nbr(g.size() * nnb);
  for (std::size_t x = 0; x < g.size(); ++x)
    for (int axis = 0; axis < n; ++axis) {
      nbr[x * nnb + 2 * static_cast<std::size_t>(axis)] = g.neighbor(x, axis, -1);
      nbr[x * nnb + 2 * static_cast<std::size_t>(axis) + 1] = g.neighbor(x, axis, +1);
    }

  // Normalization of the weighted space-time L2 move.
  std::vector<double> slice_weight(J + 1);
  double weight_total = 0.0;
  for (std::size_t j = 1; j <= J; ++j) {
    slice_weight[j] = wed_weight(static_cast<double>(j) * dt, eps) * dt;
    weight_total += slice_weight[j] * g.volume();
  }

  SweepSchedule schedule(g, opts.solver);
  if (opts.record_history) st.functional_history.push_back(wed_functional(st.slices, eps, dt, opts.quadrature));
  double move = 0.0;
  bool converged = false;
  for (int sweep = 1; sweep <= opts.solver.max_sweeps; ++sweep) {
    CompensatedSum move2;
    const auto& order = schedule.next();
    for (std::size_t j = 1; j <= J; ++j) {
      GridMap& cur = st.slices[j];
      const GridMap& prev = st.slices[j - 1];
      CompensatedSum slice_move2;
      for (std::size_t x : order) {
        TargetPoint next;
        if (j == J) {
          // Free terminal slice: only coupled backward in time.
          next = prev[x];
        } else {
          const GridMap& after = st.slices[j + 1];
          for (std::size_t k = 0; k < nnb; ++k) pts[k] = &cur[nbr[x * nnb + k]];
          pts[nnb] = &prev[x];
          pts[nnb + 1] = &after[x];
          next = barycenter(u0.space(), std::span<const TargetPoint* const>(pts), inner_weights);
        }
        slice_move2.add(dist2(u0.space(), cur[x], next));
        cur.set_unchecked(x, std::move(next));
      }
      move2.add(slice_weight[j] * cell * slice_move2.value());
    }
    move = std::sqrt(move2.value() / weight_total);
    if (opts.record_history) st.functional_history.push_back(wed_functional(st.slices, eps, dt, opts.quadrature));
    st.sweeps = sweep;
    if (move <= opts.solver.tolerance) {
      converged = true;
      break;
    }
  }
  st.residual = move;
  if (!converged)
    throw SolverError("WED minimization did not converge: sweep move " + std::to_string(move) + " > tolerance " +
                          std::to_string(opts.solver.tolerance),
                      -1, st.sweeps, move);

  st.functional = wed_functional(st.slices, eps, dt, opts.quadrature);
  st.energies.reserve(J + 1);
  CompensatedSum diss;
  for (std::size_t j = 0; j <= J; ++j) {
    st.energies.push_back(dirichlet_energy(st.slices[j]));
    if (j < J) diss.add(l2_distance2(st.slices[j + 1], st.slices[j]) / dt);
  }
  st.dissipation = diss.value();
  st.initial_energy = st.energies.front();
  return st;
}

} // namespace npcflow
