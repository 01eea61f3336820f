#include "npcflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace npcflow {

Grid::Grid(int n, int N, double L) : n_(n), N_(N), L_(L)
{
  if (n != 1 && n != 2) throw DomainError("grid dimension must be 1 or 2");
  if (N < 4) throw DomainError("grid needs at least 4 nodes per axis");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("grid side length must be positive");
  size_ = n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * static_cast<std::size_t>(N);
}

double Grid::cell_volume() const { return n_ == 1 ? h() : h() * h(); }
double Grid::volume() const { return n_ == 1 ? L_ : L_ * L_; }

std::array<int, 2> Grid::coords(std::size_t node) const
{
  if (n_ == 1) return {static_cast<int>(node), 0};
  return {static_cast<int>(node / static_cast<std::size_t>(N_)), static_cast<int>(node % static_cast<std::size_t>(N_))};
}

std::size_t Grid::index(std::array<int, 2> c) const
{
  const auto wrap = [this](int i) { return ((i % N_) + N_) % N_; };
  if (n_ == 1) return static_cast<std::size_t>(wrap(c[0]));
  return static_cast<std::size_t>(wrap(c[0])) * static_cast<std::size_t>(N_) + static_cast<std::size_t>(wrap(c[1]));
}

std::size_t Grid::neighbor(std::size_t node, int axis, int step) const
{
  auto c = coords(node);
  c[static_cast<std::size_t>(axis)] += step;
  return index(c);
}

std::array<double, 2> Grid::position(std::size_t node) const
{
  const auto c = coords(node);
  return {c[0] * h(), n_ == 2 ? c[1] * h() : 0.0};
}

double Grid::torus_dist2(std::size_t a, std::size_t b) const
{
  const auto ca = coords(a), cb = coords(b);
  double acc = 0.0;
  for (int k = 0; k < n_; ++k) {
    int d = std::abs(ca[static_cast<std::size_t>(k)] - cb[static_cast<std::size_t>(k)]);
    d = std::min(d, N_ - d);
    acc += (d * h()) * (d * h());
  }
  return acc;
}

GridMap::GridMap(Grid grid, TargetSpace space, std::vector<TargetPoint> values)
    : grid_(grid), space_(std::move(space)), values_(std::move(values))
{
  if (values_.size() != grid_.size())
    throw DomainError("grid map has " + std::to_string(values_.size()) + " values for " +
                      std::to_string(grid_.size()) + " nodes");
  for (const auto& p : values_) check_point(space_, p);
}

GridMap::GridMap(Grid grid, TargetSpace space, const TargetPoint& value)
    : GridMap(grid, std::move(space), std::vector<TargetPoint>(grid.size(), value))
{
}

void GridMap::set(std::size_t i, TargetPoint p)
{
  check_point(space_, p);
  values_.at(i) = std::move(p);
}

double DensityField::max() const
{
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

double DensityField::integral() const
{
  CompensatedSum s;
  for (double v : values) s.add(v);
  return grid.cell_volume() * s.value();
}

void check_compatible(const GridMap& u, const GridMap& v)
{
  if (!(u.grid() == v.grid())) throw DomainError("grid maps live on different grids");
  if (!(u.space() == v.space())) throw KindMismatch("grid maps have different target spaces");
}

double dirichlet_energy(const GridMap& u)
{
  const Grid& g = u.grid();
  CompensatedSum s;
  for (std::size_t x = 0; x < g.size(); ++x)
    for (int axis = 0; axis < g.dim(); ++axis) s.add(dist2(u.space(), u[x], u[g.neighbor(x, axis, +1)]));
  const double h = g.h();
  return 0.5 * g.cell_volume() * s.value() / (h * h);
}

DensityField energy_density(const GridMap& u)
{
  const Grid& g = u.grid();
  const double h2 = g.h() * g.h();
  // Forward-edge squared distances, shared by the two nodes of each edge.
  std::vector<double> edge(g.size() * static_cast<std::size_t>(g.dim()));
  for (std::size_t x = 0; x < g.size(); ++x)
    for (int axis = 0; axis < g.dim(); ++axis)
      edge[x * static_cast<std::size_t>(g.dim()) + static_cast<std::size_t>(axis)] =
          dist2(u.space(), u[x], u[g.neighbor(x, axis, +1)]);
  DensityField out{g, std::vector<double>(g.size(), 0.0)};
  for (std::size_t x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    for (int axis = 0; axis < g.dim(); ++axis) {
      const std::size_t back = g.neighbor(x, axis, -1);
      acc += edge[x * static_cast<std::size_t>(g.dim()) + static_cast<std::size_t>(axis)] +
             edge[back * static_cast<std::size_t>(g.dim()) + static_cast<std::size_t>(axis)];
    }
    out.values[x] = acc / (2.0 * h2);
  }
  return out;
}

double l2_distance2(const GridMap& u, const GridMap& v)
{
  check_compatible(u, v);
  CompensatedSum s;
  for (std::size_t x = 0; x < u.size(); ++x) s.add(dist2(u.space(), u[x], v[x]));
  return u.grid().cell_volume() * s.value();
}

double l2_distance(const GridMap& u, const GridMap& v) { return std::sqrt(l2_distance2(u, v)); }

DensityField pointwise_dist2(const GridMap& u, const GridMap& v)
{
  check_compatible(u, v);
  DensityField out{u.grid(), std::vector<double>(u.size())};
  for (std::size_t x = 0; x < u.size(); ++x) out.values[x] = dist2(u.space(), u[x], v[x]);
  return out;
}

DensityField time_density(const GridMap& u_prev, const GridMap& u_next, double dt)
{
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  auto out = pointwise_dist2(u_prev, u_next);
  for (auto& v : out.values) v /= dt * dt;
  return out;
}

} // namespace npcflow
