#pragma once

// Periodic flat grids (tori) of dimension 1 or 2, maps from them into a
// CAT(0) target, and the discrete energies built from squared distances
// between neighboring nodes.
//
// Node order is row-major: node = i0 for n = 1, node = i0 * N + i1 for
// n = 2, where i1 is the fastest-varying index.  Axis 0 is i0.

#include "npcflow/cat0.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace npcflow {

/// Neumaier-compensated running sum; order-dependent but reproducible.
class CompensatedSum {
public:
  void add(double x)
  {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class Grid {
public:
  Grid(int n, int N, double L);

  int dim() const { return n_; }
  int nodes_per_axis() const { return N_; }
  double length() const { return L_; }
  double h() const { return L_ / N_; }
  /// h^n, the measure of one cell.
  double cell_volume() const;
  double volume() const;
  std::size_t size() const { return size_; }

  /// Periodic neighbor of `node` along `axis`, step +1 or -1.
  std::size_t neighbor(std::size_t node, int axis, int step) const;
  std::array<int, 2> coords(std::size_t node) const;
  std::size_t index(std::array<int, 2> c) const;
  /// Physical position of a node (coordinates in [0, L)).
  std::array<double, 2> position(std::size_t node) const;
  /// Squared distance between two nodes on the torus.
  double torus_dist2(std::size_t a, std::size_t b) const;

  bool operator==(const Grid&) const = default;

private:
  int n_;
  int N_;
  double L_;
  std::size_t size_;
};

class GridMap {
public:
  GridMap(Grid grid, TargetSpace space, std::vector<TargetPoint> values);
  /// Constant map.
  GridMap(Grid grid, TargetSpace space, const TargetPoint& value);

  const Grid& grid() const { return grid_; }
  const TargetSpace& space() const { return space_; }
  const std::vector<TargetPoint>& values() const { return values_; }
  const TargetPoint& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Replaces one node value; the point must belong to the space.
  void set(std::size_t i, TargetPoint p);
  /// Unchecked replacement for solver inner loops.
  void set_unchecked(std::size_t i, TargetPoint p) { values_[i] = std::move(p); }

  bool operator==(const GridMap& o) const = default;

private:
  Grid grid_;
  TargetSpace space_;
  std::vector<TargetPoint> values_;
};

struct DensityField {
  Grid grid;
  std::vector<double> values;

  double max() const;
  /// h^n * sum of values.
  double integral() const;
};

/// Throws DomainError unless both maps share grid and target space.
void check_compatible(const GridMap& u, const GridMap& v);

/// (h^n / 2) sum_x sum_i d^2(u(x), u(x + h e_i)) / h^2.
double dirichlet_energy(const GridMap& u);

/// Symmetrized nodal density sum_i [d^2(u(x),u(x+he_i)) + d^2(u(x),u(x-he_i))] / (2h^2).
DensityField energy_density(const GridMap& u);

double l2_distance2(const GridMap& u, const GridMap& v);
double l2_distance(const GridMap& u, const GridMap& v);

/// d^2(u_prev(x), u_next(x)) / dt^2 per node.
DensityField time_density(const GridMap& u_prev, const GridMap& u_next, double dt);

/// d^2(u(x), v(x)) per node.
DensityField pointwise_dist2(const GridMap& u, const GridMap& v);

} // namespace npcflow
