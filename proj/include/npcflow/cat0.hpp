#pragma once

// CAT(0) target spaces: Euclidean space, k-spiders (metric trees with one
// branch point), the hyperbolic plane in the hyperboloid model, and finite
// products of these.  Every operation is a pure function of its arguments.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace npcflow {

/// Raised when a point does not belong to the space it is used with.
class KindMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for arguments outside an operation's domain (e.g. lambda > 1).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class TargetPoint;

struct EuclideanPoint {
  std::vector<double> coords;
  bool operator==(const EuclideanPoint&) const = default;
};

/// Point on a spider: distance `radius` from the branch point along `ray`.
/// The branch point itself is always stored as (ray 0, radius 0).
struct SpiderPoint {
  int ray = 0;
  double radius = 0.0;
  bool operator==(const SpiderPoint&) const = default;
};

/// Point (x1, x2, x3) on the upper sheet x1^2 + x2^2 - x3^2 = -1.
struct HyperboloidPoint {
  std::array<double, 3> x{0.0, 0.0, 1.0};
  bool operator==(const HyperboloidPoint&) const = default;
};

struct ProductPoint {
  std::vector<TargetPoint> parts;
  bool operator==(const ProductPoint&) const;
};

class TargetPoint {
public:
  using Storage = std::variant<EuclideanPoint, SpiderPoint, HyperboloidPoint, ProductPoint>;

  TargetPoint() : v_(EuclideanPoint{}) {}
  TargetPoint(EuclideanPoint p) : v_(std::move(p)) {}
  TargetPoint(SpiderPoint p);
  TargetPoint(HyperboloidPoint p);
  TargetPoint(ProductPoint p) : v_(std::move(p)) {}

  static TargetPoint euclidean(std::vector<double> coords) { return EuclideanPoint{std::move(coords)}; }
  static TargetPoint spider(int ray, double radius) { return SpiderPoint{ray, radius}; }
  /// Lifts (x1, x2) onto the hyperboloid.
  static TargetPoint hyperboloid(double x1, double x2);
  static TargetPoint product(std::vector<TargetPoint> parts) { return ProductPoint{std::move(parts)}; }

  const Storage& storage() const { return v_; }

  template <class T> const T& as() const { return std::get<T>(v_); }
  template <class T> bool is() const { return std::holds_alternative<T>(v_); }

  bool operator==(const TargetPoint& o) const { return v_ == o.v_; }

private:
  Storage v_;
};

class TargetSpace;

struct EuclideanSpace {
  int dim = 1;
  bool operator==(const EuclideanSpace&) const = default;
};
struct SpiderSpace {
  int num_rays = 3;
  bool operator==(const SpiderSpace&) const = default;
};
struct Hyperbolic2Space {
  bool operator==(const Hyperbolic2Space&) const = default;
};
struct ProductSpace {
  std::vector<TargetSpace> factors;
  bool operator==(const ProductSpace&) const;
};

class TargetSpace {
public:
  using Storage = std::variant<EuclideanSpace, SpiderSpace, Hyperbolic2Space, ProductSpace>;

  TargetSpace() : v_(EuclideanSpace{}) {}
  TargetSpace(EuclideanSpace s);
  TargetSpace(SpiderSpace s);
  TargetSpace(Hyperbolic2Space s) : v_(s) {}
  TargetSpace(ProductSpace s);

  static TargetSpace euclidean(int dim) { return EuclideanSpace{dim}; }
  static TargetSpace spider(int num_rays) { return SpiderSpace{num_rays}; }
  static TargetSpace hyperbolic2() { return Hyperbolic2Space{}; }
  static TargetSpace product(std::vector<TargetSpace> factors) { return ProductSpace{std::move(factors)}; }

  const Storage& storage() const { return v_; }
  template <class T> const T& as() const { return std::get<T>(v_); }
  template <class T> bool is() const { return std::holds_alternative<T>(v_); }

  /// "euclidean", "spider", "hyperbolic2" or "product".
  std::string kind_name() const;
  /// Short human-readable label, e.g. "spider(3)".
  std::string label() const;

  bool operator==(const TargetSpace& o) const { return v_ == o.v_; }

private:
  Storage v_;
};

/// Throws KindMismatch unless `p` is a valid point of `space`.
void check_point(const TargetSpace& space, const TargetPoint& p);
bool contains(const TargetSpace& space, const TargetPoint& p);

double dist(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q);
double dist2(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q);

/// Point a `lambda` fraction of the way along the geodesic from p to q.
TargetPoint interp(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q, double lambda);

/// Minimizer of sum_i w_i d^2(x, p_i).
TargetPoint barycenter(const TargetSpace& space, std::span<const TargetPoint> points,
                       std::span<const double> weights);

/// Same, for points held elsewhere (solver inner loops).
TargetPoint barycenter(const TargetSpace& space, std::span<const TargetPoint* const> points,
                       std::span<const double> weights);

/// Objective sum_i w_i d^2(x, p_i) minimized by `barycenter`.
double barycenter_objective(const TargetSpace& space, std::span<const TargetPoint> points,
                            std::span<const double> weights, const TargetPoint& x);

/// Largest decrease of the barycenter objective obtained by moving `x` a
/// distance `step` toward any of the points.  A first-order certificate:
/// values <= ~0 mean no descent direction among the geodesics to the data.
double barycenter_certificate(const TargetSpace& space, std::span<const TargetPoint> points,
                              std::span<const double> weights, const TargetPoint& x,
                              double step = 1e-6);

// Comparison-inequality residuals.  Each is >= 0 (up to rounding) in any
// CAT(0) space.

/// (1-l)d^2(p,q) + l d^2(p,r) - l(1-l)d^2(q,r) - d^2(p, q_l), q_l = interp(q, r, l).
double npc_quadruple_residual(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                              const TargetPoint& r, double lambda);

/// Reshetnyak quadrilateral comparison:
/// d^2(q,r) + d^2(p,s) - (d(r,s) - d(p,q))^2 - [d^2(p,r) + d^2(q,s) - d^2(p,q) - d^2(r,s)].
double quadrilateral_residual(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                              const TargetPoint& r, const TargetPoint& s);

/// d^2(p,q) + d^2(p,p_l) - d^2(q,p_l) - l(d^2(p,q) + d^2(p,s) - d^2(q,s)), p_l = interp(p, s, l).
double interpolation_inequality_residual(const TargetSpace& space, const TargetPoint& p,
                                         const TargetPoint& q, const TargetPoint& s, double lambda);

/// Minkowski bilinear form x1 y1 + x2 y2 - x3 y3.
double minkowski(const std::array<double, 3>& a, const std::array<double, 3>& b);

} // namespace npcflow
