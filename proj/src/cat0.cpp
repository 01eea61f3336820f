#include "npcflow/cat0.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace npcflow {

namespace {

template <class... Ts> struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void mismatch(const TargetSpace& space, const char* what)
{
  throw KindMismatch(std::string("point does not belong to ") + space.label() + ": " + what);
}

double hyper_x3(double x1, double x2) { return std::sqrt(1.0 + x1 * x1 + x2 * x2); }

std::array<double, 3> reproject(const std::array<double, 3>& v)
{
  return {v[0], v[1], hyper_x3(v[0], v[1])};
}

// Distance on the hyperboloid via d = 2 asinh(|x - y|_M / 2), which stays
// accurate for nearby points where acosh(-<x,y>) loses half the digits.
double hyper_dist(const std::array<double, 3>& a, const std::array<double, 3>& b)
{
  const double d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
  const double chord2 = std::max(0.0, d0 * d0 + d1 * d1 - d2 * d2);
  return 2.0 * std::asinh(0.5 * std::sqrt(chord2));
}

// log_x(p): tangent vector at x pointing to p with Minkowski length d(x,p).
std::array<double, 3> hyper_log(const std::array<double, 3>& x, const std::array<double, 3>& p)
{
  const double c = minkowski(x, p);
  std::array<double, 3> v{p[0] + c * x[0], p[1] + c * x[1], p[2] + c * x[2]};
  const double nv = std::sqrt(std::max(0.0, minkowski(v, v)));
  if (nv == 0.0) return {0.0, 0.0, 0.0};
  const double d = hyper_dist(x, p);
  return {d * v[0] / nv, d * v[1] / nv, d * v[2] / nv};
}

std::array<double, 3> hyper_exp(const std::array<double, 3>& x, const std::array<double, 3>& v)
{
  const double nv = std::sqrt(std::max(0.0, minkowski(v, v)));
  if (nv == 0.0) return x;
  const double c = std::cosh(nv), s = std::sinh(nv) / nv;
  return reproject({c * x[0] + s * v[0], c * x[1] + s * v[1], c * x[2] + s * v[2]});
}

struct Checker {
  const TargetPoint& p;

  bool operator()(const EuclideanSpace& s) const
  {
    return p.is<EuclideanPoint>() && static_cast<int>(p.as<EuclideanPoint>().coords.size()) == s.dim;
  }
  bool operator()(const SpiderSpace& s) const
  {
    if (!p.is<SpiderPoint>()) return false;
    const auto& q = p.as<SpiderPoint>();
    return q.ray >= 0 && q.ray < s.num_rays && q.radius >= 0.0 && std::isfinite(q.radius);
  }
  bool operator()(const Hyperbolic2Space&) const
  {
    if (!p.is<HyperboloidPoint>()) return false;
    const auto& x = p.as<HyperboloidPoint>().x;
    return x[2] > 0.0 && std::abs(minkowski(x, x) + 1.0) <= 1e-12 * std::max(1.0, x[2] * x[2]);
  }
  bool operator()(const ProductSpace& s) const
  {
    if (!p.is<ProductPoint>()) return false;
    const auto& parts = p.as<ProductPoint>().parts;
    if (parts.size() != s.factors.size()) return false;
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (!contains(s.factors[i], parts[i])) return false;
    return true;
  }
};

double spider_dist(const SpiderPoint& a, const SpiderPoint& b)
{
  if (a.ray == b.ray) return std::abs(a.radius - b.radius);
  return a.radius + b.radius;
}

SpiderPoint spider_interp(const SpiderPoint& a, const SpiderPoint& b, double lambda)
{
  if (a.ray == b.ray || a.radius == 0.0 || b.radius == 0.0) {
    const int ray = a.radius == 0.0 ? b.ray : a.ray;
    return SpiderPoint{ray, (1.0 - lambda) * a.radius + lambda * b.radius};
  }
  const double s = lambda * (a.radius + b.radius);
  if (s <= a.radius) return SpiderPoint{a.ray, a.radius - s};
  return SpiderPoint{b.ray, s - a.radius};
}

// Fold rule: for each ray j, fold that ray onto the positive half-line and
// every other ray onto the negative half-line; the weighted mean m_j is
// positive for at most one j, and that ray carries the barycenter.
template <class At>
SpiderPoint spider_barycenter(int num_rays, std::size_t count, At at, std::span<const double> w, double total)
{
  std::vector<double> ray_mass(static_cast<std::size_t>(num_rays), 0.0);
  double all = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& p = at(i).template as<SpiderPoint>();
    const double m = w[i] * p.radius;
    ray_mass[static_cast<std::size_t>(p.ray)] += m;
    all += m;
  }
  for (int j = 0; j < num_rays; ++j) {
    const double mj = (2.0 * ray_mass[static_cast<std::size_t>(j)] - all) / total;
    if (mj > 0.0) return SpiderPoint{j, mj};
  }
  return SpiderPoint{0, 0.0};
}

template <class At>
std::array<double, 3> hyper_barycenter(std::size_t count, At at, std::span<const double> w, double total)
{
  // Start from the normalized ambient mean, then Karcher iteration with
  // backtracking on the objective.
  std::array<double, 3> m{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < count; ++i) {
    const auto& x = at(i).template as<HyperboloidPoint>().x;
    for (int k = 0; k < 3; ++k) m[static_cast<std::size_t>(k)] += w[i] * x[static_cast<std::size_t>(k)];
  }
  const double norm = std::sqrt(std::max(1e-300, -minkowski(m, m)));
  std::array<double, 3> x = reproject({m[0] / norm, m[1] / norm, m[2] / norm});

  auto objective = [&](const std::array<double, 3>& y) {
    double f = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = hyper_dist(y, at(i).template as<HyperboloidPoint>().x);
      f += w[i] * d * d;
    }
    return f;
  };

  double fx = objective(x);
  double step = 1.0;
  double last_small = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 500; ++iter) {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < count; ++i) {
      const auto l = hyper_log(x, at(i).template as<HyperboloidPoint>().x);
      for (int k = 0; k < 3; ++k) g[static_cast<std::size_t>(k)] += w[i] * l[static_cast<std::size_t>(k)] / total;
    }
    const double gn = std::sqrt(std::max(0.0, minkowski(g, g)));
    // the gradient cannot be resolved below a few ulps of the coordinates
    if (gn <= 1e-15 * x[2]) break;
    if (gn < 1e-7) {
      // Objective differences are pure rounding here, so take plain unit
      // Karcher steps while the gradient keeps shrinking.
      if (gn >= last_small) break;
      last_small = gn;
      x = hyper_exp(x, g);
      continue;
    }
    step = std::min(1.0, 2.0 * step);
    bool moved = false;
    while (step * gn > 1e-12) {
      const std::array<double, 3> v{step * g[0], step * g[1], step * g[2]};
      const auto y = hyper_exp(x, v);
      const double fy = objective(y);
      if (fy <= fx - 0.25 * step * total * gn * gn) {
        x = y;
        fx = fy;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

} // namespace

bool ProductPoint::operator==(const ProductPoint& o) const { return parts == o.parts; }
bool ProductSpace::operator==(const ProductSpace& o) const { return factors == o.factors; }

TargetPoint::TargetPoint(SpiderPoint p)
{
  if (p.radius == 0.0) p.ray = 0;
  v_ = p;
}

TargetPoint::TargetPoint(HyperboloidPoint p) : v_(HyperboloidPoint{reproject(p.x)}) {}

TargetPoint TargetPoint::hyperboloid(double x1, double x2)
{
  return HyperboloidPoint{{x1, x2, hyper_x3(x1, x2)}};
}

TargetSpace::TargetSpace(EuclideanSpace s) : v_(s)
{
  if (s.dim < 1) throw DomainError("euclidean dimension must be >= 1");
}

TargetSpace::TargetSpace(SpiderSpace s) : v_(s)
{
  if (s.num_rays < 3) throw DomainError("spider needs at least 3 rays");
}

TargetSpace::TargetSpace(ProductSpace s) : v_(std::move(s))
{
  if (as<ProductSpace>().factors.empty()) throw DomainError("product space needs at least one factor");
}

std::string TargetSpace::kind_name() const
{
  return std::visit(Overloaded{
                        [](const EuclideanSpace&) { return std::string("euclidean"); },
                        [](const SpiderSpace&) { return std::string("spider"); },
                        [](const Hyperbolic2Space&) { return std::string("hyperbolic2"); },
                        [](const ProductSpace&) { return std::string("product"); },
                    },
                    v_);
}

std::string TargetSpace::label() const
{
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const EuclideanSpace& s) { os << "euclidean(" << s.dim << ")"; },
                 [&](const SpiderSpace& s) { os << "spider(" << s.num_rays << ")"; },
                 [&](const Hyperbolic2Space&) { os << "hyperbolic2"; },
                 [&](const ProductSpace& s) {
                   os << "product(";
                   for (std::size_t i = 0; i < s.factors.size(); ++i) os << (i ? "," : "") << s.factors[i].label();
                   os << ")";
                 },
             },
             v_);
  return os.str();
}

double minkowski(const std::array<double, 3>& a, const std::array<double, 3>& b)
{
  return a[0] * b[0] + a[1] * b[1] - a[2] * b[2];
}

bool contains(const TargetSpace& space, const TargetPoint& p) { return std::visit(Checker{p}, space.storage()); }

void check_point(const TargetSpace& space, const TargetPoint& p)
{
  if (!contains(space, p)) mismatch(space, "kind, dimension or range");
}

double dist2(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q)
{
  return std::visit(
      Overloaded{
          [&](const EuclideanSpace& s) {
            if (!p.is<EuclideanPoint>() || !q.is<EuclideanPoint>()) mismatch(space, "expected euclidean points");
            const auto& a = p.as<EuclideanPoint>().coords;
            const auto& b = q.as<EuclideanPoint>().coords;
            if (static_cast<int>(a.size()) != s.dim || static_cast<int>(b.size()) != s.dim)
              mismatch(space, "coordinate count");
            double acc = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
            return acc;
          },
          [&](const SpiderSpace& s) {
            if (!p.is<SpiderPoint>() || !q.is<SpiderPoint>()) mismatch(space, "expected spider points");
            const auto& a = p.as<SpiderPoint>();
            const auto& b = q.as<SpiderPoint>();
            if (a.ray >= s.num_rays || b.ray >= s.num_rays) mismatch(space, "ray index");
            const double d = spider_dist(a, b);
            return d * d;
          },
          [&](const Hyperbolic2Space&) {
            if (!p.is<HyperboloidPoint>() || !q.is<HyperboloidPoint>()) mismatch(space, "expected hyperboloid points");
            const double d = hyper_dist(p.as<HyperboloidPoint>().x, q.as<HyperboloidPoint>().x);
            return d * d;
          },
          [&](const ProductSpace& s) {
            if (!p.is<ProductPoint>() || !q.is<ProductPoint>()) mismatch(space, "expected product points");
            const auto& a = p.as<ProductPoint>().parts;
            const auto& b = q.as<ProductPoint>().parts;
            if (a.size() != s.factors.size() || b.size() != s.factors.size()) mismatch(space, "factor count");
            double acc = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) acc += dist2(s.factors[i], a[i], b[i]);
            return acc;
          },
      },
      space.storage());
}

double dist(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q)
{
  if (space.is<SpiderSpace>()) {
    (void)dist2(space, p, q); // kind checks
    return spider_dist(p.as<SpiderPoint>(), q.as<SpiderPoint>());
  }
  if (space.is<Hyperbolic2Space>()) {
    (void)dist2(space, p, q);
    return hyper_dist(p.as<HyperboloidPoint>().x, q.as<HyperboloidPoint>().x);
  }
  return std::sqrt(dist2(space, p, q));
}

TargetPoint interp(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q, double lambda)
{
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("interpolation parameter outside [0,1]");
  (void)dist2(space, p, q);
  if (lambda == 0.0) return p;
  if (lambda == 1.0) return q;
  return std::visit(
      Overloaded{
          [&](const EuclideanSpace&) -> TargetPoint {
            const auto& a = p.as<EuclideanPoint>().coords;
            const auto& b = q.as<EuclideanPoint>().coords;
            std::vector<double> c(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) c[i] = (1.0 - lambda) * a[i] + lambda * b[i];
            return EuclideanPoint{std::move(c)};
          },
          [&](const SpiderSpace&) -> TargetPoint {
            return spider_interp(p.as<SpiderPoint>(), q.as<SpiderPoint>(), lambda);
          },
          [&](const Hyperbolic2Space&) -> TargetPoint {
            const auto& a = p.as<HyperboloidPoint>().x;
            const auto& b = q.as<HyperboloidPoint>().x;
            const double d = hyper_dist(a, b);
            if (d == 0.0) return p;
            // Move along exp_a(lambda * log_a(b)); exact on the sheet up to reprojection.
            auto v = hyper_log(a, b);
            for (auto& c : v) c *= lambda;
            return HyperboloidPoint{hyper_exp(a, v)};
          },
          [&](const ProductSpace& s) -> TargetPoint {
            const auto& a = p.as<ProductPoint>().parts;
            const auto& b = q.as<ProductPoint>().parts;
            std::vector<TargetPoint> c;
            c.reserve(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) c.push_back(interp(s.factors[i], a[i], b[i], lambda));
            return ProductPoint{std::move(c)};
          },
      },
      space.storage());
}

namespace {

template <class At>
TargetPoint barycenter_impl(const TargetSpace& space, std::size_t count, At at, std::span<const double> weights)
{
  if (count == 0 || count != weights.size())
    throw DomainError("barycenter needs equally many points and weights (at least one)");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("barycenter weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("barycenter weights are all zero");
  for (std::size_t i = 0; i < count; ++i) check_point(space, at(i));

  return std::visit(
      Overloaded{
          [&](const EuclideanSpace& s) -> TargetPoint {
            std::vector<double> c(static_cast<std::size_t>(s.dim), 0.0);
            for (std::size_t i = 0; i < count; ++i) {
              const auto& a = at(i).template as<EuclideanPoint>().coords;
              for (std::size_t k = 0; k < c.size(); ++k) c[k] += weights[i] * a[k];
            }
            for (auto& v : c) v /= total;
            return EuclideanPoint{std::move(c)};
          },
          [&](const SpiderSpace& s) -> TargetPoint { return spider_barycenter(s.num_rays, count, at, weights, total); },
          [&](const Hyperbolic2Space&) -> TargetPoint {
            return HyperboloidPoint{hyper_barycenter(count, at, weights, total)};
          },
          [&](const ProductSpace& s) -> TargetPoint {
            std::vector<TargetPoint> parts;
            parts.reserve(s.factors.size());
            std::vector<const TargetPoint*> column(count);
            for (std::size_t f = 0; f < s.factors.size(); ++f) {
              for (std::size_t i = 0; i < count; ++i) column[i] = &at(i).template as<ProductPoint>().parts[f];
              parts.push_back(barycenter(s.factors[f], std::span<const TargetPoint* const>(column), weights));
            }
            return ProductPoint{std::move(parts)};
          },
      },
      space.storage());
}

} // namespace

TargetPoint barycenter(const TargetSpace& space, std::span<const TargetPoint> points, std::span<const double> weights)
{
  return barycenter_impl(space, points.size(), [&](std::size_t i) -> const TargetPoint& { return points[i]; },
                         weights);
}

TargetPoint barycenter(const TargetSpace& space, std::span<const TargetPoint* const> points,
                       std::span<const double> weights)
{
  return barycenter_impl(space, points.size(), [&](std::size_t i) -> const TargetPoint& { return *points[i]; },
                         weights);
}

double barycenter_objective(const TargetSpace& space, std::span<const TargetPoint> points,
                            std::span<const double> weights, const TargetPoint& x)
{
  double f = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) f += weights[i] * dist2(space, x, points[i]);
  return f;
}

double barycenter_certificate(const TargetSpace& space, std::span<const TargetPoint> points,
                              std::span<const double> weights, const TargetPoint& x, double step)
{
  const double f0 = barycenter_objective(space, points, weights, x);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double d = dist(space, x, p);
    if (d <= step) continue;
    const auto y = interp(space, x, p, step / d);
    worst = std::max(worst, f0 - barycenter_objective(space, points, weights, y));
  }
  return worst;
}

double npc_quadruple_residual(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                              const TargetPoint& r, double lambda)
{
  const auto q_lambda = interp(space, q, r, lambda);
  return (1.0 - lambda) * dist2(space, p, q) + lambda * dist2(space, p, r) -
         lambda * (1.0 - lambda) * dist2(space, q, r) - dist2(space, p, q_lambda);
}

double quadrilateral_residual(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                              const TargetPoint& r, const TargetPoint& s)
{
  const double dpq = dist(space, p, q), drs = dist(space, r, s);
  const double lhs = dist2(space, p, r) + dist2(space, q, s) - dpq * dpq - drs * drs;
  const double rhs = dist2(space, q, r) + dist2(space, p, s) - (drs - dpq) * (drs - dpq);
  return rhs - lhs;
}

double interpolation_inequality_residual(const TargetSpace& space, const TargetPoint& p, const TargetPoint& q,
                                         const TargetPoint& s, double lambda)
{
  const auto p_lambda = interp(space, p, s, lambda);
  const double dpq2 = dist2(space, p, q);
  return dpq2 + dist2(space, p, p_lambda) - dist2(space, q, p_lambda) -
         lambda * (dpq2 + dist2(space, p, s) - dist2(space, q, s));
}

} // namespace npcflow
