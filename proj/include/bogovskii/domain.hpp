#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"
#include "numerics.hpp"
#include "vec.hpp"

namespace bogovskii {

template <int N>
struct Ball {
  Vec<N> center;
  double radius = 0.0;
};

template <int N>
struct Ellipsoid {
  Vec<N> center;
  Vec<N> semi_axes;
};

template <int N>
struct Box {
  Vec<N> lo;
  Vec<N> hi;
};

/// Simple polygon given counter-clockwise or clockwise; 2D only.
struct StarPolygon {
  std::vector<Vec<2>> vertices;
};

template <int N>
using Shape = std::variant<Ball<N>, Ellipsoid<N>, Box<N>, StarPolygon>;

namespace detail {

/// Quasi-uniform points on the unit sphere S^{N-1}.
template <int N>
std::vector<Vec<N>> sphere_points(int k) {
  std::vector<Vec<N>> pts;
  k = std::max(k, 1);
  pts.reserve(k);
  if constexpr (N == 2) {
    for (int i = 0; i < k; ++i) {
      double a = 2.0 * kPi * i / k;
      pts.push_back(Vec<2>{{std::cos(a), std::sin(a)}});
    }
  } else {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < k; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / k;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = golden * i;
      pts.push_back(Vec<3>{{r * std::cos(a), r * std::sin(a), z}});
    }
  }
  return pts;
}

inline double segment_distance(const Vec<2>& p, const Vec<2>& a, const Vec<2>& b) {
  Vec<2> ab = b - a;
  double len2 = norm2(ab);
  double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * ab));
}

inline bool polygon_inside(const StarPolygon& poly, const Vec<2>& p) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i][1] > p[1]) != (v[j][1] > p[1])) {
      double x = v[j][0] + (p[1] - v[j][1]) * (v[i][0] - v[j][0]) / (v[i][1] - v[j][1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_boundary_distance(const StarPolygon& poly, const Vec<2>& p) {
  double d = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    d = std::min(d, segment_distance(p, v[j], v[i]));
  }
  return d;
}

}  // namespace detail

/// Signed depth: positive inside, zero on the boundary, negative outside.
/// Exact distance to the boundary for balls, boxes (inside) and polygons;
/// a scaled level-set value for ellipsoids.
template <int N>
double shape_depth(const Shape<N>& shape, const Vec<N>& x) {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ball<N>>) {
          return s.radius - norm(x - s.center);
        } else if constexpr (std::is_same_v<S, Ellipsoid<N>>) {
          double q = 0.0;
          double amin = s.semi_axes[0];
          for (int i = 0; i < N; ++i) {
            double t = (x[i] - s.center[i]) / s.semi_axes[i];
            q += t * t;
            amin = std::min(amin, s.semi_axes[i]);
          }
          return (1.0 - std::sqrt(q)) * amin;
        } else if constexpr (std::is_same_v<S, Box<N>>) {
          double inside = std::numeric_limits<double>::infinity();
          double outside2 = 0.0;
          for (int i = 0; i < N; ++i) {
            double a = x[i] - s.lo[i];
            double b = s.hi[i] - x[i];
            inside = std::min({inside, a, b});
            double out = std::max({0.0, -a, -b});
            outside2 += out * out;
          }
          return inside >= 0.0 ? inside : -std::sqrt(outside2);
        } else {
          if constexpr (N == 2) {
            double d = detail::polygon_boundary_distance(s, x);
            return detail::polygon_inside(s, x) ? d : -d;
          } else {
            throw Error(ErrorCode::InvalidDomain, "star_polygon is 2D only");
          }
        }
      },
      shape);
}

template <int N>
bool shape_contains(const Shape<N>& shape, const Vec<N>& x, double slack = 1e-12) {
  return shape_depth(shape, x) >= -slack;
}

template <int N>
Box<N> shape_bounding_box(const Shape<N>& shape) {
  return std::visit(
      [&](const auto& s) -> Box<N> {
        using S = std::decay_t<decltype(s)>;
        Box<N> b;
        if constexpr (std::is_same_v<S, Ball<N>>) {
          for (int i = 0; i < N; ++i) {
            b.lo[i] = s.center[i] - s.radius;
            b.hi[i] = s.center[i] + s.radius;
          }
        } else if constexpr (std::is_same_v<S, Ellipsoid<N>>) {
          for (int i = 0; i < N; ++i) {
            b.lo[i] = s.center[i] - s.semi_axes[i];
            b.hi[i] = s.center[i] + s.semi_axes[i];
          }
        } else if constexpr (std::is_same_v<S, Box<N>>) {
          b = s;
        } else {
          if constexpr (N == 2) {
            for (int i = 0; i < 2; ++i) {
              b.lo[i] = std::numeric_limits<double>::infinity();
              b.hi[i] = -std::numeric_limits<double>::infinity();
            }
            for (const auto& v : s.vertices) {
              for (int i = 0; i < 2; ++i) {
                b.lo[i] = std::min(b.lo[i], v[i]);
                b.hi[i] = std::max(b.hi[i], v[i]);
              }
            }
          } else {
            throw Error(ErrorCode::InvalidDomain, "star_polygon is 2D only");
          }
        }
        return b;
      },
      shape);
}

/// Points that realize the extent of the shape: all vertices for polygons and
/// boxes, otherwise empty (extent is then taken in closed form).
template <int N>
std::vector<Vec<N>> shape_extreme_points(const Shape<N>& shape) {
  std::vector<Vec<N>> pts;
  if (const auto* b = std::get_if<Box<N>>(&shape)) {
    for (int mask = 0; mask < (1 << N); ++mask) {
      Vec<N> p;
      for (int i = 0; i < N; ++i) p[i] = (mask >> i) & 1 ? b->hi[i] : b->lo[i];
      pts.push_back(p);
    }
  }
  if constexpr (N == 2) {
    if (const auto* poly = std::get_if<StarPolygon>(&shape)) pts = poly->vertices;
  }
  return pts;
}

/// Roughly k points spread over the boundary of the shape.
template <int N>
std::vector<Vec<N>> shape_boundary_samples(const Shape<N>& shape, int k) {
  k = std::max(k, 8);
  return std::visit(
      [&](const auto& s) -> std::vector<Vec<N>> {
        using S = std::decay_t<decltype(s)>;
        std::vector<Vec<N>> out;
        if constexpr (std::is_same_v<S, Ball<N>>) {
          for (const auto& u : detail::sphere_points<N>(k)) out.push_back(s.center + s.radius * u);
        } else if constexpr (std::is_same_v<S, Ellipsoid<N>>) {
          for (const auto& u : detail::sphere_points<N>(k)) {
            Vec<N> p = s.center;
            for (int i = 0; i < N; ++i) p[i] += s.semi_axes[i] * u[i];
            out.push_back(p);
          }
        } else if constexpr (std::is_same_v<S, Box<N>>) {
          if constexpr (N == 2) {
            double w = s.hi[0] - s.lo[0];
            double hgt = s.hi[1] - s.lo[1];
            double per = 2.0 * (w + hgt);
            for (int i = 0; i < k; ++i) {
              double a = per * i / k;
              Vec<2> p;
              if (a < w) {
                p = Vec<2>{{s.lo[0] + a, s.lo[1]}};
              } else if (a < w + hgt) {
                p = Vec<2>{{s.hi[0], s.lo[1] + (a - w)}};
              } else if (a < 2 * w + hgt) {
                p = Vec<2>{{s.hi[0] - (a - w - hgt), s.hi[1]}};
              } else {
                p = Vec<2>{{s.lo[0], s.hi[1] - (a - 2 * w - hgt)}};
              }
              out.push_back(p);
            }
          } else {
            int m = std::max(2, static_cast<int>(std::sqrt(k / 6.0)));
            for (int axis = 0; axis < 3; ++axis) {
              int a1 = (axis + 1) % 3;
              int a2 = (axis + 2) % 3;
              for (int side = 0; side < 2; ++side) {
                for (int i = 0; i <= m; ++i) {
                  for (int j = 0; j <= m; ++j) {
                    Vec<3> p;
                    p[axis] = side ? s.hi[axis] : s.lo[axis];
                    p[a1] = s.lo[a1] + (s.hi[a1] - s.lo[a1]) * i / m;
                    p[a2] = s.lo[a2] + (s.hi[a2] - s.lo[a2]) * j / m;
                    out.push_back(p);
                  }
                }
              }
            }
          }
          for (const auto& c : shape_extreme_points<N>(Shape<N>{s})) out.push_back(c);
        } else {
          if constexpr (N == 2) {
            const auto& v = s.vertices;
            double per = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) per += norm(v[(i + 1) % v.size()] - v[i]);
            for (std::size_t i = 0; i < v.size(); ++i) {
              const Vec<2>& a = v[i];
              const Vec<2>& b = v[(i + 1) % v.size()];
              int m = std::max(1, static_cast<int>(std::round(k * norm(b - a) / per)));
              for (int j = 0; j < m; ++j) out.push_back(a + (static_cast<double>(j) / m) * (b - a));
            }
          }
        }
        return out;
      },
      shape);
}

/// Bounded domain star-shaped with respect to an explicit interior ball.
template <int N>
class StarDomain {
 public:
  StarDomain(Shape<N> shape, Ball<N> ball, int boundary_samples = 10000)
      : shape_(std::move(shape)), ball_(ball), samples_(boundary_samples) {
    validate_shape();
    if (!(ball_.radius > 0.0)) throw Error(ErrorCode::InvalidDomain, "ball radius must be positive");
    if (!contains(ball_.center, 0.0))
      throw Error(ErrorCode::InvalidDomain, "ball center lies outside the domain");
    for (const auto& u : detail::sphere_points<N>(std::max(64, boundary_samples / 50))) {
      if (!contains(ball_.center + ball_.radius * u, 1e-12))
        throw Error(ErrorCode::InvalidDomain, "ball is not contained in the domain");
    }
    compute_extent();
  }

  const Shape<N>& shape() const { return shape_; }
  const Ball<N>& ball() const { return ball_; }
  double diameter() const { return diameter_; }
  const Box<N>& bounding_box() const { return bbox_; }
  /// Smallest ball centred at the bounding-box centre that contains the closure.
  const Ball<N>& bounding_ball() const { return bounding_ball_; }
  int sample_count() const { return samples_; }

  bool contains(const Vec<N>& x, double slack = 1e-12) const { return shape_contains<N>(shape_, x, slack); }
  double depth(const Vec<N>& x) const { return shape_depth<N>(shape_, x); }
  std::vector<Vec<N>> boundary_samples(int k) const { return shape_boundary_samples<N>(shape_, k); }

 private:
  void validate_shape() const {
    std::visit(
        [](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Ball<N>>) {
            if (!(s.radius > 0.0)) throw Error(ErrorCode::InvalidDomain, "disk radius must be positive");
          } else if constexpr (std::is_same_v<S, Ellipsoid<N>>) {
            for (int i = 0; i < N; ++i)
              if (!(s.semi_axes[i] > 0.0)) throw Error(ErrorCode::InvalidDomain, "semi-axes must be positive");
          } else if constexpr (std::is_same_v<S, Box<N>>) {
            for (int i = 0; i < N; ++i)
              if (!(s.hi[i] > s.lo[i])) throw Error(ErrorCode::InvalidDomain, "box corners must satisfy lo < hi");
          } else {
            if constexpr (N != 2) throw Error(ErrorCode::InvalidDomain, "star_polygon is 2D only");
            if (s.vertices.size() < 3) throw Error(ErrorCode::InvalidDomain, "polygon needs at least 3 vertices");
          }
        },
        shape_);
  }

  void compute_extent() {
    bbox_ = shape_bounding_box<N>(shape_);
    Vec<N> c = 0.5 * (bbox_.lo + bbox_.hi);
    double reach = 0.0;
    if (const auto* b = std::get_if<Ball<N>>(&shape_)) {
      diameter_ = 2.0 * b->radius;
      reach = norm(b->center - c) + b->radius;
    } else if (const auto* e = std::get_if<Ellipsoid<N>>(&shape_)) {
      double amax = 0.0;
      for (int i = 0; i < N; ++i) amax = std::max(amax, e->semi_axes[i]);
      diameter_ = 2.0 * amax;
      reach = amax;
    } else {
      auto pts = shape_extreme_points<N>(shape_);
      diameter_ = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        reach = std::max(reach, norm(pts[i] - c));
        for (std::size_t j = i + 1; j < pts.size(); ++j) diameter_ = std::max(diameter_, norm(pts[i] - pts[j]));
      }
    }
    bounding_ball_ = Ball<N>{c, reach * (1.0 + 1e-12)};
  }

  Shape<N> shape_;
  Ball<N> ball_;
  int samples_;
  double diameter_ = 0.0;
  Box<N> bbox_;
  Ball<N> bounding_ball_;
};

/// Result of a sampled star-shapedness check.
/// `count` points drawn uniformly from a domain by rejection from its bounding box.
template <int N, class Domain>
std::vector<Vec<N>> random_points(const Domain& dom, std::size_t count, std::uint64_t seed = 42) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto box = dom.bounding_box();
  std::vector<Vec<N>> out;
  while (out.size() < count) {
    Vec<N> p;
    for (int d = 0; d < N; ++d) p[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * unit(rng);
    if (dom.contains(p)) out.push_back(p);
  }
  return out;
}

template <int N>
struct StarReport {
  struct Violation {
    Vec<N> ball_point;
    Vec<N> boundary_point;
    double t;  // segment parameter of the first point found outside
  };
  std::vector<Violation> violations;  // capped at max_recorded
  long long violation_count = 0;
  long long segments_checked = 0;
  bool star_shaped() const { return violation_count == 0; }
};

/// Sampled check that every segment from a point of the ball to a boundary
/// point stays in the closed domain.
template <int N>
StarReport<N> star_check(const StarDomain<N>& dom, int samples, int max_recorded = 64) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "star_check needs samples >= 1");
  StarReport<N> report;
  std::vector<Vec<N>> ball_pts{dom.ball().center};
  const double r = dom.ball().radius * (1.0 - 1e-9);
  for (const auto& u : detail::sphere_points<N>(N == 2 ? 12 : 26)) {
    ball_pts.push_back(dom.ball().center + r * u);
    ball_pts.push_back(dom.ball().center + 0.5 * r * u);
  }
  constexpr int kSteps = 64;
  for (const auto& q : dom.boundary_samples(samples)) {
    for (const auto& b : ball_pts) {
      ++report.segments_checked;
      for (int s = 1; s < kSteps; ++s) {
        double t = static_cast<double>(s) / kSteps;
        Vec<N> p = b + t * (q - b);
        if (!dom.contains(p, 1e-12)) {
          ++report.violation_count;
          if (static_cast<int>(report.violations.size()) < max_recorded) report.violations.push_back({b, q, t});
          break;
        }
      }
    }
  }
  return report;
}

/// Normalized exponential bump  c * exp(-1 / (1 - |x - center|^2 / radius^2)).
template <int N>
class Mollifier {
 public:
  Mollifier() = default;
  Mollifier(Vec<N> center, double radius, double normalization)
      : center_(center), radius_(radius), inv_r2_(1.0 / (radius * radius)), c_(normalization) {}

  const Vec<N>& center() const { return center_; }
  double radius() const { return radius_; }
  double normalization() const { return c_; }
  Ball<N> support() const { return {center_, radius_}; }

  /// Value as a function of t = |x - center|^2 / radius^2.
  double profile(double t) const { return t < 1.0 ? c_ * std::exp(-1.0 / (1.0 - t)) : 0.0; }

  double operator()(const Vec<N>& x) const { return profile(norm2(x - center_) * inv_r2_); }

  Vec<N> gradient(const Vec<N>& x) const {
    Vec<N> d = x - center_;
    double t = norm2(d) * inv_r2_;
    if (t >= 1.0) return Vec<N>{};
    double w = profile(t);
    double s = 1.0 - t;
    return d * (-2.0 * w * inv_r2_ / (s * s));
  }

 private:
  Vec<N> center_{};
  double radius_ = 1.0;
  double inv_r2_ = 1.0;
  double c_ = 1.0;
};

/// Integral of exp(-1/(1-|z|^2)) over the unit ball of R^N.
template <int N>
double unit_bump_integral(int max_depth = 15) {
  auto radial = [](double r) {
    double s = 1.0 - r * r;
    return s > 0.0 ? std::exp(-1.0 / s) * std::pow(r, N - 1) : 0.0;
  };
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, 1.0, max_depth, 1e-15, &err);
  double sphere = N == 2 ? 2.0 * kPi : 4.0 * kPi;
  return sphere * v;
}

template <int N>
Mollifier<N> make_bump(const Vec<N>& center, double radius, int quad_res = 15) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidDomain, "bump radius must be positive");
  double integral = std::pow(radius, N) * unit_bump_integral<N>(quad_res);
  return Mollifier<N>(center, radius, 1.0 / integral);
}

/// Smooth cutoff: exactly 1 on the plateau ball, exactly 0 outside the outer ball.
template <int N>
class Cutoff {
 public:
  Cutoff(Vec<N> center, double plateau_radius, double outer_radius)
      : center_(center), inner_(plateau_radius), outer_(outer_radius) {
    if (!(outer_ > inner_ && inner_ > 0.0))
      throw Error(ErrorCode::InvalidDomain, "cutoff needs 0 < plateau radius < outer radius");
  }

  /// Plateau on the bounding ball of the closed domain, support on that ball inflated by `inflate`.
  static Cutoff for_domain(const StarDomain<N>& dom, double inflate = 0.2) {
    const auto& b = dom.bounding_ball();
    return Cutoff(b.center, b.radius, b.radius * (1.0 + inflate));
  }

  const Vec<N>& center() const { return center_; }
  double plateau_radius() const { return inner_; }
  double outer_radius() const { return outer_; }
  /// Diameter of the enlarged ball; every kernel vanishes beyond this distance.
  double diameter() const { return 2.0 * outer_; }

  double operator()(const Vec<N>& x) const {
    return smooth_step_down((norm(x - center_) - inner_) / (outer_ - inner_));
  }

  Vec<N> gradient(const Vec<N>& x) const {
    Vec<N> d = x - center_;
    double r = norm(d);
    double t = (r - inner_) / (outer_ - inner_);
    if (t <= 0.0 || t >= 1.0 || r == 0.0) return Vec<N>{};
    double a = std::exp(-1.0 / (1.0 - t));
    double b = std::exp(-1.0 / t);
    double ds = -a * b * (1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t)) / ((a + b) * (a + b));
    return d * (ds / ((outer_ - inner_) * r));
  }

 private:
  Vec<N> center_;
  double inner_;
  double outer_;
};

}  // namespace bogovskii
