#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "numerics.hpp"
#include "vec.hpp"

namespace bogovskii {

/// Parameters of the split grid/polar rule for kernels singular at the target point.
///
/// The integrand is split with a smooth radial window φ(|y-x|/W): the part (1-φ)kf
/// vanishes to all orders at x and is summed on the grid; the part φkf is integrated
/// in polar coordinates about x against the cubic interpolant of the density.
/// How the ε → 0 limit of a principal value is taken.
///  Extrapolate: Richardson extrapolation of the truncated integrals over the ε levels.
///  PolarLimit:  the near part is integrated over r in (0, W] with the angular integral
///               taken first, which is the symmetric-exclusion limit itself; the
///               extrapolated value is kept only as an independent error estimate.
enum class PvMethod { Extrapolate, PolarLimit };

struct SingularQuadrature {
  PvMethod method = PvMethod::Extrapolate;
  double window_cells = 8.0;                     // W in units of h
  int radial_points = 24;                        // Gauss points in r (log r for truncated parts)
  int angular_points = 64;                       // directions on the sphere
  std::vector<double> eps_cells = {4.0, 3.0, 2.0};  // principal-value exclusion radii in units of h
  bool estimate_defect = true;  // PolarLimit only: also compute the truncations and their extrapolant

  void validate(double h) const {
    if (!(window_cells > 0.0)) throw Error(ErrorCode::InvalidArgument, "window must be positive");
    if (radial_points < 2 || radial_points > kMaxGaussPoints)
      throw Error(ErrorCode::InvalidArgument, "radial_points must lie in [2, 128]");
    if (angular_points < 4) throw Error(ErrorCode::InvalidArgument, "angular_points must be >= 4");
    validate_eps_levels(eps_levels(h), h);
    if (eps_cells.front() >= window_cells)
      throw Error(ErrorCode::InvalidArgument, "exclusion radii must be smaller than the window");
  }

  std::vector<double> eps_levels(double h) const {
    std::vector<double> out;
    for (double c : eps_cells) out.push_back(c * h);
    return out;
  }

  static void validate_eps_levels(const std::vector<double>& eps, double h) {
    if (eps.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two exclusion radii");
    for (std::size_t k = 1; k < eps.size(); ++k)
      if (!(eps[k] < eps[k - 1])) throw Error(ErrorCode::InvalidArgument, "exclusion radii must strictly decrease");
    if (eps.back() < 2.0 * h * (1.0 - 1e-12))
      throw Error(ErrorCode::InvalidArgument, "smallest exclusion radius must be >= 2h");
  }
};

/// Directions σ for which the kernel can be nonzero: a cone about `axis`, or everything.
template <int N>
struct ConeHint {
  bool active = false;
  Vec<N> axis{};
  double half_angle = 0.0;
  double homogeneous_radius = 0.0;  // the kernel is homogeneous in |y - x| below this radius

  static ConeHint everywhere() { return {}; }

  /// Directions from `apex` whose ray meets the ball (flip = true for the opposite cone).
  static ConeHint toward(const Vec<N>& apex, const Ball<N>& ball, bool flip = false) {
    Vec<N> d = ball.center - apex;
    double dist = norm(d);
    if (dist <= ball.radius * (1.0 + 1e-12)) return {};
    ConeHint c;
    c.active = true;
    c.axis = (flip ? -1.0 : 1.0) * (d / dist);
    c.half_angle = std::asin(std::min(1.0, ball.radius / dist));
    c.homogeneous_radius = dist - ball.radius;
    return c;
  }
};

template <int N, class R>
R integrate_directions(const ConeHint<N>& cone, int points, const std::function<R(const Vec<N>&)>& f) {
  if (cone.active) return sphere_integral<N, R>(f, &cone.axis, cone.half_angle, points);
  return sphere_integral<N, R>(f, nullptr, 0.0, points);
}

namespace detail {

template <int N, class R, class Kernel>
R far_sum(const Kernel& kernel, const WeightedSupport<N, double>& support, const Vec<N>& x, double window) {
  R acc = ValueTraits<R>::zero();
  const double inv_w = 1.0 / window;
  for (std::size_t s = 0; s < support.points.size(); ++s) {
    const Vec<N>& y = support.points[s];
    double r = norm(y - x);
    double keep = 1.0 - smooth_step_down(r * inv_w);
    if (keep == 0.0) continue;
    acc += (keep * support.weighted[s]) * kernel(y);
  }
  return acc;
}

/// ∫_{lo <= |y-x| <= hi} φ(|y-x|/W) k(y) f(y) dy in polar coordinates about x.
/// log_radial selects Gauss nodes in log r (for kernels of order |y-x|^{-n}).
template <int N, class R, class Kernel>
R polar_part(const Kernel& kernel, const ScalarField<N>& density, const Vec<N>& x, double lo, double hi,
             double window, int radial_points, bool log_radial, const ConeHint<N>& cone, int angular_points) {
  R acc = ValueTraits<R>::zero();
  if (!(hi > lo)) return acc;
  const GaussRule& rule = gauss_legendre(radial_points);
  const double a = log_radial ? std::log(lo) : lo;
  const double b = log_radial ? std::log(hi) : hi;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    double u = mid + half * rule.nodes[k];
    double r = log_radial ? std::exp(u) : u;
    double jac = half * rule.weights[k] * (log_radial ? r : 1.0) * std::pow(r, N - 1);
    double phi = smooth_step_down(r / window);
    if (phi == 0.0) continue;
    std::function<R(const Vec<N>&)> on_sphere = [&](const Vec<N>& s) {
      Vec<N> y = x + r * s;
      double f = density.interpolate(y);
      if (f == 0.0) return ValueTraits<R>::zero();
      return f * kernel(y);
    };
    acc += (jac * phi) * integrate_directions<N, R>(cone, angular_points, on_sphere);
  }
  return acc;
}

/// Uniform panels of width at most `panel` covering [lo, hi].
template <int N, class R, class Kernel>
R polar_panels(const Kernel& kernel, const ScalarField<N>& density, const Vec<N>& x, double lo, double hi,
               double panel, double window, int radial_points, const ConeHint<N>& cone, int angular_points) {
  R acc = ValueTraits<R>::zero();
  if (!(hi > lo)) return acc;
  const int count = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel - 1e-9)));
  const double step = (hi - lo) / count;
  for (int k = 0; k < count; ++k)
    acc += polar_part<N, R>(kernel, density, x, lo + k * step, lo + (k + 1) * step, window, radial_points, false,
                            cone, angular_points);
  return acc;
}

/// Radius of the polar region: the grid window, widened to the homogeneous radius of a cone
/// kernel, whose angular profile a grid sum cannot resolve close to the apex.
template <int N>
double polar_window(double base, const ConeHint<N>& cone) {
  return cone.active ? std::max(base, cone.homogeneous_radius) : base;
}

/// Near part over (0, W]: radial panels graded geometrically toward r = 0 inside the base
/// window, uniform panels beyond it.
template <int N, class R, class Kernel>
R polar_limit(const Kernel& kernel, const ScalarField<N>& density, const Vec<N>& x, double base, double window,
              int radial_points, const ConeHint<N>& cone, int angular_points) {
  const int per_panel = std::max(4, radial_points / 2);
  R acc = polar_panels<N, R>(kernel, density, x, base, window, base, window, per_panel, cone, angular_points);
  double hi = base;
  for (int k = 0; k < 4; ++k) {
    double lo = k == 3 ? 0.0 : hi / 4.0;
    acc += polar_part<N, R>(kernel, density, x, lo, hi, window, per_panel, false, cone, angular_points);
    hi = lo;
  }
  return acc;
}

/// True when the polar window around x cannot see any nonzero density value
/// (the cubic interpolant reaches two cells beyond the support nodes).
template <int N>
bool window_misses_support(const WeightedSupport<N, double>& support, const Vec<N>& x, double window, double h) {
  if (support.nodes.empty()) return true;
  return support.distance_to(x) > window + 2.0 * h * std::sqrt(static_cast<double>(N));
}

template <class R>
double max_component(const R& v) {
  double m = 0.0;
  for (int k = 0; k < ValueTraits<R>::components; ++k) m = std::max(m, std::abs(ValueTraits<R>::at(v, k)));
  return m;
}

}  // namespace detail

/// ∫ k(y) f(y) dy for a kernel with an integrable singularity at x.
template <int N, class R, class Kernel>
R regular_integral(const Kernel& kernel, const ScalarField<N>& density, const WeightedSupport<N, double>& support,
                   const Vec<N>& x, const SingularQuadrature& q, const ConeHint<N>& cone) {
  const double base = q.window_cells * density.grid->h();
  const double window = detail::polar_window(base, cone);
  R far = detail::far_sum<N, R>(kernel, support, x, window);
  if (detail::window_misses_support(support, x, window, density.grid->h())) return far;
  R near = detail::polar_limit<N, R>(kernel, density, x, base, window, q.radial_points, cone, q.angular_points);
  return far + near;
}

/// Principal value and its extrapolation diagnostics.
template <class R>
struct PvResult {
  R value{};
  double defect = 0.0;  // Extrapolate: gap between the top two extrapolants;
                        // PolarLimit: gap between the direct limit and the extrapolant
  std::vector<R> truncated;  // integrals over |y - x| > ε for each ε level
};

/// lim_{ε→0} ∫_{|y-x|>ε} k(y) f(y) dy, by Richardson extrapolation in ε over eps_levels.
template <int N, class R, class Kernel>
PvResult<R> pv_integral(const Kernel& kernel, const ScalarField<N>& density,
                        const WeightedSupport<N, double>& support, const Vec<N>& x,
                        const std::vector<double>& eps_levels, const SingularQuadrature& q,
                        const ConeHint<N>& cone) {
  const double h = density.grid->h();
  SingularQuadrature::validate_eps_levels(eps_levels, h);
  const double base = q.window_cells * h;
  const double window = detail::polar_window(base, cone);
  if (!(eps_levels.front() < base))
    throw Error(ErrorCode::InvalidArgument, "exclusion radii must be smaller than the window");

  PvResult<R> out;
  R far = detail::far_sum<N, R>(kernel, support, x, window);
  const bool limit = q.method == PvMethod::PolarLimit;
  if (detail::window_misses_support(support, x, window, h)) {
    out.value = far;
    out.truncated.assign(eps_levels.size(), far);
    return out;
  }
  if (limit && !q.estimate_defect) {
    out.value =
        far + detail::polar_limit<N, R>(kernel, density, x, base, window, q.radial_points, cone, q.angular_points);
    return out;
  }
  R outer = far;
  outer += detail::polar_part<N, R>(kernel, density, x, eps_levels.front(), base, window, q.radial_points, true,
                                    cone, q.angular_points);
  outer += detail::polar_panels<N, R>(kernel, density, x, base, window, base, window,
                                      std::max(4, q.radial_points / 2), cone, q.angular_points);
  out.truncated.push_back(outer);
  const int inner_points = std::max(4, q.radial_points / 2);
  for (std::size_t k = 1; k < eps_levels.size(); ++k) {
    R ring = detail::polar_part<N, R>(kernel, density, x, eps_levels[k], eps_levels.front(), window, inner_points,
                                      true, cone, q.angular_points);
    out.truncated.push_back(outer + ring);
  }

  R direct{};
  if (limit)
    direct = far + detail::polar_limit<N, R>(kernel, density, x, base, window, q.radial_points, cone, q.angular_points);

  double scale = 0.0;
  for (const R& t : out.truncated) scale = std::max(scale, detail::max_component(t));
  const double floor = 1e-10 * (1.0 + scale);
  for (int c = 0; c < ValueTraits<R>::components; ++c) {
    std::vector<double> ys;
    for (const R& t : out.truncated) ys.push_back(ValueTraits<R>::at(t, c));
    Extrapolation ex = richardson_to_zero(eps_levels, ys);
    if (limit) {
      ValueTraits<R>::at(out.value, c) = ValueTraits<R>::at(direct, c);
      out.defect = std::max(out.defect, std::abs(ex.value - ValueTraits<R>::at(direct, c)));
      continue;
    }
    double first = std::abs(ys[1] - ys[0]);
    for (std::size_t k = 2; k < ys.size(); ++k) {
      if (std::abs(ys[k] - ys[k - 1]) > 10.0 * first + floor)
        throw Error(ErrorCode::ExtrapolationDiverged, "truncated integrals do not settle as epsilon decreases");
    }
    ValueTraits<R>::at(out.value, c) = ex.value;
    out.defect = std::max(out.defect, ex.defect);
  }
  return out;
}

/// Convenience overload building the support list of the density.
template <int N, class R, class Kernel>
PvResult<R> pv_integral(const Kernel& kernel, const ScalarField<N>& density, const Vec<N>& x,
                        const std::vector<double>& eps_levels, const SingularQuadrature& q = {},
                        const ConeHint<N>& cone = {}) {
  return pv_integral<N, R>(kernel, density, weighted_support(density), x, eps_levels, q, cone);
}

}  // namespace bogovskii
