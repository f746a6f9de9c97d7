#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "error.hpp"

namespace bogovskii {

inline constexpr double kPi = 3.14159265358979323846;

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule build_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // boost returns the non-negative zeros in increasing order
  auto zeros = boost::math::legendre_p_zeros<double>(n);
  auto weight = [n](double x) {
    double dp = boost::math::legendre_p_prime<double>(n, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  int k = 0;
  for (int z = static_cast<int>(zeros.size()) - 1; z >= 0; --z) {
    if (zeros[z] == 0.0) continue;
    rule.nodes[k] = -zeros[z];
    rule.weights[k] = weight(zeros[z]);
    ++k;
  }
  if (n % 2 == 1) {
    rule.nodes[k] = 0.0;
    rule.weights[k] = weight(0.0);
    ++k;
  }
  for (int z = 0; z < static_cast<int>(zeros.size()); ++z) {
    if (zeros[z] == 0.0) continue;
    rule.nodes[k] = zeros[z];
    rule.weights[k] = weight(zeros[z]);
    ++k;
  }
  return rule;
}

}  // namespace detail

inline constexpr int kMaxGaussPoints = 128;

/// Cached rule with n points, 1 <= n <= kMaxGaussPoints.
inline const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxGaussPoints) {
    throw Error(ErrorCode::InvalidArgument, "Gauss-Legendre order out of range");
  }
  static std::array<GaussRule, kMaxGaussPoints + 1> cache;
  static std::array<std::once_flag, kMaxGaussPoints + 1> flags;
  std::call_once(flags[n], [n] { cache[n] = detail::build_gauss_rule(n); });
  return cache[n];
}

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
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

/// C-infinity step: 1 for t <= 0, 0 for t >= 1, flat to all orders at both ends.
inline double smooth_step_down(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  double a = std::exp(-1.0 / (1.0 - t));
  double b = std::exp(-1.0 / t);
  return a / (a + b);
}

/// Polynomial extrapolation of samples (x_k, y_k) to x = 0 (Neville).
/// Returns the extrapolated value and the difference between the two
/// highest-order estimates as an error indicator.
struct Extrapolation {
  double value = 0.0;
  double defect = 0.0;
};

inline Extrapolation richardson_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m == 0 || y.size() != m) throw Error(ErrorCode::InvalidArgument, "richardson: size mismatch");
  if (m == 1) return {y[0], 0.0};
  // p[i] holds the interpolant through points i..i+level evaluated at 0
  std::vector<double> p(y);
  double previous = y[m - 1];
  for (std::size_t level = 1; level < m; ++level) {
    for (std::size_t i = 0; i + level < m; ++i) {
      double xi = x[i];
      double xj = x[i + level];
      p[i] = (xi * p[i + 1] - xj * p[i]) / (xi - xj);
    }
    if (level == m - 1) break;
    previous = p[1];
  }
  // previous: extrapolant through the m-1 finest samples
  return {p[0], std::abs(p[0] - previous)};
}

}  // namespace bogovskii
