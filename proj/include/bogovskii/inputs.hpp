#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "domain.hpp"
#include "grid.hpp"
#include "lipschitz.hpp"
#include "numerics.hpp"
#include "vec.hpp"

namespace bogovskii {

/// Difference of two grid-normalized bumps: exactly zero grid mean.
template <int N>
ScalarField<N> dipole(const std::shared_ptr<const Grid<N>>& grid, const Vec<N>& plus, const Vec<N>& minus,
                      double radius) {
  return discrete_unit_bump(grid, make_bump<N>(plus, radius)) - discrete_unit_bump(grid, make_bump<N>(minus, radius));
}

/// Parameters of a dipole input.
template <int N>
struct DipoleSpec {
  Vec<N> plus;
  Vec<N> minus;
  double radius = 0.0;
  std::string label() const {
    std::string s = "dipole(r=" + std::to_string(radius) + ")";
    return s;
  }
};

/// `count` dipoles inside the ball (center, R) with radii spread geometrically over
/// [r_min, r_max] and positions drawn with the given seed; every bump stays at least
/// `clearance` inside the ball.
template <int N>
std::vector<DipoleSpec<N>> dipole_family(const Ball<N>& region, int count, double r_min, double r_max,
                                         std::uint64_t seed = 42, double clearance = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<DipoleSpec<N>> out;
  auto random_in = [&](double reach) {
    for (;;) {
      Vec<N> p;
      for (int d = 0; d < N; ++d) p[d] = (2.0 * unit(rng) - 1.0) * reach;
      if (norm(p) <= reach) return region.center + p;
    }
  };
  for (int k = 0; k < count; ++k) {
    double r = count == 1 ? r_min : r_min * std::pow(r_max / r_min, static_cast<double>(k) / (count - 1));
    double reach = region.radius - r - clearance;
    if (reach <= 0.0) throw Error(ErrorCode::InvalidArgument, "dipole radius too large for the region");
    DipoleSpec<N> s;
    s.radius = r;
    for (;;) {
      s.plus = random_in(reach);
      s.minus = random_in(reach);
      if (norm(s.plus - s.minus) >= 2.0 * r) break;
    }
    out.push_back(s);
  }
  return out;
}

/// Smooth zero-mean atom of radius ρ normalized for h^p: ‖a‖_∞ <= ρ^{-n/p}.
/// Profile z_1 exp(1 - 1/(1 - |z|^2)) with z = (x - center)/ρ; odd, so its grid
/// mean vanishes when the centre is a node.
template <int N>
ScalarField<N> atom(const std::shared_ptr<const Grid<N>>& grid, const Vec<N>& center, double rho, double p) {
  const double height = std::pow(rho, -static_cast<double>(N) / p);
  return ScalarField<N>::sample(grid, [&](const Vec<N>& x) {
    Vec<N> z = (x - center) / rho;
    double t = norm2(z);
    if (t >= 1.0) return 0.0;
    return height * z[0] * std::exp(1.0 - 1.0 / (1.0 - t));
  });
}

/// |x - center|^α times a smooth cutoff of radius r, minus its grid mass times a
/// grid-normalized bump of the same support: compactly supported, zero mean, Hölder-α at the centre.
template <int N>
ScalarField<N> holder_bump(const std::shared_ptr<const Grid<N>>& grid, const Vec<N>& center, double radius,
                           double alpha) {
  auto f = ScalarField<N>::sample(grid, [&](const Vec<N>& x) {
    double r = norm(x - center);
    return std::pow(r, alpha) * smooth_step_down((r / radius - 0.5) / 0.5);
  });
  double mass = integrate(f);
  auto theta = discrete_unit_bump(grid, make_bump<N>(center, radius));
  theta *= mass;
  return f - theta;
}

/// Smooth vector field with closed-form first and second derivatives:
/// a sum of amplitude·sin(k·x + phase) terms and monomials.
template <int N>
struct AnalyticField {
  struct Trig {
    Vec<N> amplitude;
    Vec<N> wave;
    double phase = 0.0;
  };
  struct Monomial {
    int component = 0;
    std::array<int, N> powers{};
    double coeff = 0.0;
  };
  std::string label;
  std::vector<Trig> trig;
  std::vector<Monomial> poly;

  Vec<N> value(const Vec<N>& x) const {
    Vec<N> v;
    for (const auto& t : trig) v += std::sin(dot(t.wave, x) + t.phase) * t.amplitude;
    for (const auto& m : poly) v[m.component] += m.coeff * monomial(m.powers, x, -1, -1);
    return v;
  }

  /// (i, j) = ∂u_i/∂x_j
  Mat<N> jacobian(const Vec<N>& x) const {
    Mat<N> J;
    for (const auto& t : trig) {
      double c = std::cos(dot(t.wave, x) + t.phase);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) J(i, j) += c * t.amplitude[i] * t.wave[j];
    }
    for (const auto& m : poly)
      for (int j = 0; j < N; ++j) J(m.component, j) += m.coeff * monomial(m.powers, x, j, -1);
    return J;
  }

  /// hessian[i](j, k) = ∂²u_i/∂x_j∂x_k
  std::array<Mat<N>, N> hessian(const Vec<N>& x) const {
    std::array<Mat<N>, N> H{};
    for (const auto& t : trig) {
      double s = -std::sin(dot(t.wave, x) + t.phase);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k) H[i](j, k) += s * t.amplitude[i] * t.wave[j] * t.wave[k];
    }
    for (const auto& m : poly)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) H[m.component](j, k) += m.coeff * monomial(m.powers, x, j, k);
    return H;
  }

  AnalyticField scaled(double s) const {
    AnalyticField out = *this;
    for (auto& t : out.trig) t.amplitude *= s;
    for (auto& m : out.poly) m.coeff *= s;
    return out;
  }

 private:
  /// Π x_d^{p_d}, differentiated along axes a and b when they are >= 0.
  static double monomial(std::array<int, N> p, const Vec<N>& x, int a, int b) {
    double factor = 1.0;
    for (int axis : {a, b}) {
      if (axis < 0) continue;
      if (p[axis] == 0) return 0.0;
      factor *= p[axis];
      --p[axis];
    }
    double v = factor;
    for (int d = 0; d < N; ++d) v *= std::pow(x[d], p[d]);
    return v;
  }
};

/// u(x) = a + W x with W skew-symmetric.
template <int N>
AnalyticField<N> rigid_motion(const Vec<N>& shift, const Mat<N>& skew) {
  AnalyticField<N> u;
  u.label = "rigid";
  for (int i = 0; i < N; ++i) {
    typename AnalyticField<N>::Monomial c;
    c.component = i;
    c.coeff = shift[i];
    u.poly.push_back(c);
    for (int j = 0; j < N; ++j) {
      if (skew(i, j) == 0.0) continue;
      typename AnalyticField<N>::Monomial m;
      m.component = i;
      m.powers[j] = 1;
      m.coeff = skew(i, j);
      u.poly.push_back(m);
    }
  }
  return u;
}

/// Random trig field: `terms` summands with wave vectors of length at most kmax.
template <int N>
AnalyticField<N> random_trig_field(std::mt19937_64& rng, int terms = 2, double kmax = 4.0) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  AnalyticField<N> u;
  u.label = "trig";
  for (int t = 0; t < terms; ++t) {
    typename AnalyticField<N>::Trig term;
    Vec<N> k;
    for (int d = 0; d < N; ++d) k[d] = unit(rng);
    double len = norm(k);
    double mag = kmax * (0.25 + 0.75 * std::abs(unit(rng)));
    term.wave = k * (mag / (len > 0.0 ? len : 1.0));
    for (int d = 0; d < N; ++d) term.amplitude[d] = unit(rng);
    term.phase = kPi * unit(rng);
    u.trig.push_back(term);
  }
  return u;
}

/// Random polynomial of total degree <= 3 in each component.
template <int N>
AnalyticField<N> random_cubic_field(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  AnalyticField<N> u;
  u.label = "cubic";
  std::array<int, N> p{};
  std::function<void(int, int)> rec = [&](int d, int left) {
    if (d == N) {
      for (int i = 0; i < N; ++i) {
        typename AnalyticField<N>::Monomial m;
        m.component = i;
        m.powers = p;
        m.coeff = unit(rng);
        u.poly.push_back(m);
      }
      return;
    }
    for (int e = 0; e <= left; ++e) {
      p[d] = e;
      rec(d + 1, left - e);
    }
  };
  rec(0, 3);
  return u;
}

/// Seeded family: `trig_count` trig fields followed by `cubic_count` cubic fields.
template <int N>
std::vector<AnalyticField<N>> analytic_family(int trig_count, int cubic_count, std::uint64_t seed = 42) {
  std::mt19937_64 rng(seed);
  std::vector<AnalyticField<N>> out;
  for (int k = 0; k < trig_count; ++k) {
    out.push_back(random_trig_field<N>(rng));
    out.back().label = "trig" + std::to_string(k);
  }
  for (int k = 0; k < cubic_count; ++k) {
    out.push_back(random_cubic_field<N>(rng));
    out.back().label = "cubic" + std::to_string(k);
  }
  return out;
}

}  // namespace bogovskii
