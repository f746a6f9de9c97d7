#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "domain.hpp"
#include "grid.hpp"
#include "inputs.hpp"
#include "kernel.hpp"
#include "norms.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "solver.hpp"

namespace bogovskii {

/// Symmetric part of the Jacobian.
template <int N>
Mat<N> symmetric_part(const Mat<N>& J) {
  Mat<N> e;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) e(i, j) = 0.5 * (J(i, j) + J(j, i));
  return e;
}

template <int N>
struct StrainField {
  MatrixField<N> eps;
  const VectorField<N>* source = nullptr;
};

/// ε(u) = ½(∇u + ∇uᵀ) from the finite-difference Jacobian.
template <int N>
StrainField<N> strain(const VectorField<N>& u) {
  auto fd = fd_gradient(u);
  StrainField<N> out{MatrixField<N>(u.grid, u.support_flag), &u};
  for (std::size_t i = 0; i < u.size(); ++i) out.eps.values[i] = symmetric_part(fd.gradient.values[i]);
  return out;
}

enum class DerivativeMode { ClosedForm, FiniteDifference };

/// max over points and indices of |∂²u_i/∂x_k∂x_j - (ε_ik,j + ε_ij,k - ε_jk,i)|.
/// FiniteDifference mode differentiates sampled values with step h on both sides.
template <int N>
double second_derivative_identity_check(const AnalyticField<N>& u, const std::vector<Vec<N>>& points,
                                        DerivativeMode mode = DerivativeMode::ClosedForm, double h = 0.01) {
  // d_eps[c](a, b) = ∂ε_ab/∂x_c
  auto eps_derivatives = [&](const Vec<N>& x) {
    std::array<Mat<N>, N> d{};
    if (mode == DerivativeMode::ClosedForm) {
      auto H = u.hessian(x);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          for (int c = 0; c < N; ++c) d[c](a, b) = 0.5 * (H[a](b, c) + H[b](a, c));
      return d;
    }
    auto strain_at = [&](const Vec<N>& p) {
      Mat<N> J;
      for (int j = 0; j < N; ++j) {
        Vec<N> s = Vec<N>::unit(j) * h;
        Vec<N> du = (u.value(p + s) - u.value(p - s)) / (2.0 * h);
        for (int i = 0; i < N; ++i) J(i, j) = du[i];
      }
      return symmetric_part(J);
    };
    for (int c = 0; c < N; ++c) {
      Vec<N> s = Vec<N>::unit(c) * h;
      d[c] = (strain_at(x + s) - strain_at(x - s)) * (0.5 / h);
    }
    return d;
  };
  auto second = [&](const Vec<N>& x, int i, int k, int j) {
    if (mode == DerivativeMode::ClosedForm) return u.hessian(x)[i](k, j);
    Vec<N> sk = Vec<N>::unit(k) * h;
    Vec<N> sj = Vec<N>::unit(j) * h;
    if (k == j) return (u.value(x + sk)[i] - 2.0 * u.value(x)[i] + u.value(x - sk)[i]) / (h * h);
    return (u.value(x + sk + sj)[i] - u.value(x + sk - sj)[i] - u.value(x - sk + sj)[i] + u.value(x - sk - sj)[i]) /
           (4.0 * h * h);
  };
  double worst = 0.0;
  for (const auto& x : points) {
    auto d = eps_derivatives(x);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
          double rhs = d[j](i, k) + d[k](i, j) - d[i](j, k);
          worst = std::max(worst, std::abs(second(x, i, k, j) - rhs));
        }
  }
  return worst;
}

/// (∂u_i/∂x_j)_ω = -∫ u_i ∂ω/∂x_j, as a grid sum.
template <int N>
Mat<N> mean_gradient_by_parts(const VectorField<N>& u, const Mollifier<N>& mol) {
  Mat<N> out;
  const Grid<N>& g = *u.grid;
  std::array<CompensatedSum, N * N> sums;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!g.masked(i) && u.support_flag) continue;
    Vec<N> x = g.point(i);
    if (norm(x - mol.center()) >= mol.radius()) continue;
    Vec<N> dw = mol.gradient(x);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) sums[a * N + b].add(-u.values[i][a] * dw[b]);
  }
  for (int k = 0; k < N * N; ++k) out.a[k] = sums[k].value() * g.cell_volume();
  return out;
}

namespace detail {

/// Polar Gauss quadrature of F over the mollifier ball.
template <int N, class T, class F>
T integrate_over_ball(const Ball<N>& ball, F&& f, int radial = 64, int angular = 256) {
  const KernelConfig rule{radial, 2, 2, 1e-5};
  std::function<T(const Vec<N>&)> on_sphere = [&](const Vec<N>& s) {
    T acc = ValueTraits<T>::zero();
    for_each_gauss_node(0.0, ball.radius, rule,
                        [&](double r, double w) { acc += (w * std::pow(r, N - 1)) * f(ball.center + r * s); });
    return acc;
  };
  return sphere_integral<N, T>(on_sphere, nullptr, 0.0, N == 2 ? angular : angular / 2);
}

}  // namespace detail

/// ∫ ∇u ω directly, for an analytic field.
template <int N>
Mat<N> mean_gradient_direct(const AnalyticField<N>& u, const Mollifier<N>& mol) {
  return detail::integrate_over_ball<N, Mat<N>>(mol.support(),
                                                [&](const Vec<N>& x) { return mol(x) * u.jacobian(x); });
}

/// -∫ u_i ∂ω/∂x_j, for an analytic field.
template <int N>
Mat<N> mean_gradient_by_parts(const AnalyticField<N>& u, const Mollifier<N>& mol) {
  return detail::integrate_over_ball<N, Mat<N>>(mol.support(), [&](const Vec<N>& x) {
    Vec<N> v = u.value(x);
    Vec<N> dw = mol.gradient(x);
    Mat<N> out;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) out(a, b) = -v[a] * dw[b];
    return out;
  });
}

/// Reconstruction of ∇u - (∇u)_ω from the strain alone:
///   R_ij = Σ_k T*_kj ε_ik + T*_kk ε_ij - T*_ki ε_jk + ω_kj ε_ik + ω_kk ε_ij - ω_ki ε_jk,
/// with T*_kj g(y) = pv ∫ χ(y)χ(x) ∂G_k/∂x_j(x, y) g(x) dx. The strain is taken from
/// finite differences of u restricted to the domain.
template <int N>
MatrixField<N> korn_representation(const VectorField<N>& u, const StarDomain<N>& dom, const Mollifier<N>& mol,
                                   const Cutoff<N>& chi, const SolverOptions& opts = {}) {
  opts.kernel.validate();
  const double h = u.grid->h();
  opts.quadrature.validate(h);
  StrainField<N> st = strain(u);
  // restrict each strain component to the closed domain
  std::vector<ScalarField<N>> comps;
  std::vector<std::pair<int, int>> index;
  for (int a = 0; a < N; ++a) {
    for (int b = a; b < N; ++b) {
      ScalarField<N> c(u.grid, true);
      for (std::size_t i : u.grid->masked_nodes())
        if (dom.contains(u.grid->point(i))) c.values[i] = st.eps.values[i](a, b);
      comps.push_back(std::move(c));
      index.emplace_back(a, b);
    }
  }
  std::vector<WeightedSupport<N, double>> supports;
  for (const auto& c : comps) supports.push_back(weighted_support(c));
  auto slot = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    for (std::size_t s = 0; s < index.size(); ++s)
      if (index[s] == std::make_pair(a, b)) return s;
    return std::size_t{0};
  };

  MatrixField<N> out(u.grid, true);
  auto nodes = target_nodes(*u.grid, dom, opts);
  const auto eps = opts.quadrature.eps_levels(h);
  parallel_for(nodes.size(), opts.threads, [&](std::size_t n) {
    std::size_t i = nodes[n];
    Vec<N> y = u.grid->point(i);
    auto kernel = [&](const Vec<N>& x) { return eval_N(x, y, chi, mol, opts.kernel); };
    auto cone = ConeHint<N>::toward(y, mol.support(), false);
    // S[s](k, j) = T*_kj applied to strain component s
    std::vector<Mat<N>> S(comps.size());
    for (std::size_t s = 0; s < comps.size(); ++s) {
      if (supports[s].nodes.empty()) continue;
      S[s] = pv_integral<N, Mat<N>>(kernel, comps[s], supports[s], y, eps, opts.quadrature, cone).value;
    }
    Mat<N> w = eval_omega(y, mol, opts.kernel);
    Mat<N> e = st.eps.values[i];
    Mat<N> R;
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        double v = 0.0;
        for (int k = 0; k < N; ++k) {
          v += S[slot(a, k)](k, b) + S[slot(a, b)](k, k) - S[slot(b, k)](k, a);
          v += w(k, b) * e(a, k) + w(k, k) * e(a, b) - w(k, a) * e(b, k);
        }
        R(a, b) = v;
      }
    }
    out.values[i] = R;
  });
  return out;
}

}  // namespace bogovskii
