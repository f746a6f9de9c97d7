#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "lipschitz.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace bogovskii {

inline SingularQuadrature polar_limit_quadrature() {
  SingularQuadrature q;
  q.method = PvMethod::PolarLimit;
  return q;
}

struct SolverOptions {
  KernelConfig kernel;
  SingularQuadrature quadrature = polar_limit_quadrature();
  bool subtract_mean = false;            // opt-in; otherwise a nonzero mean is an error
  double mean_tolerance = 1e-8;          // relative to ‖f‖_{L¹}
  std::vector<std::size_t> output_nodes; // empty: every node of the domain
  int threads = 0;                       // 0: default_threads()
};

/// Checks supp f ⊂ Ω̄ and ∫f = 0; returns f, mean-corrected when requested.
template <int N, class Domain>
ScalarField<N> checked_density(const ScalarField<N>& f, const Domain& dom, const SolverOptions& opts) {
  const auto& grid = *f.grid;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.values[i] != 0.0 && !(grid.masked(i) && dom.contains(grid.point(i))))
      throw Error(ErrorCode::SupportViolation, "f does not vanish outside the domain");
  }
  double mean = integrate(f);
  double l1 = integrate_abs(f);
  if (std::abs(mean) <= opts.mean_tolerance * l1) return f;
  if (!opts.subtract_mean) throw Error(ErrorCode::MeanNotZero, "f does not have zero mean");
  std::vector<std::size_t> inside;
  for (std::size_t i : grid.masked_nodes())
    if (dom.contains(grid.point(i))) inside.push_back(i);
  ScalarField<N> out = f;
  double shift = mean / (static_cast<double>(inside.size()) * grid.cell_volume());
  for (std::size_t i : inside) out.values[i] -= shift;
  return out;
}

/// Nodes of the grid that belong to the closed domain, or the caller's subset.
template <int N, class Domain>
std::vector<std::size_t> target_nodes(const Grid<N>& grid, const Domain& dom, const SolverOptions& opts) {
  std::vector<std::size_t> nodes;
  const auto& pool = opts.output_nodes.empty() ? grid.masked_nodes() : opts.output_nodes;
  for (std::size_t i : pool)
    if (grid.masked(i) && dom.contains(grid.point(i))) nodes.push_back(i);
  return nodes;
}

/// u(x) = ∫ G(x, y) f(y) dy at a single point.
template <int N>
Vec<N> bogovskii_at(const Vec<N>& x, const ScalarField<N>& f, const WeightedSupport<N, double>& support,
                    const Mollifier<N>& mol, const SolverOptions& opts) {
  auto kernel = [&](const Vec<N>& y) { return eval_G(x, y, mol, opts.kernel); };
  return regular_integral<N, Vec<N>>(kernel, f, support, x, opts.quadrature,
                                     ConeHint<N>::toward(x, mol.support(), true));
}

/// Applies the Bogovskii operator on the nodes of the domain; zero elsewhere.
template <int N>
VectorField<N> bogovskii_apply(const ScalarField<N>& f, const StarDomain<N>& dom, const Mollifier<N>& mol,
                               const SolverOptions& opts = {}) {
  opts.kernel.validate();
  opts.quadrature.validate(f.grid->h());
  ScalarField<N> density = checked_density(f, dom, opts);
  auto support = weighted_support(density);
  VectorField<N> u(f.grid, true);
  if (support.nodes.empty()) return u;
  auto nodes = target_nodes(*f.grid, dom, opts);
  parallel_for(nodes.size(), opts.threads, [&](std::size_t k) {
    std::size_t i = nodes[k];
    u.values[i] = bogovskii_at(f.grid->point(i), density, support, mol, opts);
  });
  return u;
}

/// ∂u_i/∂x_j = pv ∫ χ(x)χ(y) ∂G_i/∂x_j(x, y) f(y) dy + ω_ij(x) f(x), per node.
template <int N>
struct Decomposition {
  MatrixField<N> gradient;
  MatrixField<N> singular_part;  // principal-value term alone
  double max_defect = 0.0;       // largest extrapolation defect over the nodes
};

template <int N>
Decomposition<N> gradient_decomposition_full(const ScalarField<N>& f, const StarDomain<N>& dom,
                                             const Mollifier<N>& mol, const Cutoff<N>& chi,
                                             const SolverOptions& opts = {}) {
  opts.kernel.validate();
  const double h = f.grid->h();
  opts.quadrature.validate(h);
  ScalarField<N> density = checked_density(f, dom, opts);
  auto support = weighted_support(density);
  Decomposition<N> out{MatrixField<N>(f.grid, true), MatrixField<N>(f.grid, true), 0.0};
  auto nodes = target_nodes(*f.grid, dom, opts);
  const auto eps = opts.quadrature.eps_levels(h);
  std::vector<double> defects(nodes.size(), 0.0);
  parallel_for(nodes.size(), opts.threads, [&](std::size_t k) {
    std::size_t i = nodes[k];
    Vec<N> x = f.grid->point(i);
    Mat<N> singular;
    if (!support.nodes.empty()) {
      auto kernel = [&](const Vec<N>& y) { return eval_N(x, y, chi, mol, opts.kernel); };
      auto pv = pv_integral<N, Mat<N>>(kernel, density, support, x, eps, opts.quadrature,
                                       ConeHint<N>::toward(x, mol.support(), true));
      singular = pv.value;
      defects[k] = pv.defect;
    }
    out.singular_part.values[i] = singular;
    double fx = density.values[i];
    out.gradient.values[i] = fx == 0.0 ? singular : singular + fx * eval_omega(x, mol, opts.kernel);
  });
  for (double d : defects) out.max_defect = std::max(out.max_defect, d);
  return out;
}

template <int N>
MatrixField<N> gradient_decomposition(const ScalarField<N>& f, const StarDomain<N>& dom, const Mollifier<N>& mol,
                                      const Cutoff<N>& chi, const SolverOptions& opts = {}) {
  return gradient_decomposition_full(f, dom, mol, chi, opts).gradient;
}

/// Masked nodes at depth >= margin.
template <int N, class Domain>
std::vector<std::size_t> interior_nodes(const Grid<N>& grid, const Domain& dom, double margin) {
  std::vector<std::size_t> out;
  for (std::size_t i : grid.masked_nodes())
    if (dom.depth(grid.point(i)) >= margin) out.push_back(i);
  return out;
}

/// Nodes whose multi-index is a multiple of `stride` along every axis.
template <int N>
std::vector<std::size_t> lattice_subset(const Grid<N>& grid, const std::vector<std::size_t>& nodes, int stride) {
  std::vector<std::size_t> out;
  for (std::size_t i : nodes) {
    auto m = grid.multi(i);
    bool keep = true;
    for (int d = 0; d < N; ++d) keep = keep && ((grid.first()[d] + m[d]) % stride == 0);
    if (keep) out.push_back(i);
  }
  return out;
}

/// The nodes together with their axis neighbours (the centered-difference stencil).
template <int N>
std::vector<std::size_t> stencil_closure(const Grid<N>& grid, const std::vector<std::size_t>& nodes) {
  std::vector<std::uint8_t> mark(grid.size(), 0);
  for (std::size_t i : nodes) {
    mark[i] = 1;
    auto m = grid.multi(i);
    for (int d = 0; d < N; ++d) {
      for (int s : {-1, 1}) {
        auto k = m;
        k[d] += s;
        if (grid.in_bounds(k)) mark[grid.linear(k)] = 1;
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mark.size(); ++i)
    if (mark[i]) out.push_back(i);
  return out;
}

/// Divergence of a vector field by centered differences at the given nodes.
template <int N>
std::vector<double> centered_divergence(const VectorField<N>& u, const std::vector<std::size_t>& nodes) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (std::size_t i : nodes) {
    double div = 0.0;
    for (int d = 0; d < N; ++d) {
      Vec<N> v;
      bool centered = false;
      if (!fd_derivative(u, i, d, v, centered))
        throw Error(ErrorCode::InvalidArgument, "divergence stencil leaves the grid");
      div += v[d];
    }
    out.push_back(div);
  }
  return out;
}

/// Output of a full solve on a star-shaped or Lipschitz domain.
template <int N>
struct SolveResult {
  VectorField<N> u;
  MatrixField<N> grad_u;       // finite-difference Jacobian of u
  ScalarField<N> div_residual; // trace(grad_u) - f on interior nodes, zero elsewhere
  std::vector<std::size_t> interior;
  struct Diagnostics {
    double mean_of_f = 0.0;
    double max_abs_f = 0.0;
    double max_residual = 0.0;
    double max_pv_defect = 0.0;
  } diagnostics;
};

template <int N, class Domain>
void fill_residual(SolveResult<N>& res, const ScalarField<N>& f, const Domain& dom) {
  auto fd = fd_gradient(res.u);
  res.grad_u = fd.gradient;
  res.div_residual = ScalarField<N>(f.grid, true);
  const double h = f.grid->h();
  res.interior = interior_nodes(*f.grid, dom, 2.0 * h);
  double worst = 0.0;
  for (std::size_t i : res.interior) {
    double r = res.grad_u.values[i].trace() - f.values[i];
    res.div_residual.values[i] = r;
    worst = std::max(worst, std::abs(r));
  }
  res.diagnostics.mean_of_f = integrate(f);
  res.diagnostics.max_abs_f = max_abs(f);
  res.diagnostics.max_residual = worst;
}

template <int N>
SolveResult<N> solve(const ScalarField<N>& f, const StarDomain<N>& dom, const Mollifier<N>& mol,
                     const SolverOptions& opts = {}) {
  SolveResult<N> res;
  res.u = bogovskii_apply(f, dom, mol, opts);
  fill_residual(res, f, dom);
  return res;
}

/// Each piece is solved with the bump on its own ball; the solutions are summed.
template <int N>
SolveResult<N> solve_lipschitz(const ScalarField<N>& f, const LipschitzDomain<N>& dom,
                               const SolverOptions& opts = {}) {
  auto parts = split_zero_mean(f, dom, opts.mean_tolerance);
  SolveResult<N> res;
  res.u = VectorField<N>(f.grid, true);
  for (std::size_t k = 0; k < dom.piece_count(); ++k) {
    const auto& piece = dom.piece(k);
    auto mol = make_bump<N>(piece.ball().center, piece.ball().radius);
    SolverOptions piece_opts = opts;
    piece_opts.subtract_mean = false;
    piece_opts.mean_tolerance = std::max(opts.mean_tolerance, 1e-9);
    res.u += bogovskii_apply(parts[k], piece, mol, piece_opts);
  }
  fill_residual(res, f, dom);
  return res;
}

}  // namespace bogovskii
