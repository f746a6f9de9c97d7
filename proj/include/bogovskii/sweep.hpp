#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "domain.hpp"
#include "grid.hpp"
#include "inputs.hpp"
#include "korn.hpp"
#include "norms.hpp"
#include "solver.hpp"

namespace bogovskii {

struct SweepRow {
  std::string label;
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  bool skipped = false;  // zero denominator: the ratio is undefined
};

/// Per-input norm ratios of a family and their extremes.
struct SweepReport {
  std::string name;
  std::map<std::string, std::string> parameters;
  std::vector<SweepRow> rows;
  double supremum = 0.0;
  double infimum = 0.0;

  void add(std::string label, double numerator, double denominator) {
    SweepRow r{std::move(label), numerator, denominator, 0.0, !(denominator > 0.0)};
    if (!r.skipped) r.ratio = numerator / denominator;
    rows.push_back(std::move(r));
    supremum = 0.0;
    infimum = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
      if (row.skipped) continue;
      supremum = std::max(supremum, row.ratio);
      infimum = std::min(infimum, row.ratio);
    }
  }

  std::size_t counted() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.skipped ? 0 : 1;
    return n;
  }

  /// max/min over the counted rows; infinite when some ratio vanishes.
  double spread() const {
    if (counted() == 0) return 0.0;
    return infimum > 0.0 ? supremum / infimum : std::numeric_limits<double>::infinity();
  }

  bool all_finite() const {
    for (const auto& r : rows)
      if (!r.skipped && !std::isfinite(r.ratio)) return false;
    return true;
  }
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string short_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Sum of the L^p norms of the matrix entries.
template <int N>
double entrywise_lp(const MatrixField<N>& g, double p) {
  double total = 0.0;
  for (int k = 0; k < N * N; ++k) total += lp_norm(component(g, k), p);
  return total;
}

/// ‖∇u‖_{L^p} / ‖f‖_{L^p} for a family of dipoles; one report per p.
template <int N>
std::vector<SweepReport> lp_ratio_sweep(const std::shared_ptr<const Grid<N>>& grid, const StarDomain<N>& dom,
                                        const Mollifier<N>& mol, const Cutoff<N>& chi,
                                        const std::vector<DipoleSpec<N>>& family, const std::vector<double>& p_list,
                                        const SolverOptions& opts = {}) {
  std::vector<SweepReport> out;
  for (double p : p_list) {
    SweepReport r;
    r.name = "lp";
    r.parameters["p"] = short_number(p);
    r.parameters["h"] = format_number(grid->h());
    r.parameters["members"] = std::to_string(family.size());
    out.push_back(std::move(r));
  }
  for (std::size_t m = 0; m < family.size(); ++m) {
    const auto& spec = family[m];
    auto f = dipole(grid, spec.plus, spec.minus, spec.radius);
    auto grad = gradient_decomposition(f, dom, mol, chi, opts);
    std::string label = "dipole" + std::to_string(m) + "(r=" + short_number(spec.radius) + ")";
    for (std::size_t k = 0; k < p_list.size(); ++k)
      out[k].add(label, entrywise_lp(grad, p_list[k]), lp_norm(f, p_list[k]));
  }
  return out;
}

/// hp(∇u) / hp(f) for atoms centred at `center` with the given radii; one report per p.
/// The grid must leave room for the largest dilation of the test function around Ω.
template <int N>
std::vector<SweepReport> hp_atom_sweep(const std::shared_ptr<const Grid<N>>& grid, const StarDomain<N>& dom,
                                       const Mollifier<N>& mol, const Cutoff<N>& chi, const Vec<N>& center,
                                       const std::vector<double>& radii, const std::vector<double>& p_list,
                                       const MaximalConfig<N>& cfg, const SolverOptions& opts = {}) {
  std::vector<SweepReport> out;
  for (double p : p_list) {
    SweepReport r;
    r.name = "hp_atoms";
    r.parameters["p"] = short_number(p);
    r.parameters["h"] = format_number(grid->h());
    r.parameters["phi_radius"] = format_number(cfg.phi.radius());
    r.parameters["t_levels"] = std::to_string(cfg.t_levels.size());
    out.push_back(std::move(r));
  }
  for (double rho : radii) {
    auto f = atom(grid, center, rho, 1.0);
    auto grad = gradient_decomposition(f, dom, mol, chi, opts);
    std::string label = "atom(rho=" + short_number(rho) + ")";
    for (std::size_t k = 0; k < p_list.size(); ++k) {
      double p = p_list[k];
      double scale = std::pow(rho, static_cast<double>(N) - static_cast<double>(N) / p);
      out[k].add(label, scale * hp_sum(grad, p, cfg, opts.threads), scale * hp_sum(f, p, cfg, opts.threads));
    }
  }
  return out;
}

/// Hölder bumps of radius in [r_min, r_max] placed in `region` with a fixed seed.
template <int N>
std::vector<std::pair<Vec<N>, double>> holder_bump_family(const Ball<N>& region, int count, double r_min,
                                                          double r_max, std::uint64_t seed = 42) {
  auto specs = dipole_family<N>(region, count, r_min, r_max, seed);
  std::vector<std::pair<Vec<N>, double>> out;
  for (const auto& s : specs) out.emplace_back(s.plus, s.radius);
  return out;
}

/// Snaps a point to the nearest grid node.
template <int N>
Vec<N> nearest_node(const Grid<N>& grid, const Vec<N>& x) {
  Vec<N> out;
  for (int d = 0; d < N; ++d) out[d] = std::round(x[d] / grid.h()) * grid.h();
  return out;
}

struct HolderSweep {
  SweepReport lambda;
  SweepReport bmo;
};

/// max_ij Λ_α(∂u_i/∂x_j) / Λ_α(f) and the bmo analogue, for zero-mean Hölder bumps.
/// Norms are taken over every node of the (padded) grid, with ∇u extended by zero.
template <int N>
HolderSweep holder_ratio_sweep(const std::shared_ptr<const Grid<N>>& grid, const StarDomain<N>& dom,
                               const Mollifier<N>& mol, const Cutoff<N>& chi,
                               const std::vector<std::pair<Vec<N>, double>>& bumps, double alpha,
                               const SolverOptions& opts = {}, long long pair_budget = 20000,
                               long long ball_budget = 400) {
  HolderSweep out;
  out.lambda.name = "lambda";
  out.bmo.name = "bmo";
  for (auto* r : {&out.lambda, &out.bmo}) {
    r->parameters["alpha"] = short_number(alpha);
    r->parameters["h"] = format_number(grid->h());
    r->parameters["members"] = std::to_string(bumps.size());
  }
  for (std::size_t m = 0; m < bumps.size(); ++m) {
    Vec<N> c = nearest_node(*grid, bumps[m].first);
    auto f = holder_bump(grid, c, bumps[m].second, alpha);
    auto grad = gradient_decomposition(f, dom, mol, chi, opts);
    double lam = 0.0, osc = 0.0;
    for (int k = 0; k < N * N; ++k) {
      auto g = component(grad, k);
      lam = std::max(lam, lambda_norm(g, alpha, pair_budget));
      osc = std::max(osc, bmo_norm(g, ball_budget, opts.threads).bmo);
    }
    std::string label = "holder" + std::to_string(m) + "(r=" + short_number(bumps[m].second) + ")";
    out.lambda.add(label, lam, lambda_norm(f, alpha, pair_budget));
    out.bmo.add(label, osc, bmo_norm(f, ball_budget, opts.threads).bmo);
  }
  return out;
}

/// Box grid around the cutoff's outer ball, padded for the maximal function.
template <int N>
std::shared_ptr<const Grid<N>> extension_grid(const Cutoff<N>& chi, const MaximalConfig<N>& cfg, double h) {
  double tmax = *std::max_element(cfg.t_levels.begin(), cfg.t_levels.end());
  Vec<N> r;
  for (int d = 0; d < N; ++d) r[d] = chi.outer_radius();
  return make_box_grid<N>(chi.center() - r, chi.center() + r, h, tmax * cfg.phi.radius() + 2.0 * h,
                          [](const Vec<N>&) { return true; });
}

/// hp(∇v) / (hp(ε(v)) + hp(v)) for the extensions v = χu of analytic fields.
template <int N>
SweepReport korn_ratio_sweep(const std::vector<AnalyticField<N>>& family, double p, const Cutoff<N>& chi,
                             const MaximalConfig<N>& cfg, double h, int threads = 0) {
  if (family.empty()) throw Error(ErrorCode::InvalidArgument, "family must not be empty");
  if (!(p > static_cast<double>(N) / (N + 1) && p <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "p must lie in (n/(n+1), 1]");
  auto grid = extension_grid(chi, cfg, h);
  SweepReport r;
  r.name = "korn";
  r.parameters["p"] = short_number(p);
  r.parameters["h"] = format_number(h);
  r.parameters["members"] = std::to_string(family.size());
  for (const auto& u : family) {
    VectorField<N> v(grid, true);
    MatrixField<N> grad(grid, true), eps(grid, true);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      Vec<N> x = grid->point(i);
      double c = chi(x);
      if (c == 0.0) continue;
      Vec<N> ux = u.value(x);
      Vec<N> dc = chi.gradient(x);
      Mat<N> J = c * u.jacobian(x);
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) J(a, b) += ux[a] * dc[b];
      v.values[i] = c * ux;
      grad.values[i] = J;
      eps.values[i] = symmetric_part(J);
    }
    double num = hp_sum(grad, p, cfg, threads);
    double den = hp_sum(eps, p, cfg, threads) + hp_sum(v, p, cfg, threads);
    r.add(u.label, num, den);
  }
  return r;
}

}  // namespace bogovskii
