#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "numerics.hpp"

namespace bogovskii {

/// Finite chain of star-shaped pieces; consecutive pieces overlap and each overlap
/// carries a unit-mass bump used to move mass between neighbours.
template <int N>
class LipschitzDomain {
 public:
  LipschitzDomain(std::vector<StarDomain<N>> pieces, std::vector<Mollifier<N>> overlap_bumps,
                  double transition_fraction = 0.5)
      : pieces_(std::move(pieces)), overlaps_(std::move(overlap_bumps)) {
    if (pieces_.empty()) throw Error(ErrorCode::InvalidDomain, "a Lipschitz domain needs at least one piece");
    if (overlaps_.size() + 1 != pieces_.size())
      throw Error(ErrorCode::InvalidDomain, "need exactly one overlap bump per consecutive pair of pieces");
    for (std::size_t i = 0; i < overlaps_.size(); ++i) {
      const auto& bump = overlaps_[i];
      auto inside_both = [&](const Vec<N>& p) { return pieces_[i].contains(p) && pieces_[i + 1].contains(p); };
      bool ok = inside_both(bump.center());
      for (const auto& u : detail::sphere_points<N>(N == 2 ? 256 : 1024)) ok = ok && inside_both(bump.center() + bump.radius() * u);
      if (!ok) throw Error(ErrorCode::InvalidDomain, "overlap bump support must lie in both neighbouring pieces");
    }
    for (const auto& p : pieces_) widths_.push_back(transition_fraction * p.ball().radius);
    lo_ = pieces_[0].bounding_box().lo;
    hi_ = pieces_[0].bounding_box().hi;
    for (const auto& p : pieces_) {
      for (int d = 0; d < N; ++d) {
        lo_[d] = std::min(lo_[d], p.bounding_box().lo[d]);
        hi_[d] = std::max(hi_[d], p.bounding_box().hi[d]);
      }
    }
  }

  std::size_t piece_count() const { return pieces_.size(); }
  const StarDomain<N>& piece(std::size_t i) const { return pieces_[i]; }
  const std::vector<StarDomain<N>>& pieces() const { return pieces_; }
  const std::vector<Mollifier<N>>& overlap_bumps() const { return overlaps_; }
  Box<N> bounding_box() const { return {lo_, hi_}; }

  bool contains(const Vec<N>& x, double slack = 1e-12) const {
    for (const auto& p : pieces_)
      if (p.contains(x, slack)) return true;
    return false;
  }

  /// Largest piece depth; positive inside the union.
  double depth(const Vec<N>& x) const {
    double d = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) d = std::max(d, p.depth(x));
    return d;
  }

  /// Partition of unity η_i(x): normalized smooth indicators of the pieces. Inside the
  /// union the weights sum to one; on a boundary where every indicator vanishes the
  /// first piece containing x takes the full weight.
  std::vector<double> partition(const Vec<N>& x) const {
    std::vector<double> w(pieces_.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      w[i] = 1.0 - smooth_step_down(pieces_[i].depth(x) / widths_[i]);
      total += w[i];
    }
    if (total > 0.0) {
      for (double& v : w) v /= total;
      return w;
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (pieces_[i].contains(x)) {
        w[i] = 1.0;
        break;
      }
    }
    return w;
  }

 private:
  std::vector<StarDomain<N>> pieces_;
  std::vector<Mollifier<N>> overlaps_;
  std::vector<double> widths_;
  Vec<N> lo_;
  Vec<N> hi_;
};

template <int N>
std::shared_ptr<const Grid<N>> make_grid(const LipschitzDomain<N>& dom, double h, double padding = 0.0) {
  auto box = dom.bounding_box();
  return make_box_grid<N>(box.lo, box.hi, h, padding, [&dom](const Vec<N>& x) { return dom.contains(x); });
}

/// Bump sampled on the grid and scaled so its grid integral is exactly one.
template <int N>
ScalarField<N> discrete_unit_bump(const std::shared_ptr<const Grid<N>>& grid, const Mollifier<N>& bump) {
  auto field = ScalarField<N>::sample(grid, [&](const Vec<N>& x) { return bump(x); });
  double mass = integrate(field);
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "bump is not resolved by the grid");
  field *= 1.0 / mass;
  return field;
}

/// Writes f = Σ f_i with supp f_i in piece i and ∫f_i = 0 (on the grid).
///
/// g_i = η_i f, c_i = Σ_{k<=i} ∫g_k, and f_i = g_i + c_{i-1}θ_{i-1} - c_iθ_i, where θ_i is
/// the unit bump of overlap i; the last piece carries no outgoing transfer.
template <int N>
std::vector<ScalarField<N>> split_zero_mean(const ScalarField<N>& f, const LipschitzDomain<N>& dom,
                                            double mean_tolerance = 1e-10) {
  const auto& grid = f.grid;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.values[i] != 0.0 && !dom.contains(grid->point(i)))
      throw Error(ErrorCode::SupportViolation, "f does not vanish outside the domain");
  }
  double total = integrate(f);
  double l1 = integrate_abs(f);
  if (std::abs(total) > mean_tolerance * l1) throw Error(ErrorCode::MeanNotZero, "f does not have zero mean");

  const std::size_t m = dom.piece_count();
  if (m == 1) return {f};

  std::vector<ScalarField<N>> parts(m, ScalarField<N>(grid, true));
  for (std::size_t i : grid->masked_nodes()) {
    if (f.values[i] == 0.0) continue;
    auto eta = dom.partition(grid->point(i));
    for (std::size_t k = 0; k < m; ++k) parts[k].values[i] = eta[k] * f.values[i];
  }
  double running = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    running = integrate(parts[k]);
    if (running == 0.0) continue;
    ScalarField<N> theta = discrete_unit_bump(grid, dom.overlap_bumps()[k]);
    for (std::size_t i : grid->masked_nodes()) {
      double t = running * theta.values[i];
      parts[k].values[i] -= t;
      parts[k + 1].values[i] += t;
    }
  }
  return parts;
}

}  // namespace bogovskii
