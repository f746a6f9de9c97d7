#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace bogovskii {

/// φ = Re log(1 + z) = log|1 + z| on the unit disk.
inline double log_real_part(const Vec<2>& x) { return std::log(std::abs(std::complex<double>(1.0 + x[0], x[1]))); }

/// ψ = Im log(1 + z) = arg(1 + z), the harmonic conjugate of φ.
inline double log_conjugate(const Vec<2>& x) { return std::arg(std::complex<double>(1.0 + x[0], x[1])); }

struct CounterexampleRow {
  double delta = 0.0;
  double pairing = 0.0;  // |∫ φ f_δ|
  double l1 = 0.0;       // ‖f_δ‖_{L¹}
  double ratio = 0.0;    // pairing / (‖ψ‖_∞ ‖f_δ‖_{L¹})
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  double psi_sup = 0.0;
  bool increasing = false;
  double min_increment_fraction = 0.0;  // smallest per-halving increment over the first one
};

struct CounterexampleOptions {
  double cells_per_delta = 80.0;  // local grid spacing is δ / cells_per_delta
  double sup_h = 0.0025;          // spacing of the unit-disk grid on which ‖ψ‖_∞ is sampled
};

/// For each δ, f_δ is the unit bump of radius δ/2 centred at z = -1 + δ, sampled on a
/// grid local to its support; the ratio grows like |log δ| while ψ stays bounded.
inline CounterexampleReport counterexample_p1(const std::vector<double>& deltas, const CounterexampleOptions& opts = {}) {
  if (deltas.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one delta");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0 && deltas[k] < 0.5)) throw Error(ErrorCode::InvalidArgument, "deltas must lie in (0, 0.5)");
    if (k > 0 && !(deltas[k] < deltas[k - 1])) throw Error(ErrorCode::InvalidArgument, "deltas must decrease");
  }
  const std::function<bool(const Vec<2>&)> in_disk = [](const Vec<2>& x) { return norm2(x) <= 1.0; };
  CounterexampleReport rep;

  auto unit_disk = make_box_grid<2>(Vec<2>{{-1.0, -1.0}}, Vec<2>{{1.0, 1.0}}, opts.sup_h, 0.0, in_disk);
  for (std::size_t i : unit_disk->masked_nodes()) {
    Vec<2> x = unit_disk->point(i);
    if (x[0] > -1.0) rep.psi_sup = std::max(rep.psi_sup, std::abs(log_conjugate(x)));
  }

  for (double delta : deltas) {
    const double radius = 0.5 * delta;
    const Vec<2> center{{-1.0 + delta, 0.0}};
    auto bump = make_bump<2>(center, radius);
    Vec<2> lo = center - Vec<2>{{radius, radius}};
    Vec<2> hi = center + Vec<2>{{radius, radius}};
    auto grid = make_box_grid<2>(lo, hi, delta / opts.cells_per_delta, 0.0, in_disk);
    auto f = ScalarField<2>::sample(grid, [&](const Vec<2>& x) { return bump(x); });
    auto pairing_density = ScalarField<2>::sample(grid, [&](const Vec<2>& x) { return log_real_part(x) * bump(x); });
    for (std::size_t i : grid->masked_nodes()) {
      Vec<2> x = grid->point(i);
      rep.psi_sup = std::max(rep.psi_sup, std::abs(log_conjugate(x)));
    }
    CounterexampleRow row;
    row.delta = delta;
    row.pairing = std::abs(integrate(pairing_density));
    row.l1 = integrate_abs(f);
    rep.rows.push_back(row);
  }
  for (auto& row : rep.rows) row.ratio = row.pairing / (rep.psi_sup * row.l1);

  rep.increasing = true;
  rep.min_increment_fraction = rep.rows.size() > 2 ? 1e300 : 1.0;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    double inc = rep.rows[k].ratio - rep.rows[k - 1].ratio;
    if (!(inc > 0.0)) rep.increasing = false;
    if (k >= 2) {
      double first = rep.rows[1].ratio - rep.rows[0].ratio;
      double per_halving = inc / std::log2(rep.rows[k - 1].delta / rep.rows[k].delta);
      double first_per_halving = first / std::log2(rep.rows[0].delta / rep.rows[1].delta);
      rep.min_increment_fraction = std::min(rep.min_increment_fraction, per_halving / first_per_halving);
    }
  }
  return rep;
}

}  // namespace bogovskii
