#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "numerics.hpp"
#include "parallel.hpp"

namespace bogovskii {

enum class NormKind { Lp, Hp, Holder, Lambda, Bmo, BMO };

inline const char* to_string(NormKind k) {
  switch (k) {
    case NormKind::Lp: return "Lp";
    case NormKind::Hp: return "hp";
    case NormKind::Holder: return "holder";
    case NormKind::Lambda: return "lambda";
    case NormKind::Bmo: return "bmo";
    case NormKind::BMO: return "BMO";
  }
  return "unknown";
}

struct NormReport {
  NormKind kind = NormKind::Lp;
  double parameter = 0.0;  // p or α
  double value = 0.0;
  double h = 0.0;
  std::size_t nodes = 0;
  std::vector<std::string> warnings;
};

/// (Σ |f|^p · cell volume)^{1/p} over masked nodes; |·| is the Frobenius magnitude.
template <int N, class T>
double lp_norm(const GridField<N, T>& f, double p) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  CompensatedSum s;
  for (std::size_t i : f.grid->masked_nodes()) {
    double v = magnitude(f.values[i]);
    if (v != 0.0) s.add(std::pow(v, p));
  }
  return std::pow(s.value() * f.grid->cell_volume(), 1.0 / p);
}

/// Test function and dilation levels of the local maximal function.
template <int N>
struct MaximalConfig {
  Mollifier<N> phi;
  std::vector<double> t_levels;

  /// φ = unit bump of radius 1/4 at the origin, t = 2^{-k}, k = 0..levels.
  static MaximalConfig standard(int levels = 8) {
    MaximalConfig c{make_bump<N>(Vec<N>{}, 0.25), {}};
    for (int k = 0; k <= levels; ++k) c.t_levels.push_back(std::ldexp(1.0, -k));
    return c;
  }

  void validate(bool local = true) const {
    if (t_levels.empty()) throw Error(ErrorCode::InvalidArgument, "t_levels must not be empty");
    for (double t : t_levels) {
      if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_levels must be positive");
      if (local && t > 1.0) throw Error(ErrorCode::InvalidArgument, "local maximal function needs t <= 1");
    }
  }
};

namespace detail {

/// Offsets and weights of φ_t on the grid, scaled to unit discrete mass.
/// When φ_t is narrower than a cell the stencil degenerates to the identity.
template <int N>
struct DiscreteKernel {
  std::vector<std::array<int, N>> offsets;
  std::vector<double> weights;
};

template <int N>
DiscreteKernel<N> discretize(const Mollifier<N>& phi, double t, double h) {
  DiscreteKernel<N> k;
  const double radius = phi.radius() * t;
  const int reach = static_cast<int>(std::floor(radius / h));
  double total = 0.0;
  std::array<int, N> o{};
  std::function<void(int)> rec = [&](int d) {
    if (d == N) {
      Vec<N> z;
      for (int a = 0; a < N; ++a) z[a] = o[a] * h / t;
      double w = phi(phi.center() + z);
      if (w > 0.0) {
        k.offsets.push_back(o);
        k.weights.push_back(w);
        total += w;
      }
      return;
    }
    for (int v = -reach; v <= reach; ++v) {
      o[d] = v;
      rec(d + 1);
    }
  };
  rec(0);
  if (total == 0.0) {
    k.offsets.assign(1, std::array<int, N>{});
    k.weights.assign(1, 1.0);
    return k;
  }
  for (double& w : k.weights) w /= total;
  return k;
}

/// Value at multi-index m; zero outside the box or (with support_flag) off the mask.
template <int N>
double value_at(const ScalarField<N>& f, const typename Grid<N>::Index& m) {
  if (!f.grid->in_bounds(m)) return 0.0;
  std::size_t i = f.grid->linear(m);
  if (!f.grid->masked(i) && f.support_flag) return 0.0;
  return f.values[i];
}

}  // namespace detail

/// m_φ f(x) = max over t_levels of |f * φ_t|(x), at every node of the box.
template <int N>
ScalarField<N> local_maximal(const ScalarField<N>& f, const MaximalConfig<N>& cfg, int threads = 0) {
  cfg.validate(false);
  const Grid<N>& g = *f.grid;
  const double h = g.h();
  double tmax = *std::max_element(cfg.t_levels.begin(), cfg.t_levels.end());
  const double margin = tmax * cfg.phi.radius();
  // support must stay margin away from the box faces
  Vec<N> lo = g.lower_corner();
  Vec<N> hi = g.upper_corner();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.values[i] == 0.0) continue;
    if (!g.masked(i) && f.support_flag) continue;
    Vec<N> x = g.point(i);
    for (int d = 0; d < N; ++d) {
      if (x[d] - lo[d] < margin - 1e-12 || hi[d] - x[d] < margin - 1e-12)
        throw Error(ErrorCode::PaddingRequired, "grid box too small for the largest dilation of the test function");
    }
  }
  std::vector<detail::DiscreteKernel<N>> kernels;
  for (double t : cfg.t_levels) kernels.push_back(detail::discretize(cfg.phi, t, h));

  ScalarField<N> out(f.grid, false);
  parallel_for(f.size(), threads, [&](std::size_t i) {
    auto m = g.multi(i);
    double best = 0.0;
    for (const auto& k : kernels) {
      double acc = 0.0;
      for (std::size_t s = 0; s < k.offsets.size(); ++s) {
        auto n = m;
        for (int d = 0; d < N; ++d) n[d] -= k.offsets[s][d];
        double v = detail::value_at(f, n);
        if (v != 0.0) acc += k.weights[s] * v;
      }
      best = std::max(best, std::abs(acc));
    }
    out.values[i] = best;
  });
  return out;
}

/// ‖m_φ f‖_{L^p} over the whole box. The claim regime is n/(n+1) < p <= 1;
/// other p are computed and flagged with an OutOfRegime warning.
template <int N>
NormReport hp_quasinorm(const ScalarField<N>& f, double p, const MaximalConfig<N>& cfg, int threads = 0) {
  if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  cfg.validate(true);
  NormReport rep{NormKind::Hp, p, 0.0, f.grid->h(), f.size(), {}};
  if (!(p > static_cast<double>(N) / (N + 1) && p <= 1.0))
    rep.warnings.push_back("OutOfRegime: p outside (n/(n+1), 1]");
  ScalarField<N> m = local_maximal(f, cfg, threads);
  CompensatedSum s;
  for (double v : m.values)
    if (v != 0.0) s.add(std::pow(v, p));
  rep.value = std::pow(s.value() * f.grid->cell_volume(), 1.0 / p);
  return rep;
}

/// Scalar component k of a vector or matrix field.
template <int N, class T>
ScalarField<N> component(const GridField<N, T>& f, int k) {
  ScalarField<N> out(f.grid, f.support_flag);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = ValueTraits<T>::at(f.values[i], k);
  return out;
}

/// Sum of the component quasi-norms of a vector or matrix field.
template <int N, class T>
double hp_sum(const GridField<N, T>& f, double p, const MaximalConfig<N>& cfg, int threads = 0) {
  double total = 0.0;
  for (int k = 0; k < ValueTraits<T>::components; ++k) total += hp_quasinorm(component(f, k), p, cfg, threads).value;
  return total;
}

/// sup |f(x) - f(y)| / |x - y|^α over all node pairs within 4h plus pair_budget
/// log-uniform long-range pairs drawn with a fixed seed. Uses every node where the
/// field is defined: all box nodes when support_flag is set, masked nodes otherwise.
template <int N>
double holder_seminorm(const ScalarField<N>& f, double alpha, long long pair_budget = 20000,
                       std::uint64_t seed = 42) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  const Grid<N>& g = *f.grid;
  const double h = g.h();
  auto defined = [&](std::size_t i) { return f.support_flag || g.masked(i); };
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (defined(i)) nodes.push_back(i);
  if (nodes.empty()) return 0.0;

  // near pairs: offsets in a half space with |o| <= 4
  std::vector<std::array<int, N>> offsets;
  std::array<int, N> o{};
  std::function<void(int)> rec = [&](int d) {
    if (d == N) {
      int r2 = 0;
      for (int a = 0; a < N; ++a) r2 += o[a] * o[a];
      if (r2 == 0 || r2 > 16) return;
      for (int a = N - 1; a >= 0; --a) {
        if (o[a] != 0) {
          if (o[a] > 0) offsets.push_back(o);
          return;
        }
      }
      return;
    }
    for (int v = -4; v <= 4; ++v) {
      o[d] = v;
      rec(d + 1);
    }
  };
  rec(0);
  std::vector<double> powed;
  for (const auto& off : offsets) {
    double r2 = 0.0;
    for (int a = 0; a < N; ++a) r2 += off[a] * off[a];
    powed.push_back(std::pow(std::sqrt(r2) * h, alpha));
  }
  double best = 0.0;
  for (std::size_t i : nodes) {
    auto m = g.multi(i);
    double fi = f.values[i];
    for (std::size_t s = 0; s < offsets.size(); ++s) {
      auto n = m;
      for (int d = 0; d < N; ++d) n[d] += offsets[s][d];
      if (!g.in_bounds(n)) continue;
      std::size_t j = g.linear(n);
      if (!defined(j)) continue;
      best = std::max(best, std::abs(fi - f.values[j]) / powed[s]);
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec<N> span = g.upper_corner() - g.lower_corner();
  const double far = std::max(norm(span), 5.0 * h);
  const double log_lo = std::log(4.0 * h);
  const double log_hi = std::log(far);
  for (long long k = 0; k < pair_budget; ++k) {
    std::size_t i = nodes[pick(rng)];
    Vec<N> dir;
    for (int d = 0; d < N; ++d) dir[d] = gauss(rng);
    double len = norm(dir);
    double r = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    if (len == 0.0) continue;
    auto m = g.multi(i);
    typename Grid<N>::Index n;
    for (int d = 0; d < N; ++d) n[d] = m[d] + static_cast<int>(std::lround(dir[d] / len * r / h));
    if (!g.in_bounds(n)) continue;
    std::size_t j = g.linear(n);
    if (j == i || !defined(j)) continue;
    double dist = norm(g.point(j) - g.point(i));
    best = std::max(best, std::abs(f.values[i] - f.values[j]) / std::pow(dist, alpha));
  }
  return best;
}

/// ‖f‖_∞ + holder seminorm.
template <int N>
double lambda_norm(const ScalarField<N>& f, double alpha, long long pair_budget = 20000, std::uint64_t seed = 42) {
  double sup = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.support_flag || f.grid->masked(i)) sup = std::max(sup, std::abs(f.values[i]));
  return sup + holder_seminorm(f, alpha, pair_budget, seed);
}

struct BmoReport {
  double bmo = 0.0;          // small-ball oscillation plus large-ball mean
  double small_balls = 0.0;  // sup over r <= 1 of the mean oscillation (the BMO part)
  double large_balls = 0.0;  // sup over r > 1 of the mean of |f|
};

/// Ball averages on a lattice of centres: oscillation on dyadic radii r <= 1 and
/// mean |f| on radii {1 + h, 2, 4}. Nodes outside the box count as zero when the
/// field is asserted zero off the mask; otherwise they are left out.
template <int N>
BmoReport bmo_norm(const ScalarField<N>& f, long long ball_budget = 400, int threads = 0) {
  const Grid<N>& g = *f.grid;
  const double h = g.h();
  auto defined = [&](std::size_t i) { return f.support_flag || g.masked(i); };
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (defined(i)) pool.push_back(i);
  BmoReport rep;
  if (pool.empty()) return rep;
  int stride = 1;
  while (static_cast<long long>(pool.size()) / static_cast<long long>(std::pow(stride, N)) > ball_budget) ++stride;
  std::vector<std::size_t> centers;
  for (std::size_t i : pool) {
    auto m = g.multi(i);
    bool keep = true;
    for (int d = 0; d < N; ++d) keep = keep && (m[d] % stride == 0);
    if (keep) centers.push_back(i);
  }
  std::vector<double> small_radii;
  for (double r = 1.0; r >= 2.0 * h; r *= 0.5) small_radii.push_back(r);
  const std::vector<double> large_radii{1.0 + h, 2.0, 4.0};

  auto ball_values = [&](std::size_t c, double r, std::vector<double>& vals) {
    vals.clear();
    auto m = g.multi(c);
    int reach = static_cast<int>(std::floor(r / h));
    std::array<int, N> o{};
    std::function<void(int, double)> rec = [&](int d, double r2) {
      if (r2 > r * r / (h * h) + 1e-9) return;
      if (d == N) {
        typename Grid<N>::Index n;
        for (int a = 0; a < N; ++a) n[a] = m[a] + o[a];
        if (g.in_bounds(n)) {
          std::size_t j = g.linear(n);
          if (defined(j)) vals.push_back(f.values[j]);
        } else if (f.support_flag) {
          vals.push_back(0.0);
        }
        return;
      }
      for (int v = -reach; v <= reach; ++v) {
        o[d] = v;
        rec(d + 1, r2 + static_cast<double>(v) * v);
      }
    };
    rec(0, 0.0);
  };

  std::vector<double> small(centers.size(), 0.0), large(centers.size(), 0.0);
  parallel_for(centers.size(), threads, [&](std::size_t k) {
    std::vector<double> vals;
    for (double r : small_radii) {
      ball_values(centers[k], r, vals);
      if (vals.empty()) continue;
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= vals.size();
      double osc = 0.0;
      for (double v : vals) osc += std::abs(v - mean);
      small[k] = std::max(small[k], osc / vals.size());
    }
    for (double r : large_radii) {
      ball_values(centers[k], r, vals);
      if (vals.empty()) continue;
      double mean = 0.0;
      for (double v : vals) mean += std::abs(v);
      large[k] = std::max(large[k], mean / vals.size());
    }
  });
  for (std::size_t k = 0; k < centers.size(); ++k) {
    rep.small_balls = std::max(rep.small_balls, small[k]);
    rep.large_balls = std::max(rep.large_balls, large[k]);
  }
  rep.bmo = rep.small_balls + rep.large_balls;
  return rep;
}

}  // namespace bogovskii
