#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bogovskii/bogovskii.hpp"

using namespace bogovskii;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

const StarDomain<2> kDisk(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.0, 0.0}}, 0.4});
const auto kMol = make_bump<2>(Vec<2>{{0.0, 0.0}}, 0.4);
const Cutoff<2> kChi = Cutoff<2>::for_domain(kDisk);

// Radii start at 0.2: below that the centered-difference oracle's own O(h^2) error on the
// bump exceeds the tolerance at h = 0.005 regardless of the solver.
std::vector<DipoleSpec<2>> five_dipoles() { return dipole_family<2>(Ball<2>{{{0.0, 0.0}}, 1.0}, 5, 0.2, 0.3, 42); }

struct DipoleRun {
  double residual = 0.0;       // max |div u - f| / max |f| over the check nodes
  double decomposition = 0.0;  // max |T f + ω f - D_h u| / max |D_h u|
};

// Checks sit on a 0.02 lattice at depth >= 0.02 so both spacings see the same points.
DipoleRun run_dipole(const DipoleSpec<2>& spec, double h, bool with_decomposition) {
  auto grid = make_grid(kDisk, h);
  auto f = dipole(grid, spec.plus, spec.minus, spec.radius);
  auto checks = lattice_subset(*grid, interior_nodes(*grid, kDisk, 0.02), static_cast<int>(std::lround(0.02 / h)));
  SolverOptions uopts;
  uopts.output_nodes = stencil_closure(*grid, checks);
  auto u = bogovskii_apply(f, kDisk, kMol, uopts);
  auto div = centered_divergence(u, checks);
  DipoleRun out;
  for (std::size_t k = 0; k < checks.size(); ++k)
    out.residual = std::max(out.residual, std::abs(div[k] - f.values[checks[k]]));
  out.residual /= max_abs(f);
  if (!with_decomposition) return out;
  SolverOptions dopts;
  dopts.output_nodes = checks;
  auto grad = gradient_decomposition(f, kDisk, kMol, kChi, dopts);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i : checks) {
    Mat<2> g;
    for (int d = 0; d < 2; ++d) {
      Vec<2> v;
      bool centered = false;
      fd_derivative(u, i, d, v, centered);
      g(0, d) = v[0];
      g(1, d) = v[1];
    }
    for (int k = 0; k < 4; ++k) {
      worst = std::max(worst, std::abs(g.a[k] - grad.values[i].a[k]));
      scale = std::max(scale, std::abs(g.a[k]));
    }
  }
  out.decomposition = worst / scale;
  return out;
}

std::vector<DipoleRun> fine_runs;

Outcome divergence_identity() {
  double worst_fine = 0.0, worst_coarse = 0.0;
  bool decreasing = true;
  for (const auto& spec : five_dipoles()) {
    auto coarse = run_dipole(spec, 0.01, false);
    auto fine = run_dipole(spec, 0.005, true);
    fine_runs.push_back(fine);
    worst_fine = std::max(worst_fine, fine.residual);
    worst_coarse = std::max(worst_coarse, coarse.residual);
    decreasing = decreasing && fine.residual < coarse.residual;
  }
  return {worst_fine <= 5e-3 && decreasing, "max |div u - f|/max|f| = " + sci(worst_fine) + " at h=0.005 (" +
                                                sci(worst_coarse) + " at h=0.01), limit 5e-3, decreasing on every input: " +
                                                (decreasing ? "yes" : "no")};
}

Outcome decomposition_identity() {
  double worst = 0.0;
  for (const auto& r : fine_runs) worst = std::max(worst, r.decomposition);
  return {!fine_runs.empty() && worst <= 1e-2,
          "max |Tf + wf - D_h u| / max|D_h u| = " + sci(worst) + " at h=0.005, limit 1e-2"};
}

Outcome kernel_cancellation() {
  auto rep = cancellation_certificate<2>(kDisk, kChi, kMol, 50, KernelConfig::precise(), 42);
  return {rep.points == 50 && rep.max_defect <= 1e-8,
          "max |sphere integral|/(1+max|K1|) = " + sci(rep.max_defect) + " over 50 points, limit 1e-8"};
}

Outcome homogeneity() {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, 1.0);
  auto ys = random_points<2>(kDisk, 100, 42);
  double worst = 0.0;
  for (const auto& y : ys) {
    Vec<2> z{{g(rng), g(rng)}};
    Mat<2> k = eval_K1(y, z, kChi, kMol, KernelConfig{});
    for (double lambda : {0.5, 2.0, 10.0}) {
      Mat<2> kl = eval_K1(y, lambda * z, kChi, kMol, KernelConfig{}) * (lambda * lambda);
      worst = std::max(worst, frobenius(kl - k) / frobenius(k));
    }
  }
  return {worst <= 1e-10, "max relative defect of lambda^n K1(y, lambda z) = " + sci(worst) + ", limit 1e-10"};
}

Outcome kernel_bounds() {
  auto a = kernel_bounds_report(kDisk, kChi, kMol, 10000, KernelConfig{}, 42);
  auto b = kernel_bounds_report(kDisk, kChi, kMol, 20000, KernelConfig{}, 42);
  double size_change = std::abs(b.c_size / a.c_size - 1.0);
  double smooth_change = std::abs(b.c_smooth / a.c_smooth - 1.0);
  bool finite = std::isfinite(a.c_size) && std::isfinite(a.c_smooth) && std::isfinite(b.c_size) &&
                std::isfinite(b.c_smooth) && a.nonfinite == 0 && b.nonfinite == 0;
  bool support = a.nonzero_beyond_support == 0 && b.nonzero_beyond_support == 0;
  return {finite && support && size_change <= 0.2 && smooth_change <= 0.2,
          "size " + sci(a.c_size) + " -> " + sci(b.c_size) + ", smoothness " + sci(a.c_smooth) + " -> " +
              sci(b.c_smooth) + " (limit +-20%), nonzero beyond d: " +
              std::to_string(a.nonzero_beyond_support + b.nonzero_beyond_support)};
}

Outcome splitting() {
  auto psi = derivative_of_bump(kMol, 0, 1);
  const KernelConfig fine{32, 8, 192, 1e-5};
  auto pairs_x = random_points<2>(kDisk, 1000, 42);
  auto pairs_y = random_points<2>(kDisk, 1000, 43);
  double worst = 0.0;
  for (std::size_t s = 0; s < pairs_x.size(); ++s) {
    auto k = eval_H_kernels(psi, pairs_x[s], pairs_y[s], kChi, fine);
    double sum = 0.0;
    for (double v : k.Kj) sum += v;
    worst = std::max(worst, std::abs(k.H - k.H1 - k.H2) / (std::abs(k.H1) + std::abs(k.H2) + 1e-300));
    worst = std::max(worst, std::abs(k.K - sum) / (std::abs(k.K) + 1e-300));
  }
  // along y = x - ρ e, ρ in [0.05, 0.5], with the ray from x meeting the bump support only
  // beyond ρ = 0.5 and off the axis where this ψ vanishes: |K_j| ~ ρ^{j-n}
  Vec<2> x{{0.95, 0.2}};
  Vec<2> e = Vec<2>{{0.0, 0.1}} - x;
  e = e / norm(e);
  double slope_error = 0.0;
  std::string slopes;
  for (int j = 0; j < 2; ++j) {
    std::vector<double> lx, ly;
    for (int s = 0; s <= 20; ++s) {
      double rho = 0.05 * std::pow(10.0, s / 20.0);
      auto k = eval_H_kernels(psi, x, x - rho * e, kChi, KernelConfig{});
      lx.push_back(std::log(rho));
      ly.push_back(std::log(std::abs(k.Kj[j])));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t s = 0; s < lx.size(); ++s) {
      mx += lx[s] / lx.size();
      my += ly[s] / ly.size();
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t s = 0; s < lx.size(); ++s) {
      sxy += (lx[s] - mx) * (ly[s] - my);
      sxx += (lx[s] - mx) * (lx[s] - mx);
    }
    double decay = -sxy / sxx;
    double gap = std::abs(decay - (2 - j));
    slope_error = std::isfinite(gap) ? std::max(slope_error, gap) : std::numeric_limits<double>::infinity();
    slopes += (j ? ", " : "") + std::string("K") + std::to_string(j) + " " + sci(decay);
  }
  return {worst <= 1e-8 && slope_error <= 0.15, "max relative splitting defect " + sci(worst) +
                                                    " (limit 1e-8), decay exponents " + slopes +
                                                    " (expected n-j within 0.15)"};
}

Outcome lp_stability() {
  auto grid = make_grid(kDisk, 0.02);
  auto family = dipole_family<2>(Ball<2>{{{0.0, 0.0}}, 1.0}, 20, 0.05, 0.4, 42);
  auto reports = lp_ratio_sweep(grid, kDisk, kMol, kChi, family, {1.5, 2.0, 3.0});
  bool ok = true;
  std::string detail;
  for (const auto& r : reports) {
    ok = ok && r.all_finite() && r.counted() == 20 && r.spread() <= 50.0;
    detail += (detail.empty() ? "" : ", ") + std::string("p=") + r.parameters.at("p") + " spread " + sci(r.spread());
  }
  return {ok, detail + " (20 dipoles, h=0.02, limit 50)"};
}

Outcome hp_stability() {
  auto cfg = MaximalConfig<2>::standard();
  const double h = 0.01;
  auto grid = make_grid(kDisk, h, cfg.phi.radius() + 2.0 * h);
  auto reports = hp_atom_sweep(grid, kDisk, kMol, kChi, Vec<2>{{0.2, 0.1}}, {0.05, 0.1, 0.2, 0.4}, {0.8, 1.0}, cfg);
  bool ok = true;
  std::string detail;
  for (const auto& r : reports) {
    ok = ok && r.all_finite() && r.counted() == 4 && r.spread() <= 50.0;
    detail += (detail.empty() ? "" : ", ") + std::string("p=") + r.parameters.at("p") + " spread " + sci(r.spread());
  }
  return {ok, detail + " (4 atom scales, h=0.01, limit 50)"};
}

Outcome holder_stability() {
  auto grid = make_grid(kDisk, 0.02, 0.1);
  auto bumps = holder_bump_family<2>(Ball<2>{{{0.0, 0.0}}, 1.0}, 10, 0.15, 0.35, 42);
  bool ok = true;
  std::string detail;
  for (double alpha : {0.3, 0.5, 0.7}) {
    auto s = holder_ratio_sweep(grid, kDisk, kMol, kChi, bumps, alpha);
    for (const auto* r : {&s.lambda, &s.bmo}) {
      ok = ok && r->all_finite() && r->counted() == 10 && r->spread() <= 50.0;
      detail += (detail.empty() ? "" : ", ") + r->name + "(" + r->parameters.at("alpha") + ") " + sci(r->spread());
    }
  }
  return {ok, "spreads " + detail + " (10 bumps, h=0.02, limit 50)"};
}

Outcome korn_representation_check() {
  const double h = 0.005;
  auto grid = make_grid(kDisk, h, 2.0 * h);
  SolverOptions opts;
  opts.output_nodes = lattice_subset(*grid, interior_nodes(*grid, kDisk, 0.1), 16);
  double worst = 0.0;
  for (const auto& uf : analytic_family<2>(5, 0)) {
    auto u = VectorField<2>::sample_all(grid, [&](const Vec<2>& x) { return uf.value(x); });
    auto R = korn_representation(u, kDisk, kMol, kChi, opts);
    Mat<2> mean = mean_gradient_by_parts(uf, kMol);
    double err = 0.0, scale = 0.0;
    for (std::size_t i : opts.output_nodes) {
      Mat<2> J = uf.jacobian(grid->point(i));
      Mat<2> d = R.values[i] - (J - mean);
      for (int k = 0; k < 4; ++k) {
        err = std::max(err, std::abs(d.a[k]));
        scale = std::max(scale, std::abs(J.a[k]));
      }
    }
    worst = std::max(worst, err / scale);
  }
  double algebraic = 0.0;
  auto points = random_points<2>(kDisk, 100, 42);
  for (const auto& uf : analytic_family<2>(10, 10))
    algebraic = std::max(algebraic, second_derivative_identity_check(uf, points));
  return {worst <= 1e-2 && algebraic <= 1e-12,
          "reconstruction defect " + sci(worst) + " of max|grad u| (limit 1e-2, h=0.005, " +
              std::to_string(opts.output_nodes.size()) + " nodes), strain identity " + sci(algebraic) +
              " (limit 1e-12)"};
}

Outcome korn_ratio() {
  auto family = analytic_family<2>(10, 10, 42);
  Mat<2> w;
  w(0, 1) = 1.0;
  w(1, 0) = -1.0;
  family.push_back(rigid_motion<2>(Vec<2>{{0.5, 0.0}}, w));
  auto r = korn_ratio_sweep(family, 1.0, kChi, MaximalConfig<2>::standard(), 0.02);
  const auto& rigid = r.rows.back();
  bool rigid_ok = !rigid.skipped && std::isfinite(rigid.ratio);
  return {r.all_finite() && rigid_ok && r.spread() <= 50.0,
          "spread " + sci(r.spread()) + " over " + std::to_string(r.counted()) + " fields (limit 50), rigid ratio " +
              sci(rigid.ratio)};
}

Outcome counterexample() {
  auto rep = counterexample_p1({0.2, 0.1, 0.05, 0.025, 0.0125});
  std::string ratios;
  for (const auto& row : rep.rows) ratios += (ratios.empty() ? "" : " ") + sci(row.ratio);
  return {rep.increasing && rep.min_increment_fraction >= 0.8 && rep.psi_sup <= kPi / 2.0 + 1e-6,
          "ratios " + ratios + ", min increment fraction " + sci(rep.min_increment_fraction) + " (limit 0.8), sup|psi| " +
              sci(rep.psi_sup)};
}

Outcome lipschitz_solve() {
  auto cfg = load_json_file(std::string(BOGOVSKII_CONFIG_DIR) + "/lshape.json");
  auto dom = parse_lipschitz_domain<2>(cfg);
  auto grid = make_grid(dom, 0.01);
  auto f = dipole(grid, Vec<2>{{1.6, 0.5}}, Vec<2>{{0.5, 1.6}}, 0.25);
  auto parts = split_zero_mean(f, dom);
  double l1 = integrate_abs(f);
  double split = 0.0, means = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    double sum = 0.0;
    for (const auto& p : parts) sum += p.values[i];
    split = std::max(split, std::abs(sum - f.values[i]));
  }
  split /= max_abs(f);
  for (const auto& p : parts) means = std::max(means, std::abs(integrate(p)) / l1);
  auto res = solve_lipschitz(f, dom);
  double rel = res.diagnostics.max_residual / res.diagnostics.max_abs_f;
  return {rel <= 1e-2 && split <= 1e-12 && means <= 1e-9,
          "residual " + sci(rel) + " of max|f| (limit 1e-2, h=0.01), partition defect " + sci(split) +
              " (limit 1e-12), piece means " + sci(means) + " of |f|_1 (limit 1e-9)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const std::string cli = BOGOVSKII_CLI_PATH;
  const std::string disk = std::string(BOGOVSKII_CONFIG_DIR) + "/disk.json";
  fs::path root = fs::temp_directory_path() / "bogovskii_determinism";
  fs::remove_all(root);
  std::vector<std::string> runs = {
      "solve --domain " + disk + " --h 0.02 --stride 2",
      "korn --domain " + disk + " --h 0.04 --family trig:3,cubic:2",
  };
  std::size_t compared = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    fs::path dirs[2] = {root / ("run" + std::to_string(r) + "_t1"), root / ("run" + std::to_string(r) + "_t4")};
    const char* threads[2] = {"1", "4"};
    for (int k = 0; k < 2; ++k) {
      std::string cmd = "BOGOVSKII_THREADS=" + std::string(threads[k]) + " \"" + cli + "\" " + runs[r] + " --out \"" +
                        dirs[k].string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      if (slurp(entry.path()) != slurp(dirs[1] / entry.path().filename()))
        return {false, entry.path().filename().string() + " differs between 1 and 4 threads"};
      ++compared;
    }
  }
  fs::remove_all(root);
  return {compared >= 4, std::to_string(compared) + " CSV files byte-identical between 1 and 4 threads"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"divergence identity", divergence_identity},
      {"decomposition identity", decomposition_identity},
      {"kernel cancellation", kernel_cancellation},
      {"homogeneity", homogeneity},
      {"kernel bounds", kernel_bounds},
      {"splitting exactness", splitting},
      {"Lp stability", lp_stability},
      {"hp stability", hp_stability},
      {"Holder stability", holder_stability},
      {"Korn representation", korn_representation_check},
      {"Korn ratio", korn_ratio},
      {"p = 1 failure", counterexample},
      {"Lipschitz-domain solve", lipschitz_solve},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += o.pass ? 0 : 1;
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %2zu %-24s", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name);
    std::cout << head << " " << o.detail << " [" << static_cast<int>(secs) << "s]" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
