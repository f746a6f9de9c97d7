#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bogovskii/bogovskii.hpp"

namespace fs = std::filesystem;
using namespace bogovskii;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitAssertion = 2;

struct Options {
  std::string command;
  std::string domain;
  std::string input = "dipole";
  std::string out = "results";
  std::string norm = "hp";
  std::string family = "trig:10,cubic:10";
  std::string kind = "lp";
  double h = 0.02;
  double p = 1.0;
  double alpha = 0.5;
  double max_residual = -1.0;
  double max_spread = 50.0;
  std::vector<double> p_list{1.5, 2.0, 3.0};
  std::vector<double> alpha_list{0.3, 0.5, 0.7};
  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025, 0.0125};
  int stride = 1;
  int threads = 0;
  int members = 20;
  int points = 50;
  long long samples = 10000;
  std::uint64_t seed = 42;
  bool subtract_mean = false;
  bool rigid = true;
};

/// Where a run writes: a directory, or a single named file plus its directory.
struct Destination {
  fs::path dir;
  fs::path file;

  static Destination make(const std::string& out, const std::string& default_name) {
    fs::path p(out);
    Destination d;
    auto ext = p.extension().string();
    if (ext == ".csv" || ext == ".json") {
      d.dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
      d.file = p;
    } else {
      d.dir = p;
      d.file = p / default_name;
    }
    std::error_code ec;
    fs::create_directories(d.dir, ec);
    if (ec || !fs::is_directory(d.dir)) throw Error(ErrorCode::InvalidArgument, "--out: cannot create " + d.dir.string());
    return d;
  }
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "--out: cannot write " + path.string());
  return out;
}

/// Run record shared by every subcommand.
struct Run {
  const Options& opts;
  json config;
  json tolerances = json::object();
  json checks = json::object();
  std::vector<std::string> outputs;
  bool passed = true;

  void check(const std::string& name, bool ok) {
    checks[name] = ok;
    passed = passed && ok;
  }

  void write_manifest(const fs::path& dir) const {
    json m;
    m["command"] = opts.command;
    m["version"] = kVersion;
    m["config"] = config;
    m["config_hash"] = config_hash(config);
    m["tolerances"] = tolerances;
    m["checks"] = checks;
    m["status"] = passed ? "pass" : "fail";
    m["outputs"] = outputs;
    m["threads"] = opts.threads > 0 ? opts.threads : default_threads();
    auto out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
  }
};

json base_config(const Options& o) {
  json c;
  c["command"] = o.command;
  c["seed"] = o.seed;
  if (!o.domain.empty()) c["domain"] = load_json_file(o.domain);
  return c;
}

SolverOptions solver_options(const Options& o) {
  SolverOptions s;
  s.threads = o.threads;
  s.subtract_mean = o.subtract_mean;
  return s;
}

json require_domain(const Options& o) {
  if (o.domain.empty()) throw Error(ErrorCode::InvalidArgument, "--domain: required");
  return load_json_file(o.domain);
}

template <int N, class Domain>
int solve_with(const Options& o, Run& run, const Domain& dom, const std::shared_ptr<const Grid<N>>& grid,
               const std::function<VectorField<N>(const ScalarField<N>&, const SolverOptions&)>& apply) {
  auto dest = Destination::make(o.out, "u.csv");
  auto f = make_input(grid, o.input);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.values[i] != 0.0 && !dom.contains(grid->point(i))) f.values[i] = 0.0;

  SolverOptions sopts = solver_options(o);
  auto checks = interior_nodes(*grid, dom, 2.0 * grid->h());
  if (o.stride > 1) {
    checks = lattice_subset(*grid, checks, o.stride);
    sopts.output_nodes = stencil_closure(*grid, checks);
  }
  VectorField<N> u = apply(f, sopts);
  auto div = centered_divergence(u, checks);
  auto fd = fd_gradient(u);

  const double fmax = max_abs(f);
  double worst = 0.0;
  auto out_u = open_out(dest.dir / "u.csv");
  auto u_nodes = target_nodes(*grid, dom, sopts);
  std::vector<std::string> comps;
  for (int k = 0; k < N; ++k) comps.push_back("u" + std::to_string(k));
  write_field_csv(out_u, u, comps, u_nodes);

  std::vector<std::string> gnames;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) gnames.push_back("du" + std::to_string(a) + "_dx" + std::to_string(b));
  auto out_g = open_out(dest.dir / "grad_u.csv");
  write_field_csv(out_g, fd.gradient, gnames, checks);

  auto out_r = open_out(dest.dir / "residual.csv");
  std::vector<std::string> header;
  const char* axes[] = {"x", "y", "z"};
  for (int d = 0; d < N; ++d) header.push_back(axes[d]);
  header.insert(header.end(), {"f", "div_u", "residual"});
  CsvWriter w(out_r, header);
  for (std::size_t k = 0; k < checks.size(); ++k) {
    std::size_t i = checks[k];
    Vec<N> x = grid->point(i);
    std::vector<double> row(x.v.begin(), x.v.end());
    double r = div[k] - f.values[i];
    worst = std::max(worst, std::abs(r));
    row.insert(row.end(), {f.values[i], div[k], r});
    w.row(row);
  }

  json diag;
  diag["mean_of_f"] = integrate(f);
  diag["max_abs_f"] = fmax;
  diag["max_residual"] = worst;
  diag["relative_residual"] = fmax > 0.0 ? worst / fmax : 0.0;
  diag["check_nodes"] = checks.size();
  json ratios = json::object();
  for (double p : o.p_list) {
    double gp = 0.0, fp = 0.0;
    for (std::size_t i : checks) {
      gp += std::pow(frobenius(fd.gradient.values[i]), p);
      fp += std::pow(std::abs(f.values[i]), p);
    }
    ratios[short_number(p)] = fp > 0.0 ? std::pow(gp / fp, 1.0 / p) : 0.0;
  }
  diag["lp_ratio_grad_u_over_f"] = ratios;
  auto out_d = open_out(dest.dir / "diagnostics.json");
  out_d << diag.dump(2) << '\n';

  run.outputs = {"u.csv", "grad_u.csv", "residual.csv", "diagnostics.json"};
  run.tolerances["max_relative_residual"] = o.max_residual;
  if (o.max_residual >= 0.0) run.check("relative_residual", fmax == 0.0 || worst <= o.max_residual * fmax);
  run.write_manifest(dest.dir);
  return run.passed ? kExitOk : kExitAssertion;
}

template <int N>
int cmd_solve(const Options& o, Run& run, const json& cfg) {
  if (config_is_lipschitz(cfg)) {
    auto dom = parse_lipschitz_domain<N>(cfg);
    auto grid = make_grid(dom, o.h);
    return solve_with<N>(o, run, dom, grid, [&](const ScalarField<N>& f, const SolverOptions& s) {
      auto parts = split_zero_mean(f, dom, s.mean_tolerance);
      VectorField<N> u(f.grid, true);
      for (std::size_t k = 0; k < dom.piece_count(); ++k) {
        const auto& piece = dom.piece(k);
        SolverOptions ps = s;
        ps.subtract_mean = false;
        ps.mean_tolerance = std::max(s.mean_tolerance, 1e-9);
        u += bogovskii_apply(parts[k], piece, make_bump<N>(piece.ball().center, piece.ball().radius), ps);
      }
      return u;
    });
  }
  auto dom = parse_star_domain<N>(cfg);
  auto mol = parse_mollifier<N>(cfg, dom);
  auto grid = make_grid(dom, o.h);
  return solve_with<N>(o, run, dom, grid, [&](const ScalarField<N>& f, const SolverOptions& s) {
    return bogovskii_apply(f, dom, mol, s);
  });
}

template <int N>
int cmd_kernel_check(const Options& o, Run& run, const json& cfg) {
  auto dest = Destination::make(o.out, "kernel_check.json");
  auto dom = parse_star_domain<N>(cfg);
  auto mol = parse_mollifier<N>(cfg, dom);
  auto chi = Cutoff<N>::for_domain(dom);
  const auto kcfg = KernelConfig::precise();
  auto bounds = kernel_bounds_report(dom, chi, mol, o.samples, kcfg, o.seed);
  auto cancel = cancellation_certificate<N>(dom, chi, mol, static_cast<std::size_t>(o.points), kcfg, o.seed);
  json j;
  j["kernel"] = "N";
  j["n"] = N;
  j["samples"] = bounds.samples;
  j["C_size"] = bounds.c_size;
  j["C_smooth"] = bounds.c_smooth;
  j["C_size_sampled"] = bounds.c_size_sampled;
  j["C_smooth_sampled"] = bounds.c_smooth_sampled;
  j["nonfinite"] = bounds.nonfinite;
  j["nonzero_beyond_support"] = bounds.nonzero_beyond_support;
  j["support_diameter"] = bounds.support_diameter;
  j["cancellation_points"] = cancel.points;
  j["max_cancellation_defect"] = cancel.max_defect;
  auto out = open_out(dest.file);
  out << j.dump(2) << '\n';
  run.outputs = {dest.file.filename().string()};
  run.tolerances["max_cancellation_defect"] = 1e-8;
  run.check("cancellation", cancel.max_defect <= 1e-8);
  run.check("finite", bounds.nonfinite == 0);
  run.check("support", bounds.nonzero_beyond_support == 0);
  run.write_manifest(dest.dir);
  return run.passed ? kExitOk : kExitAssertion;
}

template <int N>
int cmd_norms(const Options& o, Run& run, const json& cfg) {
  auto dest = Destination::make(o.out, "report.json");
  auto dom = parse_star_domain<N>(cfg);
  auto mcfg = MaximalConfig<N>::standard();
  const bool hp = o.norm == "hp";
  auto grid = make_grid(dom, o.h, hp ? mcfg.phi.radius() + 2.0 * o.h : 0.0);
  auto f = make_input(grid, o.input);
  NormReport rep;
  rep.h = o.h;
  rep.nodes = grid->masked_nodes().size();
  if (o.norm == "lp") {
    rep.kind = NormKind::Lp;
    rep.parameter = o.p;
    rep.value = lp_norm(f, o.p);
  } else if (hp) {
    rep = hp_quasinorm(f, o.p, mcfg, o.threads);
  } else if (o.norm == "holder") {
    rep.kind = NormKind::Holder;
    rep.parameter = o.alpha;
    rep.value = holder_seminorm(f, o.alpha, 20000, o.seed);
  } else if (o.norm == "lambda") {
    rep.kind = NormKind::Lambda;
    rep.parameter = o.alpha;
    rep.value = lambda_norm(f, o.alpha, 20000, o.seed);
  } else if (o.norm == "bmo" || o.norm == "BMO") {
    auto b = bmo_norm(f, 400, o.threads);
    rep.kind = o.norm == "bmo" ? NormKind::Bmo : NormKind::BMO;
    rep.value = o.norm == "bmo" ? b.bmo : b.small_balls;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--norm: unknown norm '" + o.norm + "'");
  }
  json j;
  j["norm"] = to_string(rep.kind);
  j["parameter"] = rep.parameter;
  j["value"] = rep.value;
  j["h"] = rep.h;
  j["nodes"] = rep.nodes;
  j["warnings"] = rep.warnings;
  j["phi_radius"] = mcfg.phi.radius();
  j["t_levels"] = mcfg.t_levels;
  auto out = open_out(dest.file);
  out << j.dump(2) << '\n';
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  run.outputs = {dest.file.filename().string()};
  run.check("finite", std::isfinite(rep.value) && rep.value >= 0.0);
  run.write_manifest(dest.dir);
  return run.passed ? kExitOk : kExitAssertion;
}

template <int N>
SweepReport korn_sweep(const Options& o, const json& cfg) {
  if (config_is_lipschitz(cfg)) throw Error(ErrorCode::InvalidArgument, "--domain: korn needs a star-shaped domain");
  auto dom = parse_star_domain<N>(cfg);
  auto chi = Cutoff<N>::for_domain(dom);
  auto family = make_family<N>(o.family, o.seed);
  if (o.rigid) {
    Mat<N> w;
    w(0, 1) = 1.0;
    w(1, 0) = -1.0;
    Vec<N> shift;
    shift[0] = 0.5;
    family.push_back(rigid_motion<N>(shift, w));
  }
  return korn_ratio_sweep(family, o.p, chi, MaximalConfig<N>::standard(), o.h, o.threads);
}

template <int N>
int cmd_korn(const Options& o, Run& run, const json& cfg) {
  auto dest = Destination::make(o.out, "korn.csv");
  auto rep = korn_sweep<N>(o, cfg);
  auto out = open_out(dest.file);
  write_csv(out, rep);
  run.outputs = {dest.file.filename().string()};
  run.config["summary"] = to_json(rep);
  run.tolerances["max_spread"] = o.max_spread;
  run.check("finite", rep.all_finite());
  run.check("spread", rep.spread() <= o.max_spread);
  run.write_manifest(dest.dir);
  return run.passed ? kExitOk : kExitAssertion;
}

int cmd_counterexample(const Options& o, Run& run) {
  auto dest = Destination::make(o.out, "counterexample.csv");
  auto rep = counterexample_p1(o.deltas);
  auto out = open_out(dest.file);
  write_csv(out, rep);
  run.outputs = {dest.file.filename().string()};
  run.tolerances["min_increment_fraction"] = 0.8;
  run.tolerances["psi_sup"] = kPi / 2.0 + 1e-6;
  run.check("increasing", rep.increasing);
  run.check("growth", rep.min_increment_fraction >= 0.8);
  run.check("psi_bounded", rep.psi_sup <= kPi / 2.0 + 1e-6);
  run.write_manifest(dest.dir);
  return run.passed ? kExitOk : kExitAssertion;
}

template <int N>
int cmd_sweep(const Options& o, Run& run, const json& cfg) {
  auto dest = Destination::make(o.out, "summary.json");
  std::vector<SweepReport> reports;
  if (o.kind == "korn") {
    reports.push_back(korn_sweep<N>(o, cfg));
  } else {
    if (config_is_lipschitz(cfg)) throw Error(ErrorCode::InvalidArgument, "--domain: sweeps need a star-shaped domain");
    auto dom = parse_star_domain<N>(cfg);
    auto mol = parse_mollifier<N>(cfg, dom);
    auto chi = Cutoff<N>::for_domain(dom);
    auto sopts = solver_options(o);
    const Ball<N> region{dom.ball().center, dom.depth(dom.ball().center)};
    if (o.kind == "lp") {
      auto grid = make_grid(dom, o.h);
      auto family = dipole_family<N>(region, o.members, 0.05, 0.4, o.seed);
      reports = lp_ratio_sweep(grid, dom, mol, chi, family, o.p_list, sopts);
    } else if (o.kind == "hp") {
      auto mcfg = MaximalConfig<N>::standard();
      auto grid = make_grid(dom, o.h, mcfg.phi.radius() + 2.0 * o.h);
      Vec<N> c = nearest_node(*grid, dom.ball().center);
      double reach = dom.depth(c);
      std::vector<double> radii;
      for (double r : {0.05, 0.1, 0.2, 0.4})
        if (r < reach) radii.push_back(r);
      reports = hp_atom_sweep(grid, dom, mol, chi, c, radii, o.p_list, mcfg, sopts);
    } else if (o.kind == "holder") {
      auto grid = make_grid(dom, o.h, 0.1);
      auto bumps = holder_bump_family<N>(region, std::min(o.members, 10), 0.15, 0.35, o.seed);
      for (double a : o.alpha_list) {
        auto s = holder_ratio_sweep(grid, dom, mol, chi, bumps, a, sopts);
        reports.push_back(s.lambda);
        reports.push_back(s.bmo);
      }
    } else {
      throw Error(ErrorCode::InvalidArgument, "--kind: unknown sweep '" + o.kind + "'");
    }
  }
  json summary = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    std::string name = "sweep_" + r.name;
    for (const auto& [k, v] : r.parameters)
      if (k == "p" || k == "alpha") name += "_" + k + v;
    name += ".csv";
    auto out = open_out(dest.dir / name);
    write_csv(out, r);
    run.outputs.push_back(name);
    summary.push_back(to_json(r));
    ok = ok && r.all_finite() && r.spread() <= o.max_spread;
  }
  auto out = open_out(dest.file);
  out << summary.dump(2) << '\n';
  run.outputs.push_back(dest.file.filename().string());
  run.tolerances["max_spread"] = o.max_spread;
  run.check("spread", ok);
  run.write_manifest(dest.dir);
  return run.passed ? kExitOk : kExitAssertion;
}

template <int N>
int dispatch(const Options& o, Run& run, const json& cfg) {
  if (o.command == "solve") return cmd_solve<N>(o, run, cfg);
  if (o.command == "kernel-check") return cmd_kernel_check<N>(o, run, cfg);
  if (o.command == "norms") return cmd_norms<N>(o, run, cfg);
  if (o.command == "korn") return cmd_korn<N>(o, run, cfg);
  return cmd_sweep<N>(o, run, cfg);
}

int run_command(Options& o) {
  if (const char* env = std::getenv("BOGOVSKII_THREADS"); env && std::atoi(env) > 0) o.threads = std::atoi(env);
  if (!(o.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "--h: must be positive");
  Run run{o, base_config(o), json::object(), json::object(), {}, true};
  const std::string& c = o.command;
  if (c == "counterexample") {
    run.config["deltas"] = o.deltas;
    return cmd_counterexample(o, run);
  }
  run.config["h"] = o.h;
  if (c == "solve" || c == "norms") run.config["input"] = o.input;
  if (c == "solve") {
    run.config["stride"] = o.stride;
    run.config["p_list"] = o.p_list;
    run.config["subtract_mean"] = o.subtract_mean;
  }
  if (c == "norms") {
    run.config["norm"] = o.norm;
    if (o.norm == "holder" || o.norm == "lambda") run.config["alpha"] = o.alpha;
    else run.config["p"] = o.p;
  }
  if (c == "korn" || (c == "sweep" && o.kind == "korn")) {
    run.config["family"] = o.family;
    run.config["p"] = o.p;
    run.config["rigid"] = o.rigid;
  }
  if (c == "sweep") {
    run.config["kind"] = o.kind;
    if (o.kind == "lp" || o.kind == "hp") run.config["p_list"] = o.p_list;
    if (o.kind == "holder") run.config["alpha_list"] = o.alpha_list;
    if (o.kind != "korn") run.config["members"] = o.members;
  }
  if (c == "kernel-check") {
    run.config.erase("h");
    run.config["samples"] = o.samples;
    run.config["points"] = o.points;
  }
  json cfg = require_domain(o);
  return config_dim(cfg) == 3 ? dispatch<3>(o, run, cfg) : dispatch<2>(o, run, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Bogovskii operator toolkit: solve div u = f and verify its estimates"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory (or file for single-artifact commands)");
    sub->add_option("--threads", o.threads, "worker threads (BOGOVSKII_THREADS overrides)");
    sub->add_option("--seed", o.seed, "random seed");
  };

  auto* solve = app.add_subcommand("solve", "apply the operator to an input and report the divergence residual");
  common(solve);
  solve->add_option("--domain", o.domain, "domain config (JSON)");
  solve->add_option("--f", o.input, "catalog input or CSV file");
  solve->add_option("--h", o.h, "grid spacing");
  solve->add_option("--p-list", o.p_list, "exponents for gradient/data L^p ratios")->delimiter(',');
  solve->add_option("--stride", o.stride, "check every stride-th node only")->check(CLI::PositiveNumber);
  solve->add_option("--max-residual", o.max_residual, "fail when residual exceeds this fraction of max|f|");
  solve->add_flag("--subtract-mean", o.subtract_mean, "remove the mean of f before solving");

  auto* kernel = app.add_subcommand("kernel-check", "kernel bound constants and the cancellation certificate");
  common(kernel);
  kernel->add_option("--domain", o.domain, "domain config (JSON)");
  kernel->add_option("--samples", o.samples, "random pairs for the bound constants");
  kernel->add_option("--points", o.points, "random points for the cancellation check");

  auto* norms = app.add_subcommand("norms", "evaluate one norm of a catalog input");
  common(norms);
  norms->add_option("--domain", o.domain, "domain config (JSON)");
  norms->add_option("--f", o.input, "catalog input or CSV file");
  norms->add_option("--norm", o.norm, "lp, hp, holder, lambda, bmo or BMO");
  norms->add_option("--p", o.p, "exponent for lp and hp");
  norms->add_option("--alpha", o.alpha, "exponent for holder and lambda");
  norms->add_option("--h", o.h, "grid spacing");

  auto* korn = app.add_subcommand("korn", "Korn ratio sweep over analytic fields");
  common(korn);
  korn->add_option("--domain", o.domain, "domain config (JSON)");
  korn->add_option("--p", o.p, "hp exponent");
  korn->add_option("--family", o.family, "family, e.g. trig:10,cubic:10");
  korn->add_option("--h", o.h, "grid spacing");
  korn->add_option("--max-spread", o.max_spread, "largest accepted max/min ratio");
  korn->add_flag("--rigid,!--no-rigid", o.rigid, "append a rigid motion to the family");

  auto* counter = app.add_subcommand("counterexample", "ratio growth showing the p = 1 estimate fails");
  common(counter);
  counter->add_option("--deltas", o.deltas, "decreasing bump distances from the boundary")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "norm ratio sweeps over input families");
  common(sweep);
  sweep->add_option("--domain", o.domain, "domain config (JSON)");
  sweep->add_option("--kind", o.kind, "lp, hp, holder or korn");
  sweep->add_option("--h", o.h, "grid spacing");
  auto* sweep_p = sweep->add_option("--p-list", o.p_list, "exponents (default 1.5,2,3; hp: 0.8,1)")->delimiter(',');
  sweep->add_option("--alpha-list", o.alpha_list, "Hölder exponents")->delimiter(',');
  sweep->add_option("--members", o.members, "family size");
  sweep->add_option("--family", o.family, "korn family");
  sweep->add_option("--p", o.p, "korn hp exponent");
  sweep->add_option("--max-spread", o.max_spread, "largest accepted max/min ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  for (auto* sub : app.get_subcommands()) o.command = sub->get_name();
  if (o.command == "sweep" && o.kind == "hp" && sweep_p->count() == 0) o.p_list = {0.8, 1.0};

  try {
    return run_command(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
