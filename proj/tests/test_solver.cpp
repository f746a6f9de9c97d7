#include <gtest/gtest.h>

#include "bogovskii/inputs.hpp"
#include "bogovskii/solver.hpp"

using namespace bogovskii;

namespace {

const StarDomain<2> kDisk(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.0, 0.0}}, 0.4});
const auto kMol = make_bump<2>(Vec<2>{{0.0, 0.0}}, 0.4);

ScalarField<2> test_dipole(const std::shared_ptr<const Grid<2>>& grid) {
  return dipole(grid, Vec<2>{{0.3, 0.0}}, Vec<2>{{-0.3, 0.0}}, 0.2);
}

}  // namespace

TEST(Solver, DivergenceResidualIsSmallAndShrinks) {
  double previous = 0.0;
  for (double h : {0.04, 0.02}) {
    auto grid = make_grid(kDisk, h);
    auto f = test_dipole(grid);
    auto checks = lattice_subset(*grid, interior_nodes(*grid, kDisk, 2.0 * h), static_cast<int>(std::lround(0.08 / h)));
    SolverOptions opts;
    opts.output_nodes = stencil_closure(*grid, checks);
    auto u = bogovskii_apply(f, kDisk, kMol, opts);
    auto div = centered_divergence(u, checks);
    double worst = 0.0;
    for (std::size_t k = 0; k < checks.size(); ++k) worst = std::max(worst, std::abs(div[k] - f.values[checks[k]]));
    double rel = worst / max_abs(f);
    EXPECT_LT(rel, 0.1) << "h = " << h;
    if (previous > 0.0) {
      EXPECT_LT(rel, previous);
    }
    previous = rel;
  }
}

TEST(Solver, SolutionVanishesOnAndOutsideTheBoundary) {
  auto grid = make_grid(kDisk, 0.05, 0.1);
  auto f = test_dipole(grid);
  auto res = solve(f, kDisk, kMol);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    Vec<2> x = grid->point(i);
    if (norm(x) >= 1.0 - 1e-12) {
      EXPECT_EQ(norm(res.u.values[i]), 0.0);
    }
  }
  EXPECT_GT(max_abs(res.u), 0.0);
  EXPECT_EQ(res.diagnostics.mean_of_f, integrate(f));
}

TEST(Solver, RejectsNonzeroMeanUnlessAsked) {
  auto grid = make_grid(kDisk, 0.05);
  auto f = discrete_unit_bump(grid, make_bump<2>(Vec<2>{{0.2, 0.0}}, 0.2));
  try {
    bogovskii_apply(f, kDisk, kMol);
    FAIL() << "expected MeanNotZero";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MeanNotZero);
  }
  SolverOptions opts;
  opts.subtract_mean = true;
  opts.output_nodes = {grid->masked_nodes().front()};
  EXPECT_NO_THROW(bogovskii_apply(f, kDisk, kMol, opts));
}

TEST(Solver, RejectsDensityOutsideTheDomain) {
  auto grid = make_grid(kDisk, 0.05, 0.2);
  auto f = test_dipole(grid);
  for (std::size_t i = 0; i < grid->size(); ++i)
    if (norm(grid->point(i)) > 1.05) {
      f.values[i] = 1.0;
      break;
    }
  try {
    bogovskii_apply(f, kDisk, kMol);
    FAIL() << "expected SupportViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SupportViolation);
  }
}

TEST(Solver, OperatorIsLinear) {
  auto grid = make_grid(kDisk, 0.05);
  auto f = test_dipole(grid);
  auto g = dipole(grid, Vec<2>{{0.0, 0.4}}, Vec<2>{{0.1, -0.5}}, 0.25);
  SolverOptions opts;
  opts.output_nodes = lattice_subset(*grid, grid->masked_nodes(), 3);
  auto uf = bogovskii_apply(f, kDisk, kMol, opts);
  auto ug = bogovskii_apply(g, kDisk, kMol, opts);
  ScalarField<2> combo = f;
  for (std::size_t i = 0; i < combo.size(); ++i) combo.values[i] = 2.0 * f.values[i] - 3.0 * g.values[i];
  auto uc = bogovskii_apply(combo, kDisk, kMol, opts);
  double scale = max_abs(uc);
  for (std::size_t i : opts.output_nodes) {
    Vec<2> expect = 2.0 * uf.values[i] - 3.0 * ug.values[i];
    EXPECT_LE(norm(uc.values[i] - expect), 1e-12 * scale);
  }
}

TEST(Solver, ResultDoesNotDependOnThreadCount) {
  auto grid = make_grid(kDisk, 0.05);
  auto f = test_dipole(grid);
  SolverOptions one, three;
  one.threads = 1;
  three.threads = 3;
  auto a = bogovskii_apply(f, kDisk, kMol, one);
  auto b = bogovskii_apply(f, kDisk, kMol, three);
  EXPECT_EQ(a.values, b.values);
}

TEST(Solver, DecompositionTraceReproducesDensity) {
  auto grid = make_grid(kDisk, 0.02);
  auto f = test_dipole(grid);
  auto chi = Cutoff<2>::for_domain(kDisk);
  SolverOptions opts;
  opts.output_nodes = lattice_subset(*grid, interior_nodes(*grid, kDisk, 0.04), 4);
  auto dec = gradient_decomposition_full(f, kDisk, kMol, chi, opts);
  double worst = 0.0;
  for (std::size_t i : opts.output_nodes) worst = std::max(worst, std::abs(dec.gradient.values[i].trace() - f.values[i]));
  EXPECT_LT(worst / max_abs(f), 1e-2);
}

TEST(Solver, DecompositionMatchesDifferencedSolution) {
  const double h = 0.02;
  auto grid = make_grid(kDisk, h);
  auto f = test_dipole(grid);
  auto chi = Cutoff<2>::for_domain(kDisk);
  auto checks = lattice_subset(*grid, interior_nodes(*grid, kDisk, 2.0 * h), 4);
  SolverOptions uopts;
  uopts.output_nodes = stencil_closure(*grid, checks);
  auto u = bogovskii_apply(f, kDisk, kMol, uopts);
  SolverOptions dopts;
  dopts.output_nodes = checks;
  auto grad = gradient_decomposition(f, kDisk, kMol, chi, dopts);
  auto fd = fd_gradient(u);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i : checks) {
    worst = std::max(worst, frobenius(grad.values[i] - fd.gradient.values[i]));
    scale = std::max(scale, frobenius(fd.gradient.values[i]));
  }
  EXPECT_LT(worst / scale, 5e-2);
}

TEST(Solver, CentredDivergenceIsExactForLinearFields) {
  auto grid = make_grid(kDisk, 0.05);
  auto u = VectorField<2>::sample(grid, [](const Vec<2>& x) { return Vec<2>{{2.0 * x[0] + x[1], -x[0] + 0.5 * x[1]}}; });
  auto nodes = interior_nodes(*grid, kDisk, 0.1);
  for (double d : centered_divergence(u, nodes)) EXPECT_NEAR(d, 2.5, 1e-12);
}

TEST(Solver, LipschitzUnionSolve) {
  std::vector<StarDomain<2>> pieces;
  pieces.emplace_back(Box<2>{{{0.0, 0.0}}, {{2.0, 1.0}}}, Ball<2>{{{1.0, 0.5}}, 0.4});
  pieces.emplace_back(Box<2>{{{0.0, 0.0}}, {{1.0, 2.0}}}, Ball<2>{{{0.5, 1.0}}, 0.4});
  LipschitzDomain<2> dom(std::move(pieces), {make_bump<2>(Vec<2>{{0.5, 0.5}}, 0.4)});
  auto grid = make_grid(dom, 0.04);
  auto f = dipole(grid, Vec<2>{{1.6, 0.5}}, Vec<2>{{0.5, 1.6}}, 0.25);
  auto res = solve_lipschitz(f, dom);
  EXPECT_LT(res.diagnostics.max_residual / res.diagnostics.max_abs_f, 0.1);
}

TEST(Solver, ThreeDimensionalBallSolve) {
  StarDomain<3> ball(Ball<3>{{{0.0, 0.0, 0.0}}, 1.0}, Ball<3>{{{0.0, 0.0, 0.0}}, 0.4});
  auto mol = make_bump<3>(Vec<3>{{0.0, 0.0, 0.0}}, 0.4);
  const double h = 0.05;
  auto grid = make_grid(ball, h);
  auto f = dipole(grid, Vec<3>{{0.35, 0.0, 0.0}}, Vec<3>{{-0.35, 0.0, 0.0}}, 0.3);
  auto checks = lattice_subset(*grid, interior_nodes(*grid, ball, 0.3), 4);
  SolverOptions opts;
  opts.output_nodes = stencil_closure(*grid, checks);
  auto u = bogovskii_apply(f, ball, mol, opts);
  auto div = centered_divergence(u, checks);
  double worst = 0.0;
  for (std::size_t k = 0; k < checks.size(); ++k) worst = std::max(worst, std::abs(div[k] - f.values[checks[k]]));
  EXPECT_LT(worst / max_abs(f), 0.15);
}
