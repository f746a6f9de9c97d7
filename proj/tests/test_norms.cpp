#include <gtest/gtest.h>

#include <random>

#include "bogovskii/inputs.hpp"
#include "bogovskii/norms.hpp"

using namespace bogovskii;

namespace {

std::shared_ptr<const Grid<2>> unit_square(double h, double padding = 0.0) {
  return make_box_grid<2>(Vec<2>{{0.0, 0.0}}, Vec<2>{{1.0, 1.0}}, h, padding, [](const Vec<2>&) { return true; });
}

std::shared_ptr<const Grid<2>> padded_disk(double h) {
  StarDomain<2> disk(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.0, 0.0}}, 0.4});
  return make_grid(disk, h, 0.25 + 2.0 * h);
}

}  // namespace

TEST(Norms, LpOfConstantIsMeasurePower) {
  auto grid = unit_square(0.01);
  auto one = ScalarField<2>::sample(grid, [](const Vec<2>&) { return 1.0; });
  double measure = grid->masked_nodes().size() * grid->cell_volume();
  for (double p : {0.5, 1.0, 2.0, 3.0}) EXPECT_NEAR(lp_norm(one, p), std::pow(measure, 1.0 / p), 1e-12);
  EXPECT_THROW(lp_norm(one, 0.0), Error);
}

TEST(Norms, LpIsAbsolutelyHomogeneous) {
  auto grid = unit_square(0.02);
  auto f = ScalarField<2>::sample(grid, [](const Vec<2>& x) { return std::sin(5.0 * x[0]) * x[1]; });
  auto g = f;
  g *= -3.5;
  for (double p : {1.0, 1.5, 2.0}) EXPECT_NEAR(lp_norm(g, p), 3.5 * lp_norm(f, p), 1e-12 * lp_norm(g, p));
}

TEST(Norms, DiscreteTestFunctionHasUnitMass) {
  auto phi = make_bump<2>(Vec<2>{}, 0.25);
  for (double t : {1.0, 0.25, 0.05, 0.001}) {
    auto k = detail::discretize(phi, t, 0.01);
    double total = 0.0;
    for (double w : k.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-14) << "t = " << t;
  }
}

TEST(Norms, MaximalFunctionDominatesTheField) {
  auto grid = padded_disk(0.02);
  auto f = atom(grid, Vec<2>{{0.2, 0.0}}, 0.2, 1.0);
  auto m = local_maximal(f, MaximalConfig<2>::standard());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_GE(m.values[i], std::abs(f.values[i]) - 1e-15);
}

TEST(Norms, HpIsHomogeneousAndVanishesOnZero) {
  auto grid = padded_disk(0.02);
  auto cfg = MaximalConfig<2>::standard();
  auto f = atom(grid, Vec<2>{{0.0, 0.2}}, 0.3, 1.0);
  auto g = f;
  g *= 2.0;
  double a = hp_quasinorm(f, 0.9, cfg).value;
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(hp_quasinorm(g, 0.9, cfg).value, 2.0 * a, 1e-12 * a);
  ScalarField<2> zero(grid, true);
  EXPECT_EQ(hp_quasinorm(zero, 1.0, cfg).value, 0.0);
}

TEST(Norms, HpFlagsExponentsOutsideTheRegime) {
  auto grid = padded_disk(0.04);
  auto f = atom(grid, Vec<2>{{0.0, 0.0}}, 0.3, 1.0);
  auto cfg = MaximalConfig<2>::standard();
  EXPECT_TRUE(hp_quasinorm(f, 1.0, cfg).warnings.empty());
  EXPECT_FALSE(hp_quasinorm(f, 2.0, cfg).warnings.empty());
  EXPECT_FALSE(hp_quasinorm(f, 0.6, cfg).warnings.empty());
}

TEST(Norms, HpNeedsPaddingForTheLargestDilation) {
  StarDomain<2> disk(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.0, 0.0}}, 0.4});
  auto grid = make_grid(disk, 0.04);
  auto f = atom(grid, Vec<2>{{0.8, 0.0}}, 0.15, 1.0);
  try {
    hp_quasinorm(f, 1.0, MaximalConfig<2>::standard());
    FAIL() << "expected PaddingRequired";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PaddingRequired);
  }
}

TEST(Norms, HolderSeminormOfPowerIsOne) {
  auto grid = unit_square(0.01);
  Vec<2> c{{0.5, 0.5}};
  for (double alpha : {0.3, 0.5, 0.7}) {
    auto f = ScalarField<2>::sample(grid, [&](const Vec<2>& x) { return std::pow(norm(x - c), alpha); });
    EXPECT_NEAR(holder_seminorm(f, alpha), 1.0, 1e-12) << "alpha = " << alpha;
    EXPECT_NEAR(lambda_norm(f, alpha), 1.0 + std::pow(std::sqrt(0.5), alpha), 1e-12);
  }
  auto f = ScalarField<2>::sample(grid, [](const Vec<2>&) { return 0.0; });
  EXPECT_THROW(holder_seminorm(f, 1.0), Error);
}

TEST(Norms, HolderSeminormIsSeeded) {
  auto grid = unit_square(0.02);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto f = ScalarField<2>::sample(grid, [&](const Vec<2>&) { return u(rng); });
  EXPECT_EQ(holder_seminorm(f, 0.5, 5000, 9), holder_seminorm(f, 0.5, 5000, 9));
}

TEST(Norms, BmoOfConstantHasNoOscillation) {
  auto grid = unit_square(0.02);
  auto f = ScalarField<2>::sample(grid, [](const Vec<2>&) { return 3.0; });
  f.support_flag = false;
  auto rep = bmo_norm(f);
  EXPECT_EQ(rep.small_balls, 0.0);
  EXPECT_NEAR(rep.large_balls, 3.0, 1e-12);
  EXPECT_EQ(rep.bmo, rep.small_balls + rep.large_balls);
}

TEST(Norms, BmoIsAbsolutelyHomogeneous) {
  auto grid = unit_square(0.02);
  auto f = ScalarField<2>::sample(grid, [](const Vec<2>& x) { return std::log(0.01 + norm(x)); });
  auto g = f;
  g *= -2.0;
  auto a = bmo_norm(f);
  auto b = bmo_norm(g);
  EXPECT_NEAR(b.small_balls, 2.0 * a.small_balls, 1e-12 * b.small_balls);
  EXPECT_NEAR(b.large_balls, 2.0 * a.large_balls, 1e-12 * b.large_balls);
}
