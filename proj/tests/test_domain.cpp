#include <gtest/gtest.h>

#include "bogovskii/domain.hpp"
#include "bogovskii/grid.hpp"
#include "bogovskii/lipschitz.hpp"

using namespace bogovskii;

namespace {

StarDomain<2> unit_disk() { return StarDomain<2>(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.0, 0.0}}, 0.4}); }

StarPolygon l_polygon() {
  StarPolygon p;
  p.vertices = {{{0.0, 0.0}}, {{2.0, 0.0}}, {{2.0, 1.0}}, {{1.0, 1.0}}, {{1.0, 2.0}}, {{0.0, 2.0}}};
  return p;
}

LipschitzDomain<2> l_union() {
  std::vector<StarDomain<2>> pieces;
  pieces.emplace_back(Box<2>{{{0.0, 0.0}}, {{2.0, 1.0}}}, Ball<2>{{{1.0, 0.5}}, 0.4});
  pieces.emplace_back(Box<2>{{{0.0, 0.0}}, {{1.0, 2.0}}}, Ball<2>{{{0.5, 1.0}}, 0.4});
  return LipschitzDomain<2>(std::move(pieces), {make_bump<2>(Vec<2>{{0.5, 0.5}}, 0.4)});
}

}  // namespace

TEST(Domain, DiskMembershipAndDepth) {
  auto dom = unit_disk();
  EXPECT_TRUE(dom.contains(Vec<2>{{0.5, 0.5}}));
  EXPECT_TRUE(dom.contains(Vec<2>{{1.0, 0.0}}));
  EXPECT_FALSE(dom.contains(Vec<2>{{0.8, 0.8}}));
  EXPECT_NEAR(dom.depth(Vec<2>{{0.3, 0.0}}), 0.7, 1e-12);
  EXPECT_LT(dom.depth(Vec<2>{{1.2, 0.0}}), 0.0);
  EXPECT_NEAR(dom.diameter(), 2.0, 1e-6);
}

TEST(Domain, RejectsBallOutsideShape) {
  try {
    StarDomain<2>(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.8, 0.0}}, 0.4});
    FAIL() << "expected InvalidDomain";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDomain);
  }
  EXPECT_THROW(StarDomain<2>(Ball<2>{{{0.0, 0.0}}, 1.0}, Ball<2>{{{0.0, 0.0}}, 0.0}), Error);
}

TEST(Domain, StarCheckAcceptsConvexAndStarPolygon) {
  EXPECT_TRUE(star_check(unit_disk(), 400).star_shaped());
  StarPolygon star;
  for (int k = 0; k < 10; ++k) {
    double r = k % 2 == 0 ? 1.0 : 0.45;
    double t = kPi / 2.0 + k * kPi / 5.0;
    star.vertices.push_back(Vec<2>{{r * std::cos(t), r * std::sin(t)}});
  }
  EXPECT_TRUE(star_check(StarDomain<2>(star, Ball<2>{{{0.0, 0.0}}, 0.2}), 400).star_shaped());
}

TEST(Domain, StarCheckFindsLShapeViolation) {
  StarDomain<2> dom(l_polygon(), Ball<2>{{{1.5, 0.5}}, 0.3});
  auto rep = star_check(dom, 400);
  EXPECT_FALSE(rep.star_shaped());
  ASSERT_FALSE(rep.violations.empty());
  const auto& v = rep.violations.front();
  Vec<2> p = v.ball_point + v.t * (v.boundary_point - v.ball_point);
  EXPECT_FALSE(dom.contains(p));
}

TEST(Domain, LShapeIsStarShapedWithRespectToCornerBall) {
  StarDomain<2> dom(l_polygon(), Ball<2>{{{0.5, 0.5}}, 0.3});
  EXPECT_TRUE(star_check(dom, 400).star_shaped());
}

TEST(Mollifier, NormalizationMatchesReferenceQuadrature) {
  EXPECT_NEAR(unit_bump_integral<2>(), 0.4665123931783294, 1e-13);
  auto mol = make_bump<2>(Vec<2>{{0.0, 0.0}}, 0.4);
  EXPECT_NEAR(mol.normalization(), 13.397286098701478, 1e-10);
}

TEST(Mollifier, GridIntegralIsOneAndSupportIsTheBall) {
  auto mol = make_bump<2>(Vec<2>{{0.1, -0.2}}, 0.3);
  auto dom = unit_disk();
  auto grid = make_grid(dom, 0.005);
  auto f = ScalarField<2>::sample(grid, [&](const Vec<2>& x) { return mol(x); });
  EXPECT_NEAR(integrate(f), 1.0, 1e-10);
  EXPECT_EQ(mol(Vec<2>{{0.4, -0.2}}), 0.0);
  EXPECT_GT(mol(Vec<2>{{0.39, -0.2}}), 0.0);
}

TEST(Mollifier, GradientMatchesDifferences) {
  auto mol = make_bump<3>(Vec<3>{{0.0, 0.1, 0.0}}, 0.5);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int s = 0; s < 20; ++s) {
    Vec<3> x{{u(rng), u(rng), u(rng)}};
    Vec<3> g = mol.gradient(x);
    for (int d = 0; d < 3; ++d) {
      Vec<3> e = Vec<3>::unit(d) * 1e-5;
      double fd = (mol(x + e) - mol(x - e)) / 2e-5;
      EXPECT_NEAR(g[d], fd, 1e-6 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(Cutoff, PlateauAndSupport) {
  auto chi = Cutoff<2>::for_domain(unit_disk());
  EXPECT_EQ(chi(Vec<2>{{0.0, 0.99}}), 1.0);
  EXPECT_EQ(chi(Vec<2>{{0.0, 1.21}}), 0.0);
  double mid = chi(Vec<2>{{0.0, 1.1}});
  EXPECT_GT(mid, 0.0);
  EXPECT_LT(mid, 1.0);
}

TEST(Domain, RandomPointsAreInsideAndSeeded) {
  auto dom = unit_disk();
  auto a = random_points<2>(dom, 200, 7);
  auto b = random_points<2>(dom, 200, 7);
  ASSERT_EQ(a.size(), 200u);
  EXPECT_EQ(a, b);
  for (const auto& p : a) EXPECT_TRUE(dom.contains(p));
}

TEST(Lipschitz, PartitionSumsToOneInsideUnion) {
  auto dom = l_union();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  int inside = 0;
  for (int s = 0; s < 2000; ++s) {
    Vec<2> x{{u(rng), u(rng)}};
    if (!dom.contains(x)) continue;
    ++inside;
    auto w = dom.partition(x);
    double total = 0.0;
    for (double v : w) {
      EXPECT_GE(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
  EXPECT_GT(inside, 1000);
}

TEST(Lipschitz, SplitZeroMeanIsExact) {
  auto dom = l_union();
  auto grid = make_grid(dom, 0.02);
  auto f = discrete_unit_bump(grid, make_bump<2>(Vec<2>{{1.6, 0.5}}, 0.25)) -
           discrete_unit_bump(grid, make_bump<2>(Vec<2>{{0.5, 1.6}}, 0.25));
  auto parts = split_zero_mean(f, dom);
  ASSERT_EQ(parts.size(), 2u);
  double l1 = integrate_abs(f);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    EXPECT_LE(std::abs(integrate(parts[k])), 1e-9 * l1);
    for (std::size_t i = 0; i < grid->size(); ++i)
      if (parts[k].values[i] != 0.0) {
        EXPECT_TRUE(dom.piece(k).contains(grid->point(i)));
      }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    worst = std::max(worst, std::abs(parts[0].values[i] + parts[1].values[i] - f.values[i]));
  EXPECT_LE(worst, 1e-12 * max_abs(f));
}

TEST(Lipschitz, OverlapBumpMustLieInBothPieces) {
  std::vector<StarDomain<2>> pieces;
  pieces.emplace_back(Box<2>{{{0.0, 0.0}}, {{2.0, 1.0}}}, Ball<2>{{{1.0, 0.5}}, 0.4});
  pieces.emplace_back(Box<2>{{{0.0, 0.0}}, {{1.0, 2.0}}}, Ball<2>{{{0.5, 1.0}}, 0.4});
  EXPECT_THROW(LipschitzDomain<2>(pieces, {make_bump<2>(Vec<2>{{1.5, 0.5}}, 0.3)}), Error);
  EXPECT_THROW(LipschitzDomain<2>(pieces, {}), Error);
}
