#include <gtest/gtest.h>

#include "bogovskii/counterexample.hpp"

using namespace bogovskii;

namespace {

const std::vector<double> kDeltas{0.2, 0.1, 0.05, 0.025, 0.0125};

}  // namespace

TEST(Counterexample, ConjugateSatisfiesCauchyRiemann) {
  for (Vec<2> x : {Vec<2>{{0.3, 0.2}}, Vec<2>{{-0.7, -0.4}}, Vec<2>{{-0.95, 0.01}}}) {
    const double e = 1e-6;
    Vec<2> dx{{e, 0.0}}, dy{{0.0, e}};
    double phi_x = (log_real_part(x + dx) - log_real_part(x - dx)) / (2 * e);
    double phi_y = (log_real_part(x + dy) - log_real_part(x - dy)) / (2 * e);
    double psi_x = (log_conjugate(x + dx) - log_conjugate(x - dx)) / (2 * e);
    double psi_y = (log_conjugate(x + dy) - log_conjugate(x - dy)) / (2 * e);
    EXPECT_NEAR(phi_x, psi_y, 1e-6);
    EXPECT_NEAR(phi_y, -psi_x, 1e-6);
  }
}

TEST(Counterexample, PairingEqualsMinusLogDelta) {
  auto rep = counterexample_p1(kDeltas);
  ASSERT_EQ(rep.rows.size(), kDeltas.size());
  for (const auto& row : rep.rows) {
    double expect = -std::log(row.delta);
    EXPECT_NEAR(row.pairing / row.l1, expect, 1e-6 * expect) << "delta = " << row.delta;
  }
  EXPECT_NEAR(counterexample_p1({0.25}).rows[0].pairing / counterexample_p1({0.25}).rows[0].l1, 1.386294361119891,
              1e-6);
}

TEST(Counterexample, RatioGrowsWhileConjugateStaysBounded) {
  auto rep = counterexample_p1(kDeltas);
  EXPECT_TRUE(rep.increasing);
  EXPECT_GE(rep.min_increment_fraction, 0.8);
  EXPECT_LE(rep.psi_sup, kPi / 2.0 + 1e-6);
  EXPECT_GT(rep.psi_sup, 1.5);
  for (std::size_t k = 1; k < rep.rows.size(); ++k) EXPECT_GT(rep.rows[k].ratio, rep.rows[k - 1].ratio);
}

TEST(Counterexample, BumpMassIsOne) {
  for (const auto& row : counterexample_p1(kDeltas).rows) EXPECT_NEAR(row.l1, 1.0, 1e-6);
}

TEST(Counterexample, RejectsBadDeltas) {
  EXPECT_THROW(counterexample_p1({}), Error);
  EXPECT_THROW(counterexample_p1({0.6}), Error);
  EXPECT_THROW(counterexample_p1({0.1, 0.2}), Error);
  EXPECT_THROW(counterexample_p1({0.1, -0.05}), Error);
}
