#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "swexp/excess_rate.hpp"

using namespace swexp;
using swexp::test::ternary_source;

TEST(Achievability, Verdicts) {
  Source s = ternary_source();
  // rate above every rate-function value: er = 0 suffices
  EXPECT_TRUE(achievable(s, 0.6, 0.0, 0.05));
  EXPECT_FALSE(not_achievable(s, 0.6, 0.0, 0.05));
  // rate below the typical rate: the typical type is always in excess
  EXPECT_TRUE(not_achievable(s, 0.3, 0.0, 0.05));
  EXPECT_FALSE(achievable(s, 0.3, 0.0, 0.05));
  EXPECT_TRUE(achievable(s, 0.3, 0.0, 0.0));
  EXPECT_THROW(achievable(s, -1.0, 0.0, 0.05), Error);
}

TEST(Achievability, ConsistentVerdicts) {
  Source s = ternary_source();
  for (double r : {0.35, 0.38, 0.39, 0.395})
    for (double er : {0.0, 0.001, 0.003, 0.01, 0.05})
      EXPECT_FALSE(achievable(s, r, er, 0.05) && not_achievable(s, r, er, 0.05)) << r << " " << er;
}

TEST(ExcessRate, BelowTypicalRateIsZero) {
  Source s = ternary_source();
  ExcessConfig cfg;
  for (double r : {0.1, 0.3, 0.37, 0.377}) {
    EXPECT_LE(excess_rate_lower(s, r, 0.05, cfg), cfg.er_tol);
    EXPECT_LE(excess_rate_upper(s, r, 0.05, cfg), cfg.er_tol);
  }
}

TEST(ExcessRate, ReferencePoint) {
  Source s = ternary_source();
  auto p = excess_rate_point(s, 0.3921, 0.05);
  EXPECT_NEAR(p.er_lower, 2e-3, 4e-4);
  EXPECT_LE(p.er_lower, p.er_upper + 1e-5);
}

TEST(ExcessRate, AbovePeakIsInfinite) {
  Source s = ternary_source();
  EXPECT_EQ(excess_rate_lower(s, 0.45, 0.05), kInf);
  EXPECT_EQ(excess_rate_upper(s, 0.45, 0.05), kInf);
}

TEST(ExcessRate, MonotoneInRate) {
  Source s = ternary_source();
  double prev = 0.0;
  for (double r : {0.38, 0.385, 0.39, 0.395, 0.398}) {
    double e = excess_rate_lower(s, r, 0.05);
    EXPECT_GE(e, prev - 1e-5) << r;
    prev = e;
  }
}

TEST(ExcessRate, MatchesDirectTypeSearch) {
  Source s = ternary_source();
  for (double r : {0.385, 0.39, 0.3921, 0.396}) {
    double direct = excess_rate_direct(s, 0.05, r, RateKind::Ub, 2000);
    EXPECT_NEAR(excess_rate_lower(s, r, 0.05), direct, 2e-4) << r;
  }
}

TEST(ExcessRate, CapBoundsDivergence) {
  Source s = ternary_source();
  EXPECT_NEAR(er_search_cap(s), -std::log(0.2) + 1.0, 1e-15);
}

TEST(EFunctions, GoldenMatchesDenseGrid) {
  Source s = ternary_source();
  ExcessConfig cfg;
  for (auto [r, er] : {std::pair{0.39, 0.001}, std::pair{0.35, 0.01}, std::pair{0.2, 0.05}}) {
    auto g = max_e_rb(s, r, er, 0.0, 1.0, kInf, cfg);
    double dense = -kInf;
    for (int i = 0; i <= 1000; ++i) dense = std::max(dense, e_rb(s, r, er, i / 1000.0).value);
    EXPECT_GE(g.value, dense - 1e-6);
    EXPECT_NEAR(g.value, dense, 1e-6);
  }
}

TEST(EFunctions, ConcaveInT) {
  Source s = ternary_source();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 20; ++i) {
    double a = u(rng), b = u(rng);
    double mid = e_rb(s, 0.39, 0.002, 0.5 * (a + b)).value;
    double chord = 0.5 * (e_rb(s, 0.39, 0.002, a).value + e_rb(s, 0.39, 0.002, b).value);
    EXPECT_GE(mid, chord - 1e-8);
  }
}

TEST(EFunctions, NonIncreasingInExcessExponent) {
  Source s = ternary_source();
  double prev = kInf;
  for (int i = 0; i < 10; ++i) {
    double v = e_rb(s, 0.39, 0.002 * i, 0.7).value;
    EXPECT_LE(v, prev + 1e-9);
    prev = v;
  }
}

TEST(Comparison, FixedRate) {
  Source s = ternary_source();
  auto fr = fixed_rate_comparison(s, 0.05, 2000);
  EXPECT_NEAR(fr.peak.qx[0], 0.2574, 5e-3);
  EXPECT_NEAR(fr.peak.r0, 0.40, 5e-3);
  EXPECT_EQ(fr.exponent_at(0.39), 0.0);
  EXPECT_EQ(fr.exponent_at(0.41), kInf);
  EXPECT_NEAR(fixed_rate_max_exponent(s, 0.3921, 400), 0.045, 2e-3);
}

TEST(Comparison, AverageRate) {
  Source s = ternary_source();
  EXPECT_EQ(average_rate_comparison(s, 0.05, 0.3, 200), 0.0);
  double v = average_rate_comparison(s, 0.05, 0.6, 1000);
  // H(q) >= 0.6 first holds at q0 ~ 0.3325; D to px grows with q0 above 0.2
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 0.1);
  // H(px) ~ 0.5004: typical blocks already exceed 0.39 under rate H(Q)
  EXPECT_EQ(average_rate_comparison(s, 0.05, 0.39, 1000), 0.0);
}

TEST(Grid, SimplexGrid) {
  EXPECT_EQ(simplex_grid(2, 10).size(), 11u);
  EXPECT_EQ(simplex_grid(3, 10).size(), 66u);
  EXPECT_THROW(simplex_grid(3, 1), Error);
  EXPECT_THROW(simplex_grid(3, 100000, 1000), Error);
}
