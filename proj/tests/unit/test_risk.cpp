#include <gtest/gtest.h>

#include <cmath>

#include "bfm/risk.hpp"

using bfm::BfmParams;

TEST(Risk, QuadratureMatchesTabulatedRows) {
  EXPECT_NEAR(bfm::risk_p1(BfmParams(0.01, 2.0, 0.6, 0.6)).f1, 0.0158, 1e-3);
  EXPECT_NEAR(bfm::risk_p1(BfmParams(0.5, 0.05, 0.25, 0.8)).f1, 0.2991, 1e-3);
}

TEST(Risk, QuadratureSumsToOne) {
  for (const auto& p : {BfmParams(0.01, 2.0, 0.6, 0.6), BfmParams(0.05, 6.0, 0.7, 2.8), BfmParams(0.0127, 0.6124, 3.577, 0.0026)}) {
    const auto r = bfm::risk_p1(p);
    EXPECT_NEAR(r.f1 + r.f2, 1.0, 1e-9);
  }
}

TEST(Risk, VanishingDhillonScale) {
  const auto r = bfm::risk_p1(BfmParams(1e-200, 1.0, 1.0, 1.0));
  EXPECT_NEAR(r.f1, 0.0, 1e-12);
  EXPECT_NEAR(r.f2, 1.0, 1e-12);
  EXPECT_EQ(bfm::risk_mc(BfmParams(1e-200, 1.0, 1.0, 1.0), 100000, 5).f1, 0.0);
}

TEST(Risk, ProportionalityIsAHazardShare) {
  const BfmParams p(0.5, 0.05, 0.25, 0.8);
  for (double x : {0.1, 1.0, 3.0}) {
    const auto r = bfm::risk_p2(x, p);
    EXPECT_NEAR(r.f1 + r.f2, 1.0, 1e-14);
    EXPECT_NEAR(r.f1, bfm::dhillon_frf(x, 0.5, 0.05) / bfm::bfm_frf(x, p), 1e-13);
  }
}

TEST(Risk, SeriesAgreesWithQuadratureWhenConvergent) {
  for (const auto& p : {BfmParams(0.01, 0.3, 1.5, 0.6), BfmParams(0.5, 0.05, 0.25, 0.8)}) {
    const auto s = bfm::risk_p3(p);
    ASSERT_TRUE(s.detail1 && s.detail1->converged);
    EXPECT_NEAR(s.f1, bfm::risk_p1(p).f1, 1e-6);
  }
}

TEST(Risk, SeriesFlagsDivergence) {
  const auto s = bfm::risk_p3(BfmParams(0.5, 8.0, 3.0, 1.2));
  ASSERT_TRUE(s.detail1);
  EXPECT_FALSE(s.detail1->converged);
}

TEST(Risk, MonteCarloWithinFourSigma) {
  const BfmParams p(0.5, 0.05, 0.25, 0.8);
  const auto mc = bfm::risk_mc(p, 200000, 17);
  ASSERT_TRUE(mc.std_error);
  EXPECT_NEAR(mc.f1, bfm::risk_p1(p).f1, 4.0 * *mc.std_error);
  EXPECT_THROW(bfm::risk_mc(p, 10, 1), bfm::ConfigError);
}

TEST(Risk, TwoConstantHazards) {
  const double l1 = 0.3, l2 = 1.2;
  auto inv = [&](double u) { return u / (l1 + l2); };
  auto lr1 = [&](double) { return std::log(l1); };
  auto lr2 = [&](double) { return std::log(l2); };
  const auto r = bfm::two_component_risks(lr1, lr2, inv);
  EXPECT_NEAR(r.f1, l1 / (l1 + l2), 1e-10);
  EXPECT_NEAR(r.f2, l2 / (l1 + l2), 1e-10);
  const auto s = bfm::two_component_risks(lr2, lr1, inv);
  EXPECT_NEAR(s.f1, r.f2, 1e-12);
  EXPECT_NEAR(s.f2, r.f1, 1e-12);
}

TEST(Risk, GenericRisksReproduceBfm) {
  const BfmParams p(0.0054, 4.9472, 0.4701, 0.0419);
  const auto r = bfm::two_component_risks([&](double t) { return bfm::dhillon_log_frf(t, p.nu(), p.theta()); },
                                          [&](double t) { return bfm::exppower_log_frf(t, p.tau(), p.zeta()); },
                                          [&](double u) { return bfm::bfm_chf_inverse(u, p); });
  EXPECT_NEAR(r.f1, bfm::risk_p1(p).f1, 1e-7);
}
