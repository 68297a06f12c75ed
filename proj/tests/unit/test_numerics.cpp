#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bfm/numerics.hpp"
#include "bfm/optimize.hpp"

namespace {

// E1(x) from its convergent power series, in long double.
double e1_series(double x) {
  long double sum = 0.0L, term = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -static_cast<long double>(x) / k;
    sum += term / k;
  }
  return static_cast<double>(-0.57721566490153286060651209L - std::log(static_cast<long double>(x)) - sum);
}

}  // namespace

TEST(Numerics, LogGamma) {
  EXPECT_NEAR(bfm::log_gamma(1.0), 0.0, 1e-15);
  EXPECT_NEAR(bfm::log_gamma(0.5), 0.5723649429247001, 1e-14);
  EXPECT_NEAR(bfm::log_gamma(6.0), std::log(120.0), 1e-13);
}

TEST(Numerics, LogHelpers) {
  EXPECT_NEAR(bfm::log_add_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
  EXPECT_EQ(bfm::log_add_exp(-INFINITY, 1.0), 1.0);
  EXPECT_NEAR(bfm::log1m_exp(-1e-20), std::log(1e-20), 1e-12);
  EXPECT_NEAR(bfm::softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(bfm::softplus(0.0), std::log(2.0), 1e-15);
}

TEST(Numerics, SemiInfiniteQuadrature) {
  auto e = [](double y) { return std::exp(-y); };
  EXPECT_NEAR(bfm::integrate_semiinf(e, 0.0).value, 1.0, 1e-10);
  EXPECT_NEAR(bfm::integrate_semiinf(e, 1.0).value, std::exp(-1.0), 1e-10);
  // (ln y)^0.5 / y e^{-y} on [1, inf) against u = ln y on a long finite range.
  auto g = [](double y) { return std::sqrt(std::log(y)) / y * std::exp(-y); };
  const double a = bfm::integrate_semiinf(g, 1.0, {1e-14, 1e-12, 1000000}).value;
  auto gu = [](double u) { return std::sqrt(u) * std::exp(-std::exp(u)); };
  const double b = bfm::integrate(gu, 0.0, 6.0, {1e-15, 1e-13, 1000000}, {1e-6, 1e-4, 1e-2, 1.0}).value;
  EXPECT_NEAR(a, b, 1e-8);
}

TEST(Numerics, FiniteQuadratureWithBreaks) {
  const auto r = bfm::integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {1e-14, 1e-14, 100000}, {0.3});
  EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-14);
  EXPECT_NEAR(bfm::integrate_to_neginf([](double y) { return std::exp(y); }, 0.0, {}).value, 1.0, 1e-10);
}

TEST(Numerics, IntegroExponential) {
  EXPECT_NEAR(bfm::gen_integro_exponential(0.0, 1.0), 0.2193839343955203, 1e-12);
  EXPECT_NEAR(bfm::gen_integro_exponential(0.0, 1.0), e1_series(1.0), 1e-12);
  EXPECT_NEAR(bfm::gen_integro_exponential(0.0, std::numbers::e), e1_series(std::numbers::e), 1e-12);
  auto f = [](double y) { return std::log(y) / y * std::exp(-y); };
  EXPECT_NEAR(bfm::gen_integro_exponential(1.0, 1.0), bfm::integrate_semiinf(f, 1.0, {1e-15, 1e-13, 1000000}).value, 1e-9);
  EXPECT_THROW(bfm::gen_integro_exponential(-1.5, 1.0), bfm::DomainError);
  EXPECT_THROW(bfm::gen_integro_exponential(0.0, 0.5), bfm::DomainError);
}

TEST(Numerics, LambertW) {
  for (double y : {1e-6, 0.5, 1.0, 10.0, 1e6}) {
    const double w = bfm::lambert_w(y);
    EXPECT_NEAR(w * std::exp(w) / y, 1.0, 1e-13);
  }
}

TEST(Numerics, AlternatingSeries) {
  const auto a = bfm::guarded_alternating_sum([](int l) { return std::pow(-0.5, l); });
  EXPECT_TRUE(a.converged);
  EXPECT_NEAR(a.value, 2.0 / 3.0, 1e-10);
  EXPECT_FALSE(bfm::guarded_alternating_sum([](int l) { return std::pow(-2.0, l); }).converged);
  const auto z = bfm::guarded_alternating_sum([](int) { return 0.0; });
  EXPECT_TRUE(z.converged);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.terms_used, 1);
}

TEST(Numerics, RootAndMaximum) {
  EXPECT_NEAR(bfm::brent_root([](double x) { return x * x - 2.0; }, 0.0, 2.0), std::sqrt(2.0), 1e-14);
  EXPECT_THROW(bfm::brent_root([](double x) { return x * x + 1.0; }, 0.0, 2.0), bfm::ConvergenceError);
  EXPECT_NEAR(bfm::golden_section_max([](double x) { return -(x - 1.3) * (x - 1.3); }, 0.0, 3.0), 1.3, 1e-7);
}

TEST(Optimize, NelderMeadAndBfgsOnRosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
  };
  auto g = [](const std::vector<double>& x) {
    return std::vector<double>{-400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]), 200 * (x[1] - x[0] * x[0])};
  };
  const auto nm = bfm::nelder_mead(f, {-1.2, 1.0});
  EXPECT_NEAR(nm.x[0], 1.0, 1e-4);
  const auto bf = bfm::bfgs(f, g, {-1.2, 1.0});
  EXPECT_NEAR(bf.x[0], 1.0, 1e-6);
  EXPECT_NEAR(bf.x[1], 1.0, 1e-6);
  const auto fd = bfm::fd_gradient(f, {0.5, 0.5});
  const auto an = g({0.5, 0.5});
  EXPECT_NEAR(fd[0], an[0], 1e-5);
  EXPECT_NEAR(fd[1], an[1], 1e-5);
}
