#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bfm/dataset.hpp"
#include "bfm/error.hpp"
#include "bfm/hazard_model.hpp"
#include "bfm/mle.hpp"
#include "bfm/numerics.hpp"

namespace bfm {

namespace detail {

struct TimeSummary {
  double median, max;
};

inline TimeSummary time_summary(const Dataset& d) {
  auto t = d.failure_times();
  if (t.empty())
    for (const auto& o : d.observations) t.push_back(o.time);
  std::sort(t.begin(), t.end());
  double mx = 0.0;
  for (const auto& o : d.observations) mx = std::max(mx, o.time);
  return {t[t.size() / 2], mx};
}

/// Exponentiated form F = (1 - exp(-A))^e. Returns (log pdf, log sf) given
/// log A, log A' and the exponent e.
struct LogPdfSf {
  double log_pdf, log_sf;
};

inline LogPdfSf exponentiated_cdf(double log_a, double log_da, double e) {
  const double a = std::exp(log_a);
  const double log_g = log1m_exp(-a);  // log(1 - exp(-A))
  const double log_pdf = std::log(e) + (e - 1.0) * log_g - a + log_da;
  double log_sf;
  if (a > 700.0) {
    log_sf = std::log(e) - a;  // 1 - (1 - q)^e ~ e q for tiny q
  } else {
    const double y = e * log_g;
    log_sf = y < 0.0 ? log1m_exp(y) : -std::numeric_limits<double>::infinity();
  }
  return {log_pdf, log_sf};
}

// Gompertz-type offset guesses: the second hazard switches on near the largest time.
inline std::vector<std::pair<double, double>> gompertz_guesses(double tmax) {
  std::vector<std::pair<double, double>> out;
  for (double k : {2.0, 10.0, 50.0, 200.0, 700.0}) out.emplace_back(k / tmax, k);
  return out;
}

}  // namespace detail

/// Additive Perks: parameters (alpha, beta, lambda, theta),
/// r = alpha lambda e^{lambda x} / (1 + alpha e^{lambda x}) + beta theta e^{theta x} / (1 + beta e^{theta x}).
inline HazardModel apd_model() {
  HazardModel m;
  m.name = "APD";
  m.param_names = {"alpha", "beta", "lambda", "theta"};
  auto lr1 = [](double x, std::span<const double> p) {
    const double u = std::log(p[0]) + p[2] * x;
    return std::log(p[2]) + u - softplus(u);
  };
  auto lr2 = [](double x, std::span<const double> p) {
    const double u = std::log(p[1]) + p[3] * x;
    return std::log(p[3]) + u - softplus(u);
  };
  m.log_frf1 = lr1;
  m.log_frf2 = lr2;
  m.log_frf = [lr1, lr2](double x, std::span<const double> p) { return log_add_exp(lr1(x, p), lr2(x, p)); };
  m.chf = [](double x, std::span<const double> p) {
    const double la = std::log(p[0]), lb = std::log(p[1]);
    return softplus(la + p[2] * x) - softplus(la) + softplus(lb + p[3] * x) - softplus(lb);
  };
  m.initial_guesses = [](const Dataset& d) {
    const auto ts = detail::time_summary(d);
    std::vector<std::vector<double>> g;
    for (double a : {1e-3, 0.1, 1.0})
      for (double k : {2.0, 5.0, 20.0}) g.push_back({a, std::exp(-k), 1.0 / ts.median, k / ts.max});
    return g;
  };
  m.time_power = {0, 0, -1, -1};
  set_default_bounds(m, {});
  return m;
}

/// Flexible additive Chen-Gompertz: parameters (gamma, alpha, lambda, theta),
/// r = alpha gamma x^{gamma-1} e^{x^gamma} + lambda e^{lambda x - theta}.
inline HazardModel facg_model() {
  HazardModel m;
  m.name = "FACG";
  m.param_names = {"gamma", "alpha", "lambda", "theta"};
  auto lr1 = [](double x, std::span<const double> p) {
    const double lx = std::log(x);
    return std::log(p[1] * p[0]) + (p[0] - 1.0) * lx + std::exp(p[0] * lx);
  };
  auto lr2 = [](double x, std::span<const double> p) { return std::log(p[2]) + p[2] * x - p[3]; };
  m.log_frf1 = lr1;
  m.log_frf2 = lr2;
  m.log_frf = [lr1, lr2](double x, std::span<const double> p) { return log_add_exp(lr1(x, p), lr2(x, p)); };
  m.chf = [](double x, std::span<const double> p) {
    return p[1] * std::expm1(std::pow(x, p[0])) + std::exp(-p[3]) * std::expm1(p[2] * x);
  };
  m.initial_guesses = [](const Dataset& d) {
    const auto ts = detail::time_summary(d);
    std::vector<std::vector<double>> g;
    for (double gam : {0.3, 0.6, 1.0}) {
      const double alpha = 0.7 / std::expm1(std::pow(ts.median, gam));
      for (auto [lam, th] : detail::gompertz_guesses(ts.max)) g.push_back({gam, alpha, lam, th});
    }
    return g;
  };
  m.time_power = {0, 0, -1, 0};
  set_default_bounds(m, {0});
  return m;
}

/// Flexible additive exponential power-Gompertz: parameters (alpha, gamma, lambda, theta),
/// r = alpha gamma (gamma x)^{alpha-1} e^{(gamma x)^alpha} + lambda e^{lambda x - theta}.
inline HazardModel faepg_model() {
  HazardModel m;
  m.name = "FAEPG";
  m.param_names = {"alpha", "gamma", "lambda", "theta"};
  auto lr1 = [](double x, std::span<const double> p) {
    const double lgx = std::log(p[1] * x);
    return std::log(p[0] * p[1]) + (p[0] - 1.0) * lgx + std::exp(p[0] * lgx);
  };
  auto lr2 = [](double x, std::span<const double> p) { return std::log(p[2]) + p[2] * x - p[3]; };
  m.log_frf1 = lr1;
  m.log_frf2 = lr2;
  m.log_frf = [lr1, lr2](double x, std::span<const double> p) { return log_add_exp(lr1(x, p), lr2(x, p)); };
  m.chf = [](double x, std::span<const double> p) {
    return std::expm1(std::pow(p[1] * x, p[0])) + std::exp(-p[3]) * std::expm1(p[2] * x);
  };
  m.initial_guesses = [](const Dataset& d) {
    const auto ts = detail::time_summary(d);
    std::vector<std::vector<double>> g;
    for (double a : {0.5, 1.0, 1.5}) {
      const double gam = std::pow(std::log(1.7), 1.0 / a) / ts.median;
      for (auto [lam, th] : detail::gompertz_guesses(ts.max)) g.push_back({a, gam, lam, th});
    }
    return g;
  };
  m.time_power = {0, -1, -1, 0};
  set_default_bounds(m, {0});
  return m;
}

/// Exponentiated additive Weibull: parameters (alpha, beta, gamma, lambda, theta),
/// F = (1 - exp(-alpha x^beta - gamma x^lambda))^theta.
inline HazardModel eaddw_model() {
  HazardModel m;
  m.name = "EAddW";
  m.param_names = {"alpha", "beta", "gamma", "lambda", "theta"};
  auto parts = [](double x, std::span<const double> p) {
    const double lx = std::log(x);
    const double l1 = std::log(p[0]) + p[1] * lx, l2 = std::log(p[2]) + p[3] * lx;
    const double log_a = log_add_exp(l1, l2);
    const double log_da = log_add_exp(l1 + std::log(p[1]), l2 + std::log(p[3])) - lx;
    return detail::exponentiated_cdf(log_a, log_da, p[4]);
  };
  m.log_frf = [parts](double x, std::span<const double> p) {
    const auto r = parts(x, p);
    return r.log_pdf - r.log_sf;
  };
  m.chf = [parts](double x, std::span<const double> p) { return -parts(x, p).log_sf; };
  m.initial_guesses = [](const Dataset& d) {
    const auto ts = detail::time_summary(d);
    std::vector<std::vector<double>> g;
    for (double b : {0.3, 1.0})
      for (double l : {3.0, 8.0})
        for (double th : {0.5, 1.0, 5.0})
          g.push_back({0.5 * std::pow(ts.median, -b), b, std::pow(ts.max, -l), l, th});
    return g;
  };
  m.time_power = {0, 0, 0, 0, 0};
  set_default_bounds(m, {1, 3});
  return m;
}

/// Generalized extended exponential-Weibull: parameters (alpha, beta, gamma, lambda, c),
/// F = (1 - exp(-(beta x^gamma + lambda x)^c))^alpha.
inline HazardModel gextew_model() {
  HazardModel m;
  m.name = "GExtEW";
  m.param_names = {"alpha", "beta", "gamma", "lambda", "c"};
  auto parts = [](double x, std::span<const double> p) {
    const double lx = std::log(x);
    const double l1 = std::log(p[1]) + p[2] * lx, l2 = std::log(p[3]) + lx;
    const double log_b = log_add_exp(l1, l2);
    const double log_db = log_add_exp(l1 + std::log(p[2]), l2) - lx;
    const double c = p[4];
    return detail::exponentiated_cdf(c * log_b, std::log(c) + (c - 1.0) * log_b + log_db, p[0]);
  };
  m.log_frf = [parts](double x, std::span<const double> p) {
    const auto r = parts(x, p);
    return r.log_pdf - r.log_sf;
  };
  m.chf = [parts](double x, std::span<const double> p) { return -parts(x, p).log_sf; };
  m.initial_guesses = [](const Dataset& d) {
    const auto ts = detail::time_summary(d);
    std::vector<std::vector<double>> g;
    for (double c : {1.0, 5.0, 25.0})
      for (double a : {0.2, 1.0, 5.0})
        for (double gam : {0.1, 1.0})
          g.push_back({a, 0.5 * std::pow(ts.median, -gam), gam, 0.5 / ts.max, c});
    return g;
  };
  m.time_power = {0, 0, 0, -1, 0};
  set_default_bounds(m, {2, 4});
  return m;
}

inline const std::vector<std::string>& competitor_names() {
  static const std::vector<std::string> names{"APD", "FACG", "FAEPG", "EAddW", "GExtEW"};
  return names;
}

inline HazardModel competitor(const std::string& name) {
  if (name == "APD") return apd_model();
  if (name == "FACG") return facg_model();
  if (name == "FAEPG") return faepg_model();
  if (name == "EAddW") return eaddw_model();
  if (name == "GExtEW") return gextew_model();
  throw ConfigError("unknown model '" + name + "' (expected APD, FACG, FAEPG, EAddW or GExtEW)");
}

/// Case-insensitive lookup over BFM and the competitors.
inline HazardModel model_by_name(std::string name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "BFM") return bfm_model();
  for (const auto& n : competitor_names()) {
    std::string nu = n;
    std::transform(nu.begin(), nu.end(), nu.begin(), [](unsigned char c) { return std::toupper(c); });
    if (nu == up) return competitor(n);
  }
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace bfm
