#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bfm/distribution.hpp"
#include "bfm/numerics.hpp"
#include "bfm/rng.hpp"

namespace bfm {

enum class RiskMethod { P1_quadrature, P2_proportionality, P3_series, MC_oracle };

inline const char* to_string(RiskMethod m) {
  switch (m) {
    case RiskMethod::P1_quadrature: return "P1_quadrature";
    case RiskMethod::P2_proportionality: return "P2_proportionality";
    case RiskMethod::P3_series: return "P3_series";
    case RiskMethod::MC_oracle: return "MC_oracle";
  }
  return "";
}

/// Cause-specific failure probabilities; f1 is the Dhillon cause.
struct RiskEstimate {
  double f1 = 0.0;
  double f2 = 0.0;
  RiskMethod method = RiskMethod::P1_quadrature;
  std::optional<SeriesResult> detail1, detail2;
  std::optional<double> std_error;
};

/// F_k = integral of r_k(t) sf(t) over (0, inf).
/// F1 is integrated in v = nu t^theta and F2 in w = (zeta t)^tau, which turns
/// each integrand into a bounded, smoothly decaying function.
inline RiskEstimate risk_p1(const BfmParams& p, double tol = 1e-10) {
  const double nu = p.nu(), th = p.theta(), ta = p.tau(), ze = p.zeta();
  const QuadratureOptions opt{1e-15, tol, 1000000};
  auto f1 = [&](double v) {
    // t = (v / nu)^{1/theta};  (zeta t)^tau in logs.
    const double z = std::exp(ta * (std::log(ze) + (std::log(v) - std::log(nu)) / th));
    if (z > 700.0) return 0.0;
    return std::exp(-std::expm1(z)) / ((1.0 + v) * (1.0 + v));
  };
  auto f2 = [&](double w) {
    if (w > 700.0) return 0.0;
    const double a = std::exp(std::log(nu) + th * (std::log(w) / ta - std::log(ze)));
    return std::exp(w - std::expm1(w)) / (1.0 + a);
  };
  // Scale of v where the exponential-power survival starts to bite.
  const double v_scale = std::clamp(nu * std::pow(ze, -th), 1e-200, 1e200);
  double a1 = integrate_semiinf(f1, 0.0, opt, v_scale).value;
  double a2 = integrate_semiinf(f2, 0.0, opt, 1.0).value;
  return {a1, a2, RiskMethod::P1_quadrature, std::nullopt, std::nullopt, std::nullopt};
}

/// Proportionality ratio r_k(x) / r(x). The smaller share is computed as a
/// ratio and the larger as its complement, so f1 + f2 == 1 in floating point.
inline RiskEstimate risk_p2(double x, const BfmParams& p) {
  detail::require_positive_x(x, "risk_p2");
  const double l1 = dhillon_log_frf(x, p.nu(), p.theta());
  const double l2 = exppower_log_frf(x, p.tau(), p.zeta());
  const double lr = log_add_exp(l1, l2);
  RiskEstimate out;
  out.method = RiskMethod::P2_proportionality;
  if (l1 <= l2) {
    out.f1 = std::exp(l1 - lr);
    out.f2 = 1.0 - out.f1;
  } else {
    out.f2 = std::exp(l2 - lr);
    out.f1 = 1.0 - out.f2;
  }
  return out;
}

/// Series expansions of F1 and F2 in powers of -nu. Both are asymptotic rather
/// than convergent for many parameter sets; check the detail flags.
inline RiskEstimate risk_p3(const BfmParams& p, double tol = 1e-10, int max_terms = 200) {
  const double nu = p.nu(), th = p.theta(), ta = p.tau(), ze = p.zeta();
  const double lnu = std::log(nu), lze = std::log(ze);
  auto term1 = [&](int l) {
    const double k = l + 1.0;
    const double lg = std::log(nu * th / ta) + 1.0 + std::log(k) + l * lnu - th * k * lze +
                      log_gen_integro_exponential(th * k / ta - 1.0, 0.0);
    const double mag = std::exp(lg);
    return (l % 2 == 0) ? mag : -mag;
  };
  auto s1 = guarded_alternating_sum(term1, tol, max_terms);

  auto term2 = [&](int l) {
    auto inner_term = [&](int s) {
      const double lg = l * lnu - log_gamma(s + 1.0) - l * th * lze +
                        log_gen_integro_exponential(l * th / ta + s, 0.0);
      return std::exp(1.0 + lg);
    };
    const auto inner = guarded_alternating_sum(inner_term, tol, max_terms);
    return (l % 2 == 0) ? inner.value : -inner.value;
  };
  auto s2 = guarded_alternating_sum(term2, tol, max_terms);
  return {s1.value, s2.value, RiskMethod::P3_series, s1, s2, std::nullopt};
}

/// Monte Carlo cause frequencies from the latent-minimum sampler.
inline RiskEstimate risk_mc(const BfmParams& p, std::size_t draws, std::uint64_t seed) {
  if (draws < 10000) throw ConfigError("risk_mc: draws must be >= 1e4");
  Rng rng(seed);
  std::size_t c1 = 0;
  for (std::size_t i = 0; i < draws; ++i)
    if (bfm_draw(p, rng).cause == CauseLabel::Cause1) ++c1;
  const double f1 = static_cast<double>(c1) / draws;
  RiskEstimate out;
  out.f1 = f1;
  out.f2 = static_cast<double>(draws - c1) / draws;
  out.method = RiskMethod::MC_oracle;
  out.std_error = std::sqrt(f1 * (1.0 - f1) / draws);
  return out;
}

/// F_k for any two-component additive hazard. With u = H(t),
/// F_k = integral over u of r_k / (r_1 + r_2) at t(u), weighted by e^{-u};
/// a hazard spike in t becomes a smooth change of the share in u.
/// log_r1 and log_r2 are functions of t; chf_inverse maps u to t.
template <class LR1, class LR2, class HInv>
RiskEstimate two_component_risks(LR1&& log_r1, LR2&& log_r2, HInv&& chf_inverse, double tol = 1e-10) {
  const QuadratureOptions opt{1e-15, tol, 1000000};
  auto share = [&](double u, bool first) {
    const double t = chf_inverse(u);
    const double l1 = log_r1(t), l2 = log_r2(t);
    double d = first ? l2 - l1 : l1 - l2;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (std::isnan(d)) d = std::isfinite(first ? l1 : l2) ? -inf : inf;
    return std::exp(-u) / (1.0 + std::exp(d));
  };
  std::vector<double> breaks;
  for (double b = 1e-14; b < 1.0; b *= 10.0) breaks.push_back(b);
  for (double b = 1.0; b < 745.0; b *= 2.0) breaks.push_back(b);
  const double u_max = 745.0;
  const double a1 = integrate([&](double u) { return share(u, true); }, 0.0, u_max, opt, breaks).value;
  const double a2 = integrate([&](double u) { return share(u, false); }, 0.0, u_max, opt, breaks).value;
  return {a1, a2, RiskMethod::P1_quadrature, std::nullopt, std::nullopt, std::nullopt};
}

}  // namespace bfm
