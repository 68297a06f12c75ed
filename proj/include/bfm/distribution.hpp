#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bfm/error.hpp"
#include "bfm/numerics.hpp"
#include "bfm/rng.hpp"

namespace bfm {

/// BFM parameters in canonical order (nu, theta, tau, zeta).
/// nu, theta: Dhillon scale and shape. tau, zeta: exponential-power shape and scale.
class BfmParams {
public:
  BfmParams(double nu, double theta, double tau, double zeta) : v_{nu, theta, tau, zeta} {
    for (double x : v_)
      if (!std::isfinite(x) || !(x > 0.0)) throw DomainError("BfmParams: all parameters must be finite and > 0");
  }
  static BfmParams from_span(std::span<const double> v) {
    if (v.size() != 4) throw DomainError("BfmParams: expected 4 values");
    return {v[0], v[1], v[2], v[3]};
  }

  double nu() const { return v_[0]; }
  double theta() const { return v_[1]; }
  double tau() const { return v_[2]; }
  double zeta() const { return v_[3]; }
  const std::array<double, 4>& values() const { return v_; }

private:
  std::array<double, 4> v_;
};

enum class CauseLabel { Cause1, Cause2 };

struct LifetimeDraw {
  double time;
  CauseLabel cause;
};

namespace detail {

inline void require_positive_x(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(who) + ": x must be positive and finite");
}
inline void require_nonneg_x(double x, const char* who) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError(std::string(who) + ": x must be nonnegative and finite");
}
inline void require_unit(double u, const char* who) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError(std::string(who) + ": u must lie in (0, 1)");
}

}  // namespace detail

// Dhillon component: survival 1 / (nu x^theta + 1).

inline double dhillon_chf(double x, double nu, double theta) {
  detail::require_nonneg_x(x, "dhillon_chf");
  return std::log1p(nu * std::pow(x, theta));
}
inline double dhillon_sf(double x, double nu, double theta) {
  detail::require_nonneg_x(x, "dhillon_sf");
  return 1.0 / (nu * std::pow(x, theta) + 1.0);
}
inline double dhillon_cdf(double x, double nu, double theta) {
  detail::require_nonneg_x(x, "dhillon_cdf");
  const double a = nu * std::pow(x, theta);
  return a / (a + 1.0);
}
inline double dhillon_frf(double x, double nu, double theta) {
  detail::require_positive_x(x, "dhillon_frf");
  return theta * nu * std::pow(x, theta - 1.0) / (nu * std::pow(x, theta) + 1.0);
}
inline double dhillon_log_frf(double x, double nu, double theta) {
  detail::require_positive_x(x, "dhillon_log_frf");
  const double lx = std::log(x);
  return std::log(theta) + std::log(nu) + (theta - 1.0) * lx - softplus(std::log(nu) + theta * lx);
}
inline double dhillon_quantile(double u, double nu, double theta) {
  detail::require_unit(u, "dhillon_quantile");
  return std::exp((std::log(u) - std::log1p(-u) - std::log(nu)) / theta);
}

// Exponential-power component: survival exp(1 - e^{(zeta x)^tau}).

inline double exppower_chf(double x, double tau, double zeta) {
  detail::require_nonneg_x(x, "exppower_chf");
  return std::expm1(std::pow(zeta * x, tau));
}
inline double exppower_sf(double x, double tau, double zeta) {
  return std::exp(-exppower_chf(x, tau, zeta));
}
inline double exppower_cdf(double x, double tau, double zeta) {
  return -std::expm1(-exppower_chf(x, tau, zeta));
}
inline double exppower_frf(double x, double tau, double zeta) {
  detail::require_positive_x(x, "exppower_frf");
  const double z = std::pow(zeta * x, tau);
  return tau * zeta * std::pow(zeta * x, tau - 1.0) * std::exp(z);
}
inline double exppower_log_frf(double x, double tau, double zeta) {
  detail::require_positive_x(x, "exppower_log_frf");
  const double lz = std::log(zeta * x);
  return std::log(tau) + std::log(zeta) + (tau - 1.0) * lz + std::exp(tau * lz);
}
inline double exppower_quantile(double u, double tau, double zeta) {
  detail::require_unit(u, "exppower_quantile");
  return std::pow(std::log1p(-std::log1p(-u)), 1.0 / tau) / zeta;
}

// BFM = minimum of the two components.

inline double bfm_chf(double x, const BfmParams& p) {
  detail::require_nonneg_x(x, "bfm_chf");
  return exppower_chf(x, p.tau(), p.zeta()) + dhillon_chf(x, p.nu(), p.theta());
}
inline double bfm_log_sf(double x, const BfmParams& p) { return -bfm_chf(x, p); }
inline double bfm_sf(double x, const BfmParams& p) { return std::exp(-bfm_chf(x, p)); }
inline double bfm_cdf(double x, const BfmParams& p) { return 1.0 - bfm_sf(x, p); }

inline double bfm_frf(double x, const BfmParams& p) {
  detail::require_positive_x(x, "bfm_frf");
  return dhillon_frf(x, p.nu(), p.theta()) + exppower_frf(x, p.tau(), p.zeta());
}
inline double bfm_log_frf(double x, const BfmParams& p) {
  detail::require_positive_x(x, "bfm_log_frf");
  return log_add_exp(dhillon_log_frf(x, p.nu(), p.theta()), exppower_log_frf(x, p.tau(), p.zeta()));
}

inline double bfm_pdf(double x, const BfmParams& p) {
  detail::require_positive_x(x, "bfm_pdf");
  const double h = bfm_chf(x, p);
  const double r = bfm_frf(x, p);
  if (std::isfinite(h) && std::isfinite(r)) return r * std::exp(-h);
  if (h == std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(bfm_log_frf(x, p) - h);
}

namespace detail {

// Dhillon quantile at cumulative hazard e, in log space.
inline double dhillon_log_x_at_chf(double e, double nu, double theta) {
  const double log_a = e > 30.0 ? e + std::log1p(-std::exp(-e)) : std::log(std::expm1(e));
  return (log_a - std::log(nu)) / theta;
}
inline double exppower_log_x_at_chf(double e, double tau, double zeta) {
  return std::log(std::log1p(e)) / tau - std::log(zeta);
}

}  // namespace detail

/// Solves bfm_chf(x) = target for x, target > 0.
inline double bfm_chf_inverse(double target, const BfmParams& p) {
  if (!(target > 0.0) || !std::isfinite(target)) throw DomainError("bfm_chf_inverse: target must be positive");
  // At the smaller component root for the full target the total hazard is
  // >= target; at the smaller root for half the target it is <= target.
  const double hi = std::min(detail::dhillon_log_x_at_chf(target, p.nu(), p.theta()),
                             detail::exppower_log_x_at_chf(target, p.tau(), p.zeta()));
  const double lo = std::min(detail::dhillon_log_x_at_chf(0.5 * target, p.nu(), p.theta()),
                             detail::exppower_log_x_at_chf(0.5 * target, p.tau(), p.zeta()));
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ConvergenceError("bfm_chf_inverse: bracket not representable", 0.0, lo, hi);
  if (hi <= lo) return std::exp(hi);
  auto g = [&](double s) { return bfm_chf(std::exp(s), p) - target; };
  // When one component dominates, an endpoint is the root up to rounding.
  if (g(hi) <= 0.0) return std::exp(hi);
  if (g(lo) >= 0.0) return std::exp(lo);
  const double s = brent_root(g, lo, hi, 1e-15, 400);
  return std::exp(s);
}

inline double bfm_quantile(double u, const BfmParams& p) {
  detail::require_unit(u, "bfm_quantile");
  const double x = bfm_chf_inverse(-std::log1p(-u), p);
  if (std::abs(bfm_cdf(x, p) - u) > 1e-10)
    throw ConvergenceError("bfm_quantile: root refinement did not reach |du| < 1e-10", x);
  return x;
}

inline LifetimeDraw bfm_draw(const BfmParams& p, Rng& rng) {
  const double x1 = dhillon_quantile(rng.uniform(), p.nu(), p.theta());
  const double x2 = exppower_quantile(rng.uniform(), p.tau(), p.zeta());
  return x1 < x2 ? LifetimeDraw{x1, CauseLabel::Cause1} : LifetimeDraw{x2, CauseLabel::Cause2};
}

inline std::vector<LifetimeDraw> bfm_sample(const BfmParams& p, std::size_t count, Rng& rng) {
  if (count < 1) throw ConfigError("bfm_sample: count must be >= 1");
  std::vector<LifetimeDraw> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(bfm_draw(p, rng));
  return out;
}

/// Draws use mt19937_64 seeded with `seed`; each draw consumes two uniforms.
inline std::vector<LifetimeDraw> bfm_sample(const BfmParams& p, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  return bfm_sample(p, count, rng);
}

}  // namespace bfm
