#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bfm/dataset.hpp"
#include "bfm/error.hpp"
#include "bfm/numerics.hpp"
#include "bfm/rng.hpp"

namespace bfm {

using ParamFn = std::function<double(double, std::span<const double>)>;

/// A lifetime model given by its log failure rate and cumulative hazard.
/// All parameters are strictly positive.
struct HazardModel {
  std::string name;
  std::vector<std::string> param_names;
  ParamFn log_frf;
  ParamFn chf;
  // Optional: per-cause log hazards for additive two-cause models.
  ParamFn log_frf1, log_frf2;
  // Optional: analytic gradient of the negative log-likelihood in natural parameters.
  std::function<std::vector<double>(std::span<const CensoredObservation>, std::span<const double>)> nll_gradient;
  // Optional: data-driven starting points for the optimiser.
  std::function<std::vector<std::vector<double>>(const Dataset&)> initial_guesses;
  // Exponent k such that parameter h scales like T^k with the time unit T (0 if not a pure scale).
  std::vector<int> time_power;
  // Search box used by the optimiser. Empty means (0, inf). Upper limits on
  // shape exponents keep fits away from point-mass spikes at an observed time.
  std::vector<double> lower_bounds, upper_bounds;

  std::size_t param_count() const { return param_names.size(); }
  bool has_components() const { return static_cast<bool>(log_frf1) && static_cast<bool>(log_frf2); }

  void check(std::span<const double> p) const {
    if (p.size() != param_count())
      throw DomainError(name + ": expected " + std::to_string(param_count()) + " parameters");
    for (double v : p)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(name + ": parameters must be finite and > 0");
  }
  bool in_bounds(std::span<const double> p) const {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!(p[k] > 0.0) || !std::isfinite(p[k])) return false;
      if (k < lower_bounds.size() && p[k] < lower_bounds[k]) return false;
      if (k < upper_bounds.size() && p[k] > upper_bounds[k]) return false;
    }
    return true;
  }
  double frf(double x, std::span<const double> p) const { return std::exp(log_frf(x, p)); }
  double sf(double x, std::span<const double> p) const { return std::exp(-chf(x, p)); }
  double cdf(double x, std::span<const double> p) const { return -std::expm1(-chf(x, p)); }
};

/// Default search box: [1e-10, 1e6] per parameter, shape exponents capped at 50.
inline void set_default_bounds(HazardModel& m, const std::vector<std::size_t>& shape_indices) {
  m.lower_bounds.assign(m.param_count(), 1e-10);
  m.upper_bounds.assign(m.param_count(), 1e6);
  for (auto k : shape_indices) m.upper_bounds[k] = 50.0;
}

/// -sum[failure * log r(x) - H(x)]; +inf when any term is not finite.
inline double model_nll(const HazardModel& m, std::span<const double> p, std::span<const CensoredObservation> obs) {
  double s = 0.0;
  for (const auto& o : obs) {
    const double h = m.chf(o.time, p);
    double term = h;
    if (is_failure(o.status)) term -= m.log_frf(o.time, p);
    if (!std::isfinite(term)) return std::numeric_limits<double>::infinity();
    s += term;
  }
  return s;
}

/// Time t with chf(t) = target, found in log t.
inline double model_chf_inverse(const HazardModel& m, std::span<const double> p, double target) {
  if (!(target > 0.0) || !std::isfinite(target)) throw DomainError(m.name + ": chf target must be positive");
  auto g = [&](double s) {
    const double h = m.chf(std::exp(s), p);
    return (std::isnan(h) ? std::numeric_limits<double>::infinity() : h) - target;
  };
  double lo = 0.0, hi = 0.0, step = 1.0;
  if (g(0.0) < 0.0) {
    while (g(hi) < 0.0) {
      lo = hi;
      hi += step;
      step *= 2.0;
      if (hi > 700.0) throw ConvergenceError(m.name + ": cannot bracket chf inverse", std::exp(hi));
    }
  } else {
    while (g(lo) >= 0.0) {
      hi = lo;
      lo -= step;
      step *= 2.0;
      if (lo < -700.0) return std::exp(lo);
    }
  }
  return std::exp(brent_root(g, lo, hi, 1e-13, 300));
}

/// Inverse-hazard sampling: solves chf(x) = E with E ~ Exp(1).
inline double model_sample_time(const HazardModel& m, std::span<const double> p, Rng& rng) {
  return model_chf_inverse(m, p, rng.exponential());
}

}  // namespace bfm
