#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bfm/dataset.hpp"
#include "bfm/distribution.hpp"
#include "bfm/error.hpp"
#include "bfm/hazard_model.hpp"
#include "bfm/optimize.hpp"
#include "bfm/parallel.hpp"
#include "bfm/rng.hpp"

namespace bfm {

inline double bfm_nll(const BfmParams& p, std::span<const CensoredObservation> obs) {
  double s = 0.0;
  for (const auto& o : obs) {
    double term = bfm_chf(o.time, p);
    if (is_failure(o.status)) term -= bfm_log_frf(o.time, p);
    if (!std::isfinite(term)) return std::numeric_limits<double>::infinity();
    s += term;
  }
  return s;
}

inline double bfm_nll(const BfmParams& p, const Dataset& data) { return bfm_nll(p, data.observations); }

/// Analytic gradient of bfm_nll in (nu, theta, tau, zeta).
inline std::array<double, 4> bfm_nll_grad(const BfmParams& p, std::span<const CensoredObservation> obs) {
  const double nu = p.nu(), th = p.theta(), ta = p.tau(), ze = p.zeta();
  std::array<double, 4> g{0.0, 0.0, 0.0, 0.0};
  for (const auto& o : obs) {
    const double x = o.time;
    const double lx = std::log(x), lzx = std::log(ze * x);
    const double a = std::exp(std::log(nu) + th * lx);
    const double z = std::exp(ta * lzx);
    const double ez = std::exp(z);
    g[0] += a / (nu * (1.0 + a));
    g[1] += a * lx / (1.0 + a);
    g[2] += ez * z * lzx;
    g[3] += ez * ta * z / ze;
    if (!is_failure(o.status)) continue;
    // Component weights r_k / r computed from log hazards.
    const double l1 = dhillon_log_frf(x, nu, th), l2 = exppower_log_frf(x, ta, ze);
    const double lr = log_add_exp(l1, l2);
    const double w1 = std::exp(l1 - lr), w2 = std::exp(l2 - lr);
    g[0] -= w1 / (nu * (1.0 + a));
    g[1] -= w1 * (1.0 / th - lx * a / (1.0 + a) + lx);
    g[2] -= w2 * (1.0 / ta + (1.0 + z) * lzx);
    g[3] -= w2 * ta * (1.0 + z) / ze;
  }
  return g;
}

inline std::array<double, 4> bfm_nll_grad(const BfmParams& p, const Dataset& data) {
  return bfm_nll_grad(p, data.observations);
}

/// The BFM as a generic HazardModel, parameters in canonical order.
inline HazardModel bfm_model() {
  HazardModel m;
  m.name = "BFM";
  m.param_names = {"nu", "theta", "tau", "zeta"};
  auto bp = [](std::span<const double> p) { return BfmParams(p[0], p[1], p[2], p[3]); };
  m.log_frf = [bp](double x, std::span<const double> p) { return bfm_log_frf(x, bp(p)); };
  m.chf = [bp](double x, std::span<const double> p) { return bfm_chf(x, bp(p)); };
  m.log_frf1 = [](double x, std::span<const double> p) { return dhillon_log_frf(x, p[0], p[1]); };
  m.log_frf2 = [](double x, std::span<const double> p) { return exppower_log_frf(x, p[2], p[3]); };
  m.nll_gradient = [bp](std::span<const CensoredObservation> obs, std::span<const double> p) {
    const auto g = bfm_nll_grad(bp(p), obs);
    return std::vector<double>(g.begin(), g.end());
  };
  m.initial_guesses = [](const Dataset& d) {
    auto t = d.failure_times();
    if (t.empty()) t = d.times_with(Status::censored);
    std::sort(t.begin(), t.end());
    const double med = t[t.size() / 2], hi = t.back();
    return std::vector<std::vector<double>>{
        {1.0 / med, 1.0, 2.0, 1.0 / hi},
        {std::pow(med, -0.5), 0.5, 5.0, 1.0 / hi},
        {std::pow(med, -3.0), 3.0, 0.5, 0.5 / hi},
    };
  };
  m.time_power = {0, 0, 0, -1};
  set_default_bounds(m, {1, 2});
  return m;
}

enum class ParamSpace { log, natural };

struct MleConfig {
  int max_iterations = 4000;    // Nelder-Mead budget per simplex run
  int random_starts = 8;        // log-uniform starts added to the supplied ones
  std::uint64_t seed = 20240531;
  bool polish = true;           // gradient polish after the simplex
  ParamSpace space = ParamSpace::log;
  unsigned threads = 0;         // 0: hardware concurrency
  bool compute_information = true;
};

struct MleFit {
  std::vector<double> params;
  double nll = std::numeric_limits<double>::infinity();
  std::vector<double> std_devs;
  std::vector<std::pair<double, double>> aci;
  bool converged = false;
  int iterations = 0;
  double condition_number = 0.0;
  bool information_ok = false;
  bool at_bound = false;  // some parameter sits on the optimiser's search box
};

/// Median failure time (or median time if nothing failed).
inline double data_timescale(const Dataset& data) {
  auto t = data.failure_times();
  if (t.empty())
    for (const auto& o : data.observations) t.push_back(o.time);
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

/// Model heuristics plus `count` log-uniform starts on [1e-4, 10] per
/// parameter, multiplied by T^k with T the data timescale and k the
/// parameter's time power.
inline std::vector<std::vector<double>> default_starts(const HazardModel& m, const Dataset& data, int count,
                                                       std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  if (m.initial_guesses)
    for (auto& s : m.initial_guesses(data)) out.push_back(std::move(s));
  const double ts = data_timescale(data);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    std::vector<double> s(m.param_count());
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double k_pow = k < m.time_power.size() ? m.time_power[k] : 0;
      s[k] = std::pow(10.0, -4.0 + 5.0 * rng.uniform()) * std::pow(ts, k_pow);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline OptimResult fit_from(const HazardModel& m, std::span<const CensoredObservation> obs,
                            const std::vector<double>& start, const MleConfig& cfg) {
  const std::size_t n = start.size();
  if (cfg.space == ParamSpace::natural) {
    // Coordinates are p / start, so the simplex step is relative to each start value.
    auto f = [&](const std::vector<double>& u) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = u[k] * start[k];
      }
      if (!m.in_bounds(p)) return std::numeric_limits<double>::infinity();
      return model_nll(m, p, obs);
    };
    OptimResult r = nelder_mead(f, std::vector<double>(n, 1.0), 0.3, cfg.max_iterations);
    for (int restart = 0; restart < 2; ++restart) {
      const double scale = *std::max_element(r.x.begin(), r.x.end());
      auto again = nelder_mead(f, r.x, 0.05 * scale, cfg.max_iterations);
      again.iterations += r.iterations;
      if (!(again.f < r.f - 1e-12)) {
        r.iterations = again.iterations;
        break;
      }
      r = again;
    }
    for (std::size_t k = 0; k < n; ++k) r.x[k] *= start[k];
    return r;
  }

  auto f = [&](const std::vector<double>& y) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = std::exp(y[k]);
    if (!m.in_bounds(p)) return std::numeric_limits<double>::infinity();
    return model_nll(m, p, obs);
  };
  std::vector<double> y0(n);
  for (std::size_t k = 0; k < n; ++k) y0[k] = std::log(start[k]);
  OptimResult r = nelder_mead(f, y0, 0.5, cfg.max_iterations);
  // Restart from the best vertex: guards against a collapsed simplex.
  for (int restart = 0; restart < 3; ++restart) {
    auto again = nelder_mead(f, r.x, 0.1, cfg.max_iterations);
    const int total = r.iterations + again.iterations;
    const bool better = again.f < r.f - 1e-10 * std::max(1.0, std::abs(r.f));
    if (again.f <= r.f) r = again;
    r.iterations = total;
    if (!better) break;
  }
  if (cfg.polish && std::isfinite(r.f)) {
    auto grad = [&](const std::vector<double>& y) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = std::exp(y[k]);
      std::vector<double> g;
      if (m.nll_gradient) {
        g = m.nll_gradient(obs, p);
        for (std::size_t k = 0; k < n; ++k) g[k] *= p[k];
      } else {
        g = fd_gradient(f, y, 1e-6);
      }
      return g;
    };
    auto pol = bfgs(f, grad, r.x, 500, 1e-10);
    if (pol.f <= r.f) {
      pol.iterations += r.iterations;
      // Keep the simplex convergence verdict when the polish could not lower f further.
      pol.converged = pol.converged || r.converged;
      r = pol;
    } else {
      r.iterations += pol.iterations;
    }
  }
  for (auto& v : r.x) v = std::exp(v);
  return r;
}

}  // namespace detail

/// Central-difference Hessian of f at x with per-coordinate step h * |x_k|.
template <class F>
Eigen::MatrixXd hessian_central(F&& f, const std::vector<double>& x, double h = 1e-4) {
  const std::size_t n = x.size();
  Eigen::MatrixXd H(n, n);
  std::vector<double> step(n);
  for (std::size_t k = 0; k < n; ++k) step[k] = h * std::max(std::abs(x[k]), 1e-300);
  const double f0 = f(x);
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    std::vector<double> y = x;
    y[i] += si;
    y[j] += sj;
    return f(y);
  };
  for (std::size_t i = 0; i < n; ++i) {
    H(i, i) = (at(i, step[i], i, 0.0) - 2.0 * f0 + at(i, -step[i], i, 0.0)) / (step[i] * step[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (at(i, step[i], j, step[j]) - at(i, step[i], j, -step[j]) - at(i, -step[i], j, step[j]) +
                        at(i, -step[i], j, -step[j])) /
                       (4.0 * step[i] * step[j]);
      H(i, j) = H(j, i) = v;
    }
  }
  return H;
}

/// Hessian as the symmetrised central-difference Jacobian of a gradient.
template <class G>
Eigen::MatrixXd hessian_from_gradient(G&& grad, const std::vector<double>& x, double h = 1e-5) {
  const std::size_t n = x.size();
  Eigen::MatrixXd H(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = h * std::max(std::abs(x[j]), 1e-300);
    std::vector<double> xp = x, xm = x;
    xp[j] += s;
    xm[j] -= s;
    const auto gp = grad(xp), gm = grad(xm);
    for (std::size_t i = 0; i < n; ++i) H(i, j) = (gp[i] - gm[i]) / (2.0 * s);
  }
  return 0.5 * (H + H.transpose());
}

struct Information {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd covariance;
  std::vector<double> std_devs;
  std::vector<std::pair<double, double>> aci;
  double condition_number = 0.0;
};

/// Inverts an observed-information matrix. Wald 95% intervals are clamped below at 0.
inline Information information_from_hessian(const Eigen::MatrixXd& H, const std::vector<double>& estimate) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("information matrix: eigen decomposition failed");
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff(), hi = ev.cwiseAbs().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || cond > 1e15)
    throw NumericalError("information matrix is singular or not positive definite (condition " +
                             std::to_string(cond) + ")",
                         cond);
  Information out;
  out.matrix = H;
  out.covariance = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  out.condition_number = cond;
  for (Eigen::Index k = 0; k < H.rows(); ++k) {
    const double sd = std::sqrt(std::max(0.0, out.covariance(k, k)));
    out.std_devs.push_back(sd);
    out.aci.emplace_back(std::max(0.0, estimate[k] - 1.96 * sd), estimate[k] + 1.96 * sd);
  }
  return out;
}

/// Observed information at p_hat from the numerical Hessian of the nll in
/// natural parameters.
inline Information observed_information(const HazardModel& m, const std::vector<double>& p_hat,
                                        std::span<const CensoredObservation> obs) {
  m.check(p_hat);
  Eigen::MatrixXd H;
  if (m.nll_gradient) {
    H = hessian_from_gradient([&](const std::vector<double>& p) { return m.nll_gradient(obs, p); }, p_hat);
  } else {
    H = hessian_central([&](const std::vector<double>& p) { return model_nll(m, p, obs); }, p_hat);
  }
  return information_from_hessian(H, p_hat);
}

/// Multi-start maximum likelihood. Starts run concurrently; the lowest nll wins
/// (ties broken by start order, so the result does not depend on scheduling).
inline MleFit fit_mle(const HazardModel& m, const Dataset& data, std::vector<std::vector<double>> starts,
                      const MleConfig& cfg = {}) {
  data.validate();
  if (starts.empty()) throw ConfigError("fit_mle: need at least one start");
  for (const auto& s : starts) m.check(s);
  std::vector<OptimResult> results(starts.size());
  const std::span<const CensoredObservation> obs(data.observations);
  parallel_for(
      starts.size(), [&](std::size_t i) { results[i] = detail::fit_from(m, obs, starts[i], cfg); }, cfg.threads);

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].f < results[best].f) best = i;
  const OptimResult& r = results[best];
  MleFit fit;
  fit.params = r.x;
  fit.nll = r.f;
  fit.iterations = r.iterations;
  fit.converged = std::isfinite(r.f) && r.converged;
  for (std::size_t k = 0; k < fit.params.size(); ++k) {
    const double v = fit.params[k];
    if ((k < m.lower_bounds.size() && v <= m.lower_bounds[k] * (1.0 + 1e-6)) ||
        (k < m.upper_bounds.size() && v >= m.upper_bounds[k] * (1.0 - 1e-6)))
      fit.at_bound = true;
  }
  if (!std::isfinite(r.f) || !cfg.compute_information) return fit;
  try {
    const auto info = observed_information(m, fit.params, obs);
    fit.std_devs = info.std_devs;
    fit.aci = info.aci;
    fit.condition_number = info.condition_number;
    fit.information_ok = true;
  } catch (const NumericalError& e) {
    fit.condition_number = e.condition_number();
    fit.std_devs.assign(fit.params.size(), std::numeric_limits<double>::quiet_NaN());
    fit.aci.assign(fit.params.size(), {std::numeric_limits<double>::quiet_NaN(),
                                       std::numeric_limits<double>::quiet_NaN()});
  } catch (const DomainError&) {
    fit.std_devs.assign(fit.params.size(), std::numeric_limits<double>::quiet_NaN());
    fit.aci.assign(fit.params.size(), {std::numeric_limits<double>::quiet_NaN(),
                                       std::numeric_limits<double>::quiet_NaN()});
  }
  return fit;
}

/// fit_mle with default_starts.
inline MleFit fit_mle(const HazardModel& m, const Dataset& data, const MleConfig& cfg = {}) {
  return fit_mle(m, data, default_starts(m, data, cfg.random_starts, cfg.seed), cfg);
}

}  // namespace bfm
