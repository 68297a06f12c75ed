#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bfm/dataset.hpp"
#include "bfm/distribution.hpp"
#include "bfm/error.hpp"
#include "bfm/mle.hpp"
#include "bfm/parallel.hpp"
#include "bfm/rng.hpp"

namespace bfm {

struct GammaPrior {
  double a = 1.0;  // shape
  double b = 1.0;  // rate

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw ConfigError("GammaPrior: a and b must be finite and > 0");
  }
  double mean() const { return a / b; }
  double variance() const { return a / (b * b); }
  double log_density(double x) const { return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(x) - b * x; }
  double d_log_density(double x) const { return (a - 1.0) / x - b; }
};

using BfmPriors = std::array<GammaPrior, 4>;

/// Prior mean at the given estimate with rate b: a = b * estimate.
inline BfmPriors priors_centered_at(std::span<const double> estimate, double b = 2.0) {
  if (estimate.size() != 4) throw ConfigError("priors_centered_at: need 4 values");
  BfmPriors pr;
  for (int k = 0; k < 4; ++k) {
    pr[k] = {b * estimate[k], b};
    pr[k].validate();
  }
  return pr;
}

struct HmcConfig {
  double epsilon = 0.02;
  int leapfrog_steps = 25;
  std::vector<double> mass_diag{1.0, 1.0, 1.0, 1.0};
  int iterations = 2000;  // S, including warm-up
  int warmup = 1000;      // S0
  int chains = 4;
  std::uint64_t seed = 20240531;
  bool adapt = true;      // tune epsilon toward 0.6-0.9 acceptance during warm-up
  unsigned threads = 0;

  void validate(std::size_t dim) const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("HmcConfig: epsilon must be > 0");
    if (leapfrog_steps < 1) throw ConfigError("HmcConfig: leapfrog_steps must be >= 1");
    if (iterations < 1) throw ConfigError("HmcConfig: iterations must be >= 1");
    if (warmup < 0 || warmup >= iterations) throw ConfigError("HmcConfig: need 0 <= warmup < iterations");
    if (chains < 1) throw ConfigError("HmcConfig: chains must be >= 1");
    if (mass_diag.size() != dim) throw ConfigError("HmcConfig: mass_diag has the wrong length");
    for (double m : mass_diag)
      if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("HmcConfig: mass_diag entries must be > 0");
  }
};

/// Kick-drift-kick integration of dq/dt = p / m, dp/dt = -grad U(q).
/// Returns false (state unusable) if anything becomes non-finite.
template <class GradU>
bool leapfrog(std::vector<double>& q, std::vector<double>& p, double epsilon, int steps,
              std::span<const double> mass_diag, GradU&& grad_u) {
  if (!(epsilon > 0.0)) throw ConfigError("leapfrog: epsilon must be > 0");
  if (steps < 1) throw ConfigError("leapfrog: steps must be >= 1");
  const std::size_t n = q.size();
  std::vector<double> g = grad_u(q);
  for (int s = 0; s < steps; ++s) {
    for (std::size_t i = 0; i < n; ++i) p[i] -= 0.5 * epsilon * g[i];
    for (std::size_t i = 0; i < n; ++i) q[i] += epsilon * p[i] / mass_diag[i];
    g = grad_u(q);
    for (std::size_t i = 0; i < n; ++i) p[i] -= 0.5 * epsilon * g[i];
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(q[i]) || !std::isfinite(p[i])) return false;
  }
  return true;
}

struct ChainResult {
  std::vector<std::vector<double>> draws;  // kept iterations x dim
  double accept_rate = 0.0;
  int divergences = 0;
  double epsilon = 0.0;  // step size used after warm-up
};

/// One HMC chain on an unconstrained target with log density log_p.
template <class LogP, class Grad>
ChainResult hmc_chain(LogP&& log_p, Grad&& grad_log_p, std::vector<double> q, const HmcConfig& cfg,
                      std::uint64_t seed) {
  const std::size_t n = q.size();
  cfg.validate(n);
  Rng rng(seed);
  auto grad_u = [&](const std::vector<double>& x) {
    auto g = grad_log_p(x);
    for (auto& v : g) v = -v;
    return g;
  };
  double lp = log_p(q);
  if (!std::isfinite(lp)) throw DomainError("hmc: initial state has non-finite log density");

  ChainResult out;
  double eps = cfg.epsilon;
  int window_accept = 0, window_size = 0, kept_accept = 0;
  std::vector<double> p(n);
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool warm = it < cfg.warmup;
    double kinetic = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::sqrt(cfg.mass_diag[i]) * rng.normal();
      kinetic += 0.5 * p[i] * p[i] / cfg.mass_diag[i];
    }
    const double h0 = -lp + kinetic;
    std::vector<double> q1 = q, p1 = p;
    bool ok = leapfrog(q1, p1, eps, cfg.leapfrog_steps, cfg.mass_diag, grad_u);
    double lp1 = ok ? log_p(q1) : -std::numeric_limits<double>::infinity();
    bool accepted = false;
    if (ok && std::isfinite(lp1)) {
      double k1 = 0.0;
      for (std::size_t i = 0; i < n; ++i) k1 += 0.5 * p1[i] * p1[i] / cfg.mass_diag[i];
      const double h1 = -lp1 + k1;
      if (h1 - h0 > 1000.0) {
        ++out.divergences;
      } else if (std::log(rng.uniform()) < h0 - h1) {
        accepted = true;
      }
    } else {
      ++out.divergences;
    }
    if (accepted) {
      q = q1;
      lp = lp1;
    }
    if (warm) {
      window_accept += accepted;
      if (++window_size == 50) {
        if (cfg.adapt) {
          const double rate = static_cast<double>(window_accept) / window_size;
          if (rate < 0.6) eps *= 0.8;
          else if (rate > 0.9) eps *= 1.2;
        }
        window_accept = window_size = 0;
      }
    } else {
      kept_accept += accepted;
      out.draws.push_back(q);
    }
  }
  const int kept = cfg.iterations - cfg.warmup;
  out.accept_rate = static_cast<double>(kept_accept) / kept;
  out.epsilon = eps;
  return out;
}

struct PosteriorChains {
  // [chain][kept iteration][parameter]
  std::vector<std::vector<std::vector<double>>> draws;
  std::vector<std::vector<std::vector<double>>> log_draws;
  std::vector<double> accept_rate;
  std::vector<int> divergences;
  std::vector<double> epsilon;
  std::vector<bool> healthy;

  std::size_t chain_count() const { return draws.size(); }
  std::size_t kept() const { return draws.empty() ? 0 : draws.front().size(); }
  std::size_t dim() const { return kept() == 0 ? 0 : draws.front().front().size(); }
};

/// Runs cfg.chains chains concurrently; chain i uses seed + i.
template <class LogP, class Grad>
PosteriorChains hmc_sample(LogP&& log_p, Grad&& grad_log_p, const std::vector<double>& init, const HmcConfig& cfg) {
  cfg.validate(init.size());
  std::vector<ChainResult> res(cfg.chains);
  parallel_for(
      res.size(), [&](std::size_t c) { res[c] = hmc_chain(log_p, grad_log_p, init, cfg, cfg.seed + c); },
      cfg.threads);
  PosteriorChains out;
  const int kept = cfg.iterations - cfg.warmup;
  for (auto& r : res) {
    out.log_draws.push_back(r.draws);
    out.draws.push_back(std::move(r.draws));
    out.accept_rate.push_back(r.accept_rate);
    out.divergences.push_back(r.divergences);
    out.epsilon.push_back(r.epsilon);
    out.healthy.push_back(r.accept_rate >= 0.1 && r.accept_rate <= 0.99 && r.divergences <= 0.1 * kept);
  }
  return out;
}

/// log posterior of y = log(params) for the BFM: log likelihood + log Gamma
/// priors (with constants) + log Jacobian sum(y).
inline double log_posterior(std::span<const double> log_p, std::span<const CensoredObservation> obs,
                            const BfmPriors& priors) {
  std::array<double, 4> x;
  for (int k = 0; k < 4; ++k) {
    x[k] = std::exp(log_p[k]);
    if (!(x[k] > 0.0) || !std::isfinite(x[k])) return -std::numeric_limits<double>::infinity();
  }
  const double nll = bfm_nll(BfmParams(x[0], x[1], x[2], x[3]), obs);
  if (!std::isfinite(nll)) return -std::numeric_limits<double>::infinity();
  double s = -nll;
  for (int k = 0; k < 4; ++k) s += priors[k].log_density(x[k]) + log_p[k];
  return std::isfinite(s) ? s : -std::numeric_limits<double>::infinity();
}

inline std::vector<double> log_posterior_grad(std::span<const double> log_p,
                                              std::span<const CensoredObservation> obs, const BfmPriors& priors) {
  std::array<double, 4> x;
  for (int k = 0; k < 4; ++k) x[k] = std::exp(log_p[k]);
  std::vector<double> g(4);
  for (int k = 0; k < 4; ++k)
    if (!(x[k] > 0.0) || !std::isfinite(x[k])) {
      g.assign(4, std::numeric_limits<double>::quiet_NaN());
      return g;
    }
  const auto gn = bfm_nll_grad(BfmParams(x[0], x[1], x[2], x[3]), obs);
  for (int k = 0; k < 4; ++k) g[k] = x[k] * (-gn[k] + priors[k].d_log_density(x[k])) + 1.0;
  return g;
}

/// BFM posterior sampling in log-parameter space, started at init (natural scale).
inline PosteriorChains hmc_run(const Dataset& data, const BfmPriors& priors, const HmcConfig& cfg,
                               std::span<const double> init) {
  for (const auto& pr : priors) pr.validate();
  if (init.size() != 4) throw ConfigError("hmc_run: init must have 4 values");
  std::vector<double> y0(4);
  for (int k = 0; k < 4; ++k) {
    if (!(init[k] > 0.0)) throw DomainError("hmc_run: init must be strictly positive");
    y0[k] = std::log(init[k]);
  }
  const std::span<const CensoredObservation> obs(data.observations);
  auto lp = [&](const std::vector<double>& y) { return log_posterior(y, obs, priors); };
  auto gr = [&](const std::vector<double>& y) { return log_posterior_grad(y, obs, priors); };
  PosteriorChains out = hmc_sample(lp, gr, y0, cfg);
  for (auto& chain : out.draws)
    for (auto& d : chain)
      for (auto& v : d) v = std::exp(v);
  return out;
}

struct Interval {
  double lo = 0.0, hi = 0.0;
};

struct PosteriorSummary {
  std::vector<double> mean, sd;
  std::vector<Interval> hpd95;
  std::vector<double> rhat;  // NaN when fewer than two chains
};

/// Shortest interval holding ceil(mass * n) of the sorted values.
inline Interval shortest_interval(std::vector<double> v, double mass = 0.95) {
  if (v.empty()) throw DomainError("shortest_interval: no values");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(mass * n)));
  std::size_t best = 0;
  double width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + k <= n; ++i) {
    const double w = v[i + k - 1] - v[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {v[best], v[best + k - 1]};
}

/// Classic between/within potential scale reduction factor for one parameter.
inline double psrf(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = chains.front().size();
  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double s = 0.0;
    for (double v : chains[c]) s += v;
    means[c] = s / n;
    double ss = 0.0;
    for (double v : chains[c]) ss += (v - means[c]) * (v - means[c]);
    w += ss / (n - 1);
  }
  w /= m;
  double gm = 0.0;
  for (double v : means) gm += v;
  gm /= m;
  double b = 0.0;
  for (double v : means) b += (v - gm) * (v - gm);
  b *= static_cast<double>(n) / (m - 1);
  if (w == 0.0) {
    if (b > 0.0) throw NumericalError("psrf: constant chains that disagree");
    return 1.0;
  }
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

inline PosteriorSummary summarize(const PosteriorChains& chains) {
  const std::size_t m = chains.chain_count(), n = chains.kept(), d = chains.dim();
  if (m < 1 || n < 10) throw ConfigError("summarize: need at least one chain with >= 10 kept draws");
  for (const auto& c : chains.draws)
    if (c.size() != n) throw ConfigError("summarize: chains have different lengths");
  PosteriorSummary out;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<std::vector<double>> per(m);
    std::vector<double> pooled;
    pooled.reserve(m * n);
    for (std::size_t c = 0; c < m; ++c)
      for (const auto& draw : chains.draws[c]) {
        per[c].push_back(draw[k]);
        pooled.push_back(draw[k]);
      }
    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= pooled.size();
    double ss = 0.0;
    for (double v : pooled) ss += (v - mean) * (v - mean);
    out.mean.push_back(mean);
    out.sd.push_back(std::sqrt(ss / (pooled.size() - 1)));
    out.hpd95.push_back(shortest_interval(pooled));
    out.rhat.push_back(psrf(per));
  }
  return out;
}

/// Simulated datasets of n_obs complete lifetimes at the posterior mean;
/// set i uses seed + i.
inline std::vector<Dataset> posterior_predictive_sets(const PosteriorChains& chains, std::size_t n_obs,
                                                      std::size_t count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("posterior_predictive_sets: count must be >= 1");
  const auto s = summarize(chains);
  const BfmParams p = BfmParams::from_span(s.mean);
  std::vector<Dataset> out;
  for (std::size_t i = 0; i < count; ++i) {
    Dataset d;
    d.name = "predictive-" + std::to_string(i + 1);
    for (const auto& draw : bfm_sample(p, n_obs, seed + i))
      d.observations.push_back(
          {draw.time, draw.cause == CauseLabel::Cause1 ? Status::failure_cause1 : Status::failure_cause2});
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace bfm
