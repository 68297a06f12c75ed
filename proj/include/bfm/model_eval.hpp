#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfm/dataset.hpp"
#include "bfm/error.hpp"
#include "bfm/hazard_model.hpp"
#include "bfm/mle.hpp"
#include "bfm/models.hpp"
#include "bfm/numerics.hpp"
#include "bfm/parallel.hpp"
#include "bfm/risk.hpp"
#include "bfm/rng.hpp"

namespace bfm {

struct InfoCriteria {
  double aic = 0.0, bic = 0.0, bc = 0.0;
};

/// AIC, BIC and the bridge criterion with penalty n^{2/3} * sum_{k<=p} 1/k.
inline InfoCriteria info_criteria(double nll, int p, std::size_t n) {
  if (n < 1) throw ConfigError("info_criteria: n must be >= 1");
  if (p < 0) throw ConfigError("info_criteria: p must be >= 0");
  double harmonic = 0.0;
  for (int k = 1; k <= p; ++k) harmonic += 1.0 / k;
  const double dn = static_cast<double>(n);
  return {2.0 * nll + 2.0 * p, 2.0 * nll + p * std::log(dn), 2.0 * nll + std::pow(dn, 2.0 / 3.0) * harmonic};
}

struct GofStatistics {
  double ks = 0.0, ad = 0.0, cvm = 0.0;
};

/// One-sample EDF statistics from log u_i and log(1 - u_i), sorted by u.
inline GofStatistics edf_statistics(std::vector<std::pair<double, double>> logs) {
  const std::size_t n = logs.size();
  if (n == 0) throw DomainError("gof: no uncensored observations");
  std::sort(logs.begin(), logs.end());
  const double dn = static_cast<double>(n);
  GofStatistics g;
  double ad = 0.0, cvm = 1.0 / (12.0 * dn);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = std::exp(logs[i].first);
    g.ks = std::max({g.ks, (i + 1.0) / dn - u, u - i / dn});
    ad += (2.0 * i + 1.0) * (logs[i].first + logs[n - 1 - i].second);
    const double dev = u - (2.0 * i + 1.0) / (2.0 * dn);
    cvm += dev * dev;
  }
  g.ad = -dn - ad / dn;
  g.cvm = cvm;
  return g;
}

/// KS, AD and CvM on the uncensored times, transformed by the fitted CDF.
inline GofStatistics gof_statistics(const HazardModel& m, std::span<const double> p, const Dataset& data) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& o : data.observations) {
    if (!is_failure(o.status)) continue;
    const double h = m.chf(o.time, p);
    // log F = log(1 - e^{-H}), log S = -H; both kept finite for the AD sum.
    const double log_f = h > 0.0 ? log1m_exp(-h) : -745.0;
    logs.emplace_back(std::max(log_f, -745.0), std::max(-h, -745.0));
  }
  return edf_statistics(std::move(logs));
}

struct GofPvalues {
  double ks = 0.0, ad = 0.0, cvm = 0.0;
  std::size_t used = 0, dropped = 0;
};

/// Parametric bootstrap. Each replicate draws data.size() lifetimes from the
/// fitted model, censors them at the largest censoring time in the data (if
/// any), refits from the fitted parameters and recomputes the statistics.
/// p = fraction of replicates with a statistic >= the observed one.
inline GofPvalues gof_pvalues(const HazardModel& m, std::span<const double> p, const Dataset& data, int reps,
                              std::uint64_t seed, unsigned threads = 0) {
  if (reps < 1) throw ConfigError("gof_pvalues: bootstrap_reps must be >= 1");
  const GofStatistics obs = gof_statistics(m, p, data);
  double c_max = 0.0;
  bool censored = false;
  for (const auto& o : data.observations)
    if (!is_failure(o.status)) {
      censored = true;
      c_max = std::max(c_max, o.time);
    }
  const std::vector<double> start(p.begin(), p.end());
  std::vector<GofStatistics> stats(reps);
  std::vector<char> ok(reps, 0);
  parallel_for(
      static_cast<std::size_t>(reps),
      [&](std::size_t r) {
        try {
          Rng rng(seed + r);
          Dataset d;
          d.name = "bootstrap";
          for (std::size_t i = 0; i < data.size(); ++i) {
            const double t = model_sample_time(m, start, rng);
            if (censored && t > c_max) d.observations.push_back({c_max, Status::censored});
            else d.observations.push_back({t, Status::failure_cause_unknown});
          }
          MleConfig cfg;
          cfg.random_starts = 0;
          cfg.threads = 1;
          cfg.compute_information = false;
          const MleFit fit = fit_mle(m, d, {start}, cfg);
          if (!std::isfinite(fit.nll)) return;
          stats[r] = gof_statistics(m, fit.params, d);
          ok[r] = 1;
        } catch (const std::exception&) {
          // Replicate dropped; counted below.
        }
      },
      threads);
  GofPvalues out;
  for (int r = 0; r < reps; ++r) {
    if (!ok[r]) {
      ++out.dropped;
      continue;
    }
    ++out.used;
    out.ks += stats[r].ks >= obs.ks;
    out.ad += stats[r].ad >= obs.ad;
    out.cvm += stats[r].cvm >= obs.cvm;
  }
  if (out.used > 0) {
    out.ks /= out.used;
    out.ad /= out.used;
    out.cvm /= out.used;
  }
  return out;
}

inline constexpr int kMetricCount = 7;

inline const std::array<const char*, kMetricCount>& metric_names() {
  static const std::array<const char*, kMetricCount> names{"nll", "aic", "bic", "bc", "ks", "ad", "cvm"};
  return names;
}

struct ModelReport {
  std::string name;
  std::vector<std::string> param_names;
  std::vector<double> params, std_devs;
  double nll = 0.0;
  InfoCriteria ic;
  GofStatistics gof;
  std::optional<GofPvalues> pvalues;
  bool converged = false;
  bool at_bound = false;

  std::array<double, kMetricCount> metrics() const {
    return {nll, ic.aic, ic.bic, ic.bc, gof.ks, gof.ad, gof.cvm};
  }
};

struct EvalReport {
  std::vector<ModelReport> models;
  std::vector<std::array<double, kMetricCount>> ranks;  // per model, per metric
  std::vector<double> average_rank;

  /// Number of metrics on which model i is strictly or jointly smallest.
  int minima(std::size_t i) const {
    int w = 0;
    for (int k = 0; k < kMetricCount; ++k) {
      bool best = true;
      for (std::size_t j = 0; j < models.size(); ++j)
        if (models[j].metrics()[k] < models[i].metrics()[k]) best = false;
      w += best;
    }
    return w;
  }
};

/// Ranks (1 = smallest) per metric with ties sharing the mean rank, and the
/// average rank per model.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double r = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

inline EvalReport rank_models(std::vector<ModelReport> reports) {
  if (reports.size() < 2) throw ConfigError("rank_models: need at least two models");
  EvalReport out;
  out.ranks.assign(reports.size(), {});
  for (int k = 0; k < kMetricCount; ++k) {
    std::vector<double> v;
    for (const auto& r : reports) {
      const double x = r.metrics()[k];
      if (std::isnan(x)) throw ConfigError("rank_models: metric '" + std::string(metric_names()[k]) + "' missing");
      v.push_back(x);
    }
    const auto rk = average_ranks(v);
    for (std::size_t i = 0; i < reports.size(); ++i) out.ranks[i][k] = rk[i];
  }
  for (const auto& row : out.ranks) out.average_rank.push_back(std::accumulate(row.begin(), row.end(), 0.0) / kMetricCount);
  out.models = std::move(reports);
  return out;
}

/// Fitted report for one model: fit, criteria, statistics and optional p-values.
inline ModelReport evaluate_model(const HazardModel& m, const Dataset& data, const MleConfig& cfg,
                                  int bootstrap_reps = 0, std::uint64_t seed = 1,
                                  const std::vector<std::vector<double>>& extra_starts = {}) {
  auto starts = default_starts(m, data, cfg.random_starts, cfg.seed);
  for (const auto& s : extra_starts) starts.push_back(s);
  const MleFit fit = fit_mle(m, data, starts, cfg);
  if (!std::isfinite(fit.nll)) throw ConvergenceError(m.name + ": no start reached a finite likelihood", fit.nll);
  ModelReport r;
  r.name = m.name;
  r.param_names = m.param_names;
  r.params = fit.params;
  r.std_devs = fit.std_devs;
  r.nll = fit.nll;
  r.converged = fit.converged;
  r.at_bound = fit.at_bound;
  r.ic = info_criteria(fit.nll, static_cast<int>(m.param_count()), data.size());
  r.gof = gof_statistics(m, fit.params, data);
  if (bootstrap_reps > 0) r.pvalues = gof_pvalues(m, fit.params, data, bootstrap_reps, seed, cfg.threads);
  return r;
}

/// Cause-specific risks of an additive two-component model.
inline RiskEstimate competitor_risks(const HazardModel& m, std::span<const double> p, double tol = 1e-10) {
  if (!m.has_components()) throw ConfigError(m.name + ": not an additive two-component model");
  m.check(p);
  return two_component_risks([&](double t) { return m.log_frf1(t, p); }, [&](double t) { return m.log_frf2(t, p); },
                             [&](double u) { return model_chf_inverse(m, p, u); }, tol);
}

/// Mean residual life of any HazardModel by quadrature of sf(t) / sf(x).
inline double model_mrl(const HazardModel& m, std::span<const double> p, double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("model_mrl: x must be >= 0");
  const double h0 = x > 0.0 ? m.chf(x, p) : 0.0;
  const double x_end = model_chf_inverse(m, p, h0 + 14.0 * std::log(10.0));
  if (!(x_end > x)) return 0.0;
  auto f = [&](double t) {
    const double v = std::exp(h0 - m.chf(t, p));
    return std::isfinite(v) ? v : 0.0;
  };
  std::vector<double> breaks;
  const double lo = x > 0.0 ? x : x_end * 1e-12;
  for (double s = lo * 10.0; s < x_end; s *= 10.0) breaks.push_back(s);
  for (int k = 1; k < 16; ++k) breaks.push_back(x + (x_end - x) * k / 16.0);
  std::sort(breaks.begin(), breaks.end());
  const QuadratureOptions opt{1e-300, 1e-12, 2000000};
  return integrate(f, x, x_end, opt, breaks).value;
}

struct SurvivalStep {
  double time, survival;
};

/// Kaplan-Meier estimate: one step per distinct failure time.
inline std::vector<SurvivalStep> kaplan_meier(const Dataset& d) {
  auto obs = d.observations;
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) {
    return a.time < b.time || (a.time == b.time && is_failure(a.status) && !is_failure(b.status));
  });
  std::vector<SurvivalStep> out;
  double s = 1.0;
  std::size_t at_risk = obs.size();
  for (std::size_t i = 0; i < obs.size();) {
    std::size_t j = i, deaths = 0;
    while (j < obs.size() && obs[j].time == obs[i].time) {
      deaths += is_failure(obs[j].status);
      ++j;
    }
    if (deaths > 0) {
      s *= 1.0 - static_cast<double>(deaths) / at_risk;
      out.push_back({obs[i].time, s});
    }
    at_risk -= j - i;
    i = j;
  }
  return out;
}

/// Fraction of grid points where reference[i] lies inside [min, max] of the curves.
inline double envelope_coverage(const std::vector<double>& reference, const std::vector<std::vector<double>>& curves) {
  if (curves.empty() || reference.empty()) throw ConfigError("envelope_coverage: need a reference and curves");
  std::size_t in = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& c : curves) {
      if (c.size() != reference.size()) throw ConfigError("envelope_coverage: length mismatch");
      lo = std::min(lo, c[i]);
      hi = std::max(hi, c[i]);
    }
    in += reference[i] >= lo && reference[i] <= hi;
  }
  return static_cast<double>(in) / reference.size();
}

}  // namespace bfm
