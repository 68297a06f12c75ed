#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bfm/bfm.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumerical = 4;
constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_dir;
  std::uint64_t seed = 20240531;
  unsigned threads = 0;
};

struct Output {
  std::string command;
  json report = json::object();
  std::string text;
  std::map<std::string, std::string> extra_files;  // name -> content
};

std::vector<double> parse_list(const std::string& s, std::size_t expected, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double x = 0.0;
    if (!bfm::detail::parse_double(item, x)) throw UsageError(std::string(what) + ": '" + item + "' is not a number");
    v.push_back(x);
  }
  if (expected > 0 && v.size() != expected)
    throw UsageError(std::string(what) + ": expected " + std::to_string(expected) + " comma-separated values");
  return v;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string fmt(double v, int prec = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json dataset_json(const bfm::Dataset& d) {
  const auto c = d.counts();
  return {{"name", d.name},           {"time_unit", d.time_unit}, {"n", d.size()},
          {"cause1", c.cause1},       {"cause2", c.cause2},       {"cause_unknown", c.unknown},
          {"censored", c.censored}};
}

json risk_json(const bfm::RiskEstimate& r) {
  json j{{"method", bfm::to_string(r.method)}, {"f1", r.f1}, {"f2", r.f2}};
  if (r.detail1) j["f1_series"] = {{"converged", r.detail1->converged}, {"terms", r.detail1->terms_used}};
  if (r.detail2) j["f2_series"] = {{"converged", r.detail2->converged}, {"terms", r.detail2->terms_used}};
  if (r.std_error) j["std_error"] = *r.std_error;
  return j;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return g;
}

std::vector<double> lin_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  return g;
}

double max_time(const bfm::Dataset& d) {
  double m = 0.0;
  for (const auto& o : d.observations) m = std::max(m, o.time);
  return m;
}

bfm::MleFit fit_bfm(const bfm::Dataset& d, const Common& c, int random_starts) {
  bfm::MleConfig cfg;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.random_starts = random_starts;
  const auto fit = bfm::fit_mle(bfm::bfm_model(), d, cfg);
  if (!std::isfinite(fit.nll)) throw bfm::ConvergenceError("BFM fit did not reach a finite likelihood", fit.nll);
  return fit;
}

// ---------------------------------------------------------------- fit-mle

struct FitMleOpts {
  std::string data, model = "BFM";
  int starts = 8;
};

Output cmd_fit_mle(const FitMleOpts& o, const Common& c) {
  const bfm::HazardModel m = bfm::model_by_name(o.model);
  const bfm::Dataset d = bfm::parse_dataset(o.data);
  bfm::MleConfig cfg;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.random_starts = o.starts;
  const bfm::MleFit fit = bfm::fit_mle(m, d, cfg);
  if (!std::isfinite(fit.nll)) throw bfm::ConvergenceError(m.name + ": no start reached a finite likelihood", fit.nll);
  const auto ic = bfm::info_criteria(fit.nll, static_cast<int>(m.param_count()), d.size());

  Output out;
  json params = json::array();
  for (std::size_t k = 0; k < m.param_count(); ++k)
    params.push_back({{"name", m.param_names[k]},
                      {"estimate", fit.params[k]},
                      {"std_dev", num(fit.std_devs[k])},
                      {"aci95", {num(fit.aci[k].first), num(fit.aci[k].second)}}});
  out.report = {{"dataset", dataset_json(d)},
                {"model", m.name},
                {"params", params},
                {"nll", fit.nll},
                {"aic", ic.aic},
                {"bic", ic.bic},
                {"bc", ic.bc},
                {"converged", fit.converged},
                {"at_bound", fit.at_bound},
                {"information_ok", fit.information_ok},
                {"condition_number", num(fit.condition_number)},
                {"iterations", fit.iterations}};
  std::ostringstream t;
  t << "model " << m.name << " on " << d.name << " (n=" << d.size() << ")\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %14s %14s %14s %14s\n", "param", "estimate", "std_dev", "aci_lo", "aci_hi");
  t << line;
  for (std::size_t k = 0; k < m.param_count(); ++k) {
    std::snprintf(line, sizeof line, "%-8s %14.6g %14.6g %14.6g %14.6g\n", m.param_names[k].c_str(), fit.params[k],
                  fit.std_devs[k], fit.aci[k].first, fit.aci[k].second);
    t << line;
  }
  t << "\nnll " << fmt(fit.nll, 8) << "  aic " << fmt(ic.aic, 8) << "  bic " << fmt(ic.bic, 8) << "  bc "
    << fmt(ic.bc, 8) << "\n";
  t << "converged " << (fit.converged ? "yes" : "no") << (fit.at_bound ? "  (a parameter is on the search box)" : "")
    << "\n";
  if (m.name == "BFM") {
    const auto p = bfm::BfmParams::from_span(fit.params);
    const double mt = bfm::mttf(p).value;
    const auto r = bfm::risk_p1(p);
    out.report["mttf"] = mt;
    out.report["risks"] = risk_json(r);
    t << "mttf " << fmt(mt, 8) << "  risks (" << fmt(r.f1, 4) << ", " << fmt(r.f2, 4) << ")\n";
  }
  out.text = t.str();
  return out;
}

// ---------------------------------------------------------------- fit-bayes

struct BayesOpts {
  std::string data;
  int chains = 4, iters = 2000, warmup = 1000, steps = 25;
  double eps = 0.02, prior_rate = 2.0;
  std::string prior_shape, init;
  bool no_adapt = false, dump_draws = false;
};

struct BayesRun {
  bfm::PosteriorChains chains;
  bfm::PosteriorSummary summary;
  std::vector<double> init;
  bfm::BfmPriors priors;
};

BayesRun run_bayes(const bfm::Dataset& d, const BayesOpts& o, const Common& c) {
  BayesRun run;
  if (!o.init.empty()) run.init = parse_list(o.init, 4, "--init");
  else run.init = fit_bfm(d, c, 8).params;
  for (double v : run.init)
    if (!(v > 0.0)) throw UsageError("--init: values must be > 0");
  if (!(o.prior_rate > 0.0)) throw UsageError("--prior-rate must be > 0");
  run.priors = bfm::priors_centered_at(run.init, o.prior_rate);
  if (!o.prior_shape.empty()) {
    const auto a = parse_list(o.prior_shape, 4, "--prior-shape");
    for (int k = 0; k < 4; ++k) run.priors[k].a = a[k];
  }
  for (const auto& pr : run.priors) pr.validate();
  bfm::HmcConfig cfg;
  cfg.epsilon = o.eps;
  cfg.leapfrog_steps = o.steps;
  cfg.iterations = o.iters;
  cfg.warmup = o.warmup;
  cfg.chains = o.chains;
  cfg.seed = c.seed;
  cfg.adapt = !o.no_adapt;
  cfg.threads = c.threads;
  run.chains = bfm::hmc_run(d, run.priors, cfg, run.init);
  run.summary = bfm::summarize(run.chains);
  return run;
}

Output cmd_fit_bayes(const BayesOpts& o, const Common& c) {
  if (o.chains < 1 || o.iters < 1 || o.warmup < 0 || o.warmup >= o.iters || o.steps < 1 || !(o.eps > 0.0))
    throw UsageError("need chains >= 1, iters > warmup >= 0, steps >= 1 and eps > 0");
  const bfm::Dataset d = bfm::parse_dataset(o.data);
  const BayesRun run = run_bayes(d, o, c);
  const auto& s = run.summary;
  static const char* names[] = {"nu", "theta", "tau", "zeta"};

  Output out;
  json params = json::array();
  for (int k = 0; k < 4; ++k)
    params.push_back({{"name", names[k]},
                      {"mean", s.mean[k]},
                      {"sd", s.sd[k]},
                      {"hpd95_shortest", {s.hpd95[k].lo, s.hpd95[k].hi}},
                      {"rhat", num(s.rhat[k])},
                      {"prior", {{"shape", run.priors[k].a}, {"rate", run.priors[k].b}}}});
  json chains = json::array();
  for (std::size_t i = 0; i < run.chains.chain_count(); ++i)
    chains.push_back({{"accept_rate", run.chains.accept_rate[i]},
                      {"divergences", run.chains.divergences[i]},
                      {"epsilon", run.chains.epsilon[i]},
                      {"healthy", static_cast<bool>(run.chains.healthy[i])}});
  const auto pm = bfm::BfmParams::from_span(s.mean);
  out.report = {{"dataset", dataset_json(d)},
                {"init", run.init},
                {"kept_per_chain", run.chains.kept()},
                {"params", params},
                {"chains", chains},
                {"mttf_at_mean", bfm::mttf(pm).value},
                {"risks_at_mean", risk_json(bfm::risk_p1(pm))}};

  std::ostringstream t;
  t << "HMC posterior for BFM on " << d.name << ": " << run.chains.chain_count() << " chains x " << run.chains.kept()
    << " kept draws\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-6s %12s %12s %12s %12s %8s\n", "param", "mean", "sd", "hpd_lo", "hpd_hi", "rhat");
  t << line;
  for (int k = 0; k < 4; ++k) {
    const std::string rh = std::isnan(s.rhat[k]) ? "n/a" : fmt(s.rhat[k], 5);
    std::snprintf(line, sizeof line, "%-6s %12.6g %12.6g %12.6g %12.6g %8s\n", names[k], s.mean[k], s.sd[k],
                  s.hpd95[k].lo, s.hpd95[k].hi, rh.c_str());
    t << line;
  }
  t << "\nchain  accept  divergences  epsilon\n";
  for (std::size_t i = 0; i < run.chains.chain_count(); ++i) {
    std::snprintf(line, sizeof line, "%5zu  %6.3f  %11d  %7.4g%s\n", i, run.chains.accept_rate[i],
                  run.chains.divergences[i], run.chains.epsilon[i], run.chains.healthy[i] ? "" : "  UNHEALTHY");
    t << line;
    if (!run.chains.healthy[i])
      std::cerr << "warning: chain " << i << " is unhealthy (acceptance " << run.chains.accept_rate[i] << ", "
                << run.chains.divergences[i] << " divergences)\n";
  }
  if (run.chains.chain_count() < 2) t << "R-hat unavailable with a single chain\n";
  out.text = t.str();

  if (o.dump_draws) {
    std::string csv = "chain,iteration,nu,theta,tau,zeta\n";
    for (std::size_t ch = 0; ch < run.chains.chain_count(); ++ch)
      for (std::size_t i = 0; i < run.chains.kept(); ++i) {
        csv += std::to_string(ch) + "," + std::to_string(i);
        for (double v : run.chains.draws[ch][i]) csv += "," + bfm::detail::format_double(v);
        csv += "\n";
      }
    out.extra_files["draws.csv"] = csv;
  }
  return out;
}

// ---------------------------------------------------------------- risks

struct RiskOpts {
  std::string params, data;
  int mc_draws = 1000000, grid = 25;
};

Output cmd_risks(const RiskOpts& o, const Common& c) {
  if (o.params.empty() == o.data.empty()) throw UsageError("give exactly one of --params or --data");
  if (o.mc_draws != 0 && o.mc_draws < 10000) throw UsageError("--mc-draws must be 0 or >= 10000");
  if (o.grid < 2) throw UsageError("--grid must be >= 2");
  Output out;
  std::optional<bfm::Dataset> d;
  std::vector<double> v;
  if (!o.params.empty()) {
    v = parse_list(o.params, 4, "--params");
  } else {
    d = bfm::parse_dataset(o.data);
    v = fit_bfm(*d, c, 8).params;
    out.report["dataset"] = dataset_json(*d);
  }
  const auto p = bfm::BfmParams::from_span(v);
  const auto p1 = bfm::risk_p1(p);
  const auto p3 = bfm::risk_p3(p);
  const double mt = bfm::mttf(p).value;
  const auto p2m = bfm::risk_p2(mt, p);
  out.report["params"] = {{"nu", v[0]}, {"theta", v[1]}, {"tau", v[2]}, {"zeta", v[3]}};
  out.report["P1"] = risk_json(p1);
  out.report["P3"] = risk_json(p3);
  out.report["P2_at_mttf"] = {{"x", mt}, {"f1", p2m.f1}, {"f2", p2m.f2}};
  json curve = json::array();
  const auto grid = log_grid(bfm::bfm_quantile(1e-3, p), bfm::bfm_quantile(1.0 - 1e-3, p), o.grid);
  for (double x : grid) {
    const auto r = bfm::risk_p2(x, p);
    curve.push_back({{"x", x}, {"f1", r.f1}, {"f2", r.f2}});
  }
  out.report["P2_curve"] = curve;
  std::optional<bfm::RiskEstimate> mc;
  if (o.mc_draws > 0) {
    mc = bfm::risk_mc(p, static_cast<std::size_t>(o.mc_draws), c.seed);
    out.report["MC"] = risk_json(*mc);
  }
  std::optional<std::pair<double, double>> emp;
  if (d && d->counts().cause1 + d->counts().cause2 > 0) {
    emp = bfm::empirical_risks(*d);
    out.report["empirical"] = {{"f1", emp->first}, {"f2", emp->second}};
  }

  std::ostringstream t;
  t << "BFM risks at (nu, theta, tau, zeta) = (" << fmt(v[0]) << ", " << fmt(v[1]) << ", " << fmt(v[2]) << ", "
    << fmt(v[3]) << ")\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %10s  %s\n", "method", "F1", "F2", "sum", "note");
  t << line;
  auto row = [&](const char* name, double f1, double f2, const std::string& note) {
    std::snprintf(line, sizeof line, "%-16s %10.6f %10.6f %10.6f  %s\n", name, f1, f2, f1 + f2, note.c_str());
    t << line;
  };
  row("P1 quadrature", p1.f1, p1.f2, "");
  row("P2 at mttf", p2m.f1, p2m.f2, "x = " + fmt(mt));
  const bool conv = p3.detail1->converged && p3.detail2->converged;
  row("P3 series", p3.f1, p3.f2, conv ? "converged" : "not converged, truncated at smallest term");
  if (mc) row("Monte Carlo", mc->f1, mc->f2, "se " + fmt(*mc->std_error, 3));
  if (emp) row("empirical", emp->first, emp->second, "");
  out.text = t.str();
  return out;
}

// ---------------------------------------------------------------- compare

struct CompareOpts {
  std::string data, models = "BFM,APD,FACG,FAEPG,EAddW,GExtEW";
  int bootstrap = 199, starts = 24, grid = 200;
};

Output cmd_compare(const CompareOpts& o, const Common& c) {
  const auto names = split_names(o.models);
  if (names.size() < 2) throw UsageError("--models needs at least two models");
  if (o.bootstrap != 0 && o.bootstrap < 199) throw UsageError("--bootstrap must be 0 or >= 199");
  std::vector<bfm::HazardModel> models;
  for (const auto& n : names) models.push_back(bfm::model_by_name(n));
  const bfm::Dataset d = bfm::parse_dataset(o.data);

  bfm::MleConfig cfg;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  cfg.random_starts = o.starts;
  std::vector<bfm::ModelReport> reports;
  std::vector<bfm::HazardModel> fitted;
  json failures = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    try {
      reports.push_back(bfm::evaluate_model(models[i], d, cfg, o.bootstrap, c.seed + 1000 * (i + 1)));
      fitted.push_back(models[i]);
    } catch (const std::exception& e) {
      failures.push_back({{"model", models[i].name}, {"error", e.what()}});
      std::cerr << "warning: " << models[i].name << " dropped: " << e.what() << "\n";
    }
  }
  if (reports.size() < 2) throw bfm::ConvergenceError("fewer than two models could be fitted", 0.0);
  const bfm::EvalReport ev = bfm::rank_models(reports);

  Output out;
  json rows = json::array();
  for (std::size_t i = 0; i < ev.models.size(); ++i) {
    const auto& r = ev.models[i];
    json params = json::object();
    for (std::size_t k = 0; k < r.params.size(); ++k)
      params[r.param_names[k]] = {{"estimate", r.params[k]}, {"std_dev", num(r.std_devs[k])}};
    json row{{"model", r.name}, {"params", params}, {"converged", r.converged}, {"at_bound", r.at_bound}};
    json metrics = json::object(), ranks = json::object();
    const auto mv = r.metrics();
    for (int k = 0; k < bfm::kMetricCount; ++k) {
      metrics[bfm::metric_names()[k]] = mv[k];
      ranks[bfm::metric_names()[k]] = ev.ranks[i][k];
    }
    row["metrics"] = metrics;
    row["ranks"] = ranks;
    row["average_rank"] = ev.average_rank[i];
    row["metrics_minimised"] = ev.minima(i);
    if (r.pvalues)
      row["pvalues"] = {{"ks", r.pvalues->ks},
                        {"ad", r.pvalues->ad},
                        {"cvm", r.pvalues->cvm},
                        {"replicates_used", r.pvalues->used},
                        {"replicates_dropped", r.pvalues->dropped}};
    if (fitted[i].has_components()) row["risks"] = risk_json(bfm::competitor_risks(fitted[i], r.params));
    rows.push_back(row);
  }
  out.report = {{"dataset", dataset_json(d)}, {"models", rows}, {"failed", failures}};
  if (d.counts().cause1 + d.counts().cause2 > 0) {
    const auto e = bfm::empirical_risks(d);
    out.report["empirical_risks"] = {{"f1", e.first}, {"f2", e.second}};
  }

  std::ostringstream t;
  t << "model comparison on " << d.name << " (n=" << d.size() << ")\n\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %10s %8s %8s %8s %8s\n", "model", "nll", "aic", "bic", "bc",
                "ks", "ad", "cvm", "avg_rank");
  t << line;
  for (std::size_t i = 0; i < ev.models.size(); ++i) {
    const auto mv = ev.models[i].metrics();
    std::snprintf(line, sizeof line, "%-8s %10.3f %10.3f %10.3f %10.3f %8.4f %8.4f %8.4f %8.2f%s\n",
                  ev.models[i].name.c_str(), mv[0], mv[1], mv[2], mv[3], mv[4], mv[5], mv[6], ev.average_rank[i],
                  ev.models[i].at_bound ? "  (on search box)" : "");
    t << line;
  }
  if (o.bootstrap > 0) {
    t << "\nbootstrap p-values (" << o.bootstrap << " replicates)\n";
    for (const auto& r : ev.models) {
      std::snprintf(line, sizeof line, "%-8s ks %.3f  ad %.3f  cvm %.3f\n", r.name.c_str(), r.pvalues->ks, r.pvalues->ad,
                    r.pvalues->cvm);
      t << line;
    }
  }
  for (const auto& f : failures) t << "dropped " << f["model"].get<std::string>() << ": " << f["error"].get<std::string>() << "\n";
  out.text = t.str();

  // Plot series: fitted rf/frf/mrl on a shared grid plus the Kaplan-Meier curve.
  const auto grid = lin_grid(max_time(d) * 1e-3, max_time(d), o.grid);
  std::vector<bfm::PlotSeries> rf, frf, mrl;
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    const auto& m = fitted[i];
    const auto& p = ev.models[i].params;
    bfm::PlotSeries a{m.name, bfm::SeriesKind::rf, grid, {}}, b{m.name, bfm::SeriesKind::frf, grid, {}},
        cm{m.name, bfm::SeriesKind::mrl, grid, {}};
    for (double x : grid) {
      a.y.push_back(m.sf(x, p));
      b.y.push_back(m.frf(x, p));
      cm.y.push_back(bfm::model_mrl(m, p, x));
    }
    rf.push_back(std::move(a));
    frf.push_back(std::move(b));
    mrl.push_back(std::move(cm));
  }
  bfm::PlotSeries km{"empirical", bfm::SeriesKind::rf, {}, {}};
  for (const auto& s : bfm::kaplan_meier(d)) {
    km.x.push_back(s.time);
    km.y.push_back(s.survival);
  }
  rf.push_back(km);
  std::vector<bfm::PlotSeries> all;
  for (auto* v : {&rf, &frf, &mrl}) all.insert(all.end(), v->begin(), v->end());
  out.extra_files["series.csv"] = bfm::series_to_csv(all);
  out.extra_files["rf.svg"] = bfm::series_to_svg(rf);
  out.extra_files["frf.svg"] = bfm::series_to_svg(frf);
  out.extra_files["mrl.svg"] = bfm::series_to_svg(mrl);
  return out;
}

// ---------------------------------------------------------------- compat

struct CompatOpts {
  BayesOpts bayes;
  int sets = 5, grid = 100;
};

Output cmd_compat(const CompatOpts& o, const Common& c) {
  if (o.sets < 1) throw UsageError("--sets must be >= 1");
  if (o.grid < 2) throw UsageError("--grid must be >= 2");
  const bfm::Dataset d = bfm::parse_dataset(o.bayes.data);
  const BayesRun run = run_bayes(d, o.bayes, c);
  const auto sets = bfm::posterior_predictive_sets(run.chains, d.size(), o.sets, c.seed);
  const auto observed = bfm::BfmParams::from_span(run.summary.mean);
  const auto grid = lin_grid(max_time(d) * 1e-3, max_time(d), o.grid);

  std::vector<bfm::PlotSeries> frf, rf;
  auto curves = [&](const std::string& name, const bfm::BfmParams& p) {
    bfm::PlotSeries a{name, bfm::SeriesKind::frf, grid, {}}, b{name, bfm::SeriesKind::rf, grid, {}};
    for (double x : grid) {
      a.y.push_back(bfm::bfm_frf(x, p));
      b.y.push_back(bfm::bfm_sf(x, p));
    }
    frf.push_back(std::move(a));
    rf.push_back(std::move(b));
  };
  curves("observed", observed);
  json refits = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    Common ci = c;
    ci.seed = c.seed + 7919 * (i + 1);
    const auto fit = fit_bfm(sets[i], ci, 8);
    curves("simulated-" + std::to_string(i + 1), bfm::BfmParams::from_span(fit.params));
    refits.push_back({{"set", i + 1}, {"params", fit.params}, {"nll", fit.nll}});
  }
  auto coverage = [&](const std::vector<bfm::PlotSeries>& s) {
    std::vector<std::vector<double>> env;
    for (std::size_t i = 1; i < s.size(); ++i) env.push_back(s[i].y);
    return bfm::envelope_coverage(s[0].y, env);
  };
  const double cov_frf = coverage(frf), cov_rf = coverage(rf);

  Output out;
  out.report = {{"dataset", dataset_json(d)},
                {"posterior_mean", run.summary.mean},
                {"sets", o.sets},
                {"refits", refits},
                {"coverage", {{"frf", cov_frf}, {"rf", cov_rf}}}};
  std::ostringstream t;
  t << "predictive compatibility on " << d.name << ": " << o.sets << " simulated sets of " << d.size() << "\n";
  t << "envelope coverage of the observed-fit curves: frf " << fmt(cov_frf, 4) << ", rf " << fmt(cov_rf, 4) << "\n";
  out.text = t.str();
  std::vector<bfm::PlotSeries> all = frf;
  all.insert(all.end(), rf.begin(), rf.end());
  out.extra_files["series.csv"] = bfm::series_to_csv(all);
  out.extra_files["frf.svg"] = bfm::series_to_svg(frf);
  out.extra_files["rf.svg"] = bfm::series_to_svg(rf);
  return out;
}

// ---------------------------------------------------------------- ttt

struct TttOpts {
  std::string data, strata = "c1,c2,all";
};

Output cmd_ttt(const TttOpts& o, const Common&) {
  const auto strata = split_names(o.strata);
  if (strata.empty()) throw UsageError("--strata is empty");
  const bfm::Dataset d = bfm::parse_dataset(o.data);
  Output out;
  json rows = json::array();
  std::vector<bfm::PlotSeries> series;
  std::ostringstream t;
  t << "scaled TTT on " << d.name << "\n\n";
  for (const auto& s : strata) {
    std::vector<double> times;
    if (s == "c1") times = d.times_with(bfm::Status::failure_cause1);
    else if (s == "c2") times = d.times_with(bfm::Status::failure_cause2);
    else if (s == "all") times = d.failure_times();
    else throw UsageError("unknown stratum '" + s + "' (expected c1, c2 or all)");
    if (times.empty()) throw bfm::DataError("stratum '" + s + "' has no failures");
    const auto curve = bfm::scaled_ttt(times);
    const auto shape = bfm::ttt_shape(curve);
    bfm::PlotSeries ps{s, bfm::SeriesKind::ttt, {}, {}};
    for (const auto& pt : curve.points) {
      ps.x.push_back(pt.u);
      ps.y.push_back(pt.phi);
    }
    series.push_back(ps);
    rows.push_back({{"stratum", s},
                    {"failures", times.size()},
                    {"shape", bfm::to_string(shape.shape_label)},
                    {"change_points", shape.locations}});
    t << s << ": " << times.size() << " failures, shape " << bfm::to_string(shape.shape_label) << ", "
      << shape.locations.size() << " change points\n";
  }
  out.report = {{"dataset", dataset_json(d)}, {"strata", rows}};
  out.text = t.str();
  out.extra_files["ttt.csv"] = bfm::series_to_csv(series);
  out.extra_files["ttt.svg"] = bfm::series_to_svg(series);
  return out;
}

void write_outputs(const Output& out, const Common& c, const std::string& config_text) {
  const std::string dir = c.out_dir;
  json files = json::array({"report.json", "report.txt"});
  for (const auto& [name, _] : out.extra_files) files.push_back(name);
  for (const auto& [name, content] : out.extra_files) bfm::write_file_atomic(dir + "/" + name, content);
  bfm::write_file_atomic(dir + "/report.json", out.report.dump(2) + "\n");
  bfm::write_file_atomic(dir + "/report.txt", out.text);
  const json manifest{{"tool", "bfm"},     {"version", kVersion},     {"command", out.command},
                      {"seed", c.seed},    {"config", config_text},   {"outputs", files}};
  bfm::write_file_atomic(dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fit, compare and analyse two-cause lifetime models"};
  app.set_config("--config", "", "INI or TOML file; keys mirror the long flag names");
  app.require_subcommand(1);

  Common common;
  const char* env_out = std::getenv("BFM_OUTPUT_DIR");
  common.out_dir = env_out ? env_out : "bfm-out";
  app.add_option("--out", common.out_dir, "output directory (default: $BFM_OUTPUT_DIR or ./bfm-out)");
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--threads", common.threads, "worker threads, 0 for all cores")->capture_default_str();

  FitMleOpts fm;
  auto* s_fit = app.add_subcommand("fit-mle", "maximum likelihood fit with standard errors");
  s_fit->add_option("--data", fm.data, "dataset file")->required();
  s_fit->add_option("--model", fm.model, "BFM, APD, FACG, FAEPG, EAddW or GExtEW")->capture_default_str();
  s_fit->add_option("--starts", fm.starts, "random starts in addition to the model heuristics")->capture_default_str();

  BayesOpts bo;
  auto add_bayes = [](CLI::App* s, BayesOpts& b) {
    s->add_option("--data", b.data, "dataset file")->required();
    s->add_option("--chains", b.chains, "parallel chains")->capture_default_str();
    s->add_option("--iters", b.iters, "iterations per chain, warm-up included")->capture_default_str();
    s->add_option("--warmup", b.warmup, "warm-up iterations discarded per chain")->capture_default_str();
    s->add_option("--eps", b.eps, "initial leapfrog step size")->capture_default_str();
    s->add_option("--steps", b.steps, "leapfrog steps per iteration")->capture_default_str();
    s->add_option("--prior-rate", b.prior_rate, "Gamma prior rate b for every parameter")->capture_default_str();
    s->add_option("--prior-shape", b.prior_shape, "four Gamma prior shapes (default: rate times init)");
    s->add_option("--init", b.init, "four starting values nu,theta,tau,zeta (default: ML estimate)");
    s->add_flag("--no-adapt", b.no_adapt, "keep the step size fixed during warm-up");
  };
  auto* s_bayes = app.add_subcommand("fit-bayes", "Hamiltonian Monte Carlo posterior for the BFM");
  add_bayes(s_bayes, bo);
  s_bayes->add_flag("--dump-draws", bo.dump_draws, "write every kept draw to draws.csv");

  RiskOpts ro;
  auto* s_risk = app.add_subcommand("risks", "cause-specific failure probabilities");
  s_risk->add_option("--params", ro.params, "nu,theta,tau,zeta");
  s_risk->add_option("--data", ro.data, "dataset file (fit first)");
  s_risk->add_option("--mc-draws", ro.mc_draws, "Monte Carlo draws, 0 to skip")->capture_default_str();
  s_risk->add_option("--grid", ro.grid, "points on the P2 curve")->capture_default_str();

  CompareOpts co;
  auto* s_cmp = app.add_subcommand("compare", "fit several models and rank them on seven metrics");
  s_cmp->add_option("--data", co.data, "dataset file")->required();
  s_cmp->add_option("--models", co.models, "comma-separated model names")->capture_default_str();
  s_cmp->add_option("--bootstrap", co.bootstrap, "bootstrap replicates for p-values, 0 to skip")->capture_default_str();
  s_cmp->add_option("--starts", co.starts, "random starts per model")->capture_default_str();
  s_cmp->add_option("--grid", co.grid, "points in the plot series")->capture_default_str();

  CompatOpts cp;
  auto* s_compat = app.add_subcommand("compat", "posterior predictive compatibility curves");
  add_bayes(s_compat, cp.bayes);
  s_compat->add_option("--sets", cp.sets, "simulated datasets")->capture_default_str();
  s_compat->add_option("--grid", cp.grid, "points in the plot series")->capture_default_str();

  TttOpts to;
  auto* s_ttt = app.add_subcommand("ttt", "scaled total-time-on-test curves");
  s_ttt->add_option("--data", to.data, "dataset file")->required();
  s_ttt->add_option("--strata", to.strata, "comma-separated subset of c1, c2, all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Output out;
    if (s_fit->parsed()) out = cmd_fit_mle(fm, common);
    else if (s_bayes->parsed()) out = cmd_fit_bayes(bo, common);
    else if (s_risk->parsed()) out = cmd_risks(ro, common);
    else if (s_cmp->parsed()) out = cmd_compare(co, common);
    else if (s_compat->parsed()) out = cmd_compat(cp, common);
    else out = cmd_ttt(to, common);
    out.command = app.get_subcommands().front()->get_name();
    write_outputs(out, common, app.config_to_str(true, false));
    std::cout << out.text;
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bfm::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bfm::DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const bfm::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const bfm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
