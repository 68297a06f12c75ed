// Acceptance checks, one line per criterion. Exit code: 0 pass, 1 fail,
// 77 blocked (a required dataset is missing).
//
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only
//
// The electrode dataset is not shipped. Point BFM_EFST_DATA at a file in the
// dataset format to enable the electrode parts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bfm/bfm.hpp"

namespace {

enum class Verdict { pass, fail, blocked };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
    if (!ok) verdict = Verdict::fail;
  }
  void block(const std::string& what) {
    notes.push_back("BLOCK " + what);
    if (verdict == Verdict::pass) verdict = Verdict::blocked;
  }
  void info(const std::string& what) { notes.push_back("      " + what); }
};

std::string f(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string f(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

bfm::BfmParams P(double nu, double theta, double tau, double zeta) { return {nu, theta, tau, zeta}; }

// Canonical order (nu, theta, tau, zeta).
const bfm::BfmParams kAfstOmp = P(0.0054, 4.9472, 0.4701, 0.0419);
const bfm::BfmParams kEfstOmp = P(0.0127, 0.6124, 3.5770, 0.0026);

bfm::Dataset afst() { return bfm::parse_dataset(bfm::bundled_data_path("afst.csv")); }

std::optional<bfm::Dataset> efst(Outcome& o) {
  const char* path = std::getenv("BFM_EFST_DATA");
  if (!path || !*path) {
    o.block("electrode data not available (set BFM_EFST_DATA)");
    return std::nullopt;
  }
  try {
    auto d = bfm::parse_dataset(path);
    bfm::verify_counts(d, {18, 27, 0, 13});
    return d;
  } catch (const std::exception& e) {
    o.block(std::string("electrode data rejected: ") + e.what());
    return std::nullopt;
  }
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------- 1

Outcome c1_risk_table() {
  Outcome o;
  struct Row {
    double nu, theta, tau, zeta, p1, p3a, p3b;
  };
  // Parameters printed as (nu, tau, theta, zeta); stored here canonically.
  const Row rows[] = {{0.01, 2.0, 0.6, 0.6, 0.0158, 0.0158, 0.9842},
                      {0.05, 6.0, 0.7, 2.8, 0.0005, 0.0005, 0.9995},
                      {0.01, 0.3, 1.5, 0.6, 0.0098, 0.0098, 0.9902},
                      {0.5, 0.05, 0.25, 0.8, 0.2991, 0.2990, 0.7009},
                      {0.5, 8.0, 3.0, 1.2, 0.0533, 0.0548, 0.9456}};
  int i = 0;
  for (const auto& r : rows) {
    ++i;
    const auto p = P(r.nu, r.theta, r.tau, r.zeta);
    const auto p1 = bfm::risk_p1(p);
    const auto p3 = bfm::risk_p3(p);
    const auto mc = bfm::risk_mc(p, 1000000, 1000 + i);
    const double sigma = std::sqrt(p1.f1 * (1.0 - p1.f1) / 1e6);
    o.check(std::abs(p1.f1 - r.p1) <= 1e-3, f("row %d P1 F1 %.5f vs %.4f", i, p1.f1, r.p1));
    o.check(std::abs(p3.f1 - r.p3a) <= 1e-3 && std::abs(p3.f2 - r.p3b) <= 1e-3,
            f("row %d P3 (%.5f, %.5f) vs (%.4f, %.4f)", i, p3.f1, p3.f2, r.p3a, r.p3b));
    o.check(std::abs((p3.f1 + p3.f2) - (r.p3a + r.p3b)) <= 1e-3,
            f("row %d P3 sum %.5f vs %.4f", i, p3.f1 + p3.f2, r.p3a + r.p3b));
    o.check(std::abs(mc.f1 - p1.f1) <= 3.0 * sigma,
            f("row %d MC %.5f vs P1 %.5f (%.2f sigma)", i, mc.f1, p1.f1, std::abs(mc.f1 - p1.f1) / sigma));
  }
  return o;
}

// ---------------------------------------------------------------- 2

Outcome c2_info_criteria() {
  Outcome o;
  struct Row {
    const char* name;
    double nll;
    int p;
    std::size_t n;
    double aic, bic, bc;
  };
  const Row rows[] = {
      {"EFST BFM", 274.79, 4, 58, 557.59, 565.83, 580.81},   {"EFST APD", 275.78, 4, 58, 559.57, 567.81, 582.78},
      {"EFST FACG", 282.21, 4, 58, 572.41, 580.65, 595.628}, {"EFST FAEPG", 282.44, 4, 58, 572.88, 581.13, 596.10},
      {"EFST EAddW", 278.21, 5, 58, 566.42, 576.72, 590.63}, {"EFST GExtEW", 276.56, 5, 58, 563.13, 573.43, 587.34},
      {"AFST BFM", 53.693, 4, 33, 115.39, 121.37, 128.82},   {"AFST APD", 55.192, 4, 33, 118.38, 124.37, 131.82},
      {"AFST FACG", 54.962, 4, 33, 117.92, 123.91, 131.36},  {"AFST FAEPG", 55.337, 4, 33, 118.67, 124.66, 132.11},
      {"AFST EAddW", 56.242, 5, 33, 122.48, 129.978, 135.98}, {"AFST GExtEW", 57.097, 5, 33, 124.19, 131.68, 137.68}};
  for (const auto& r : rows) {
    const auto ic = bfm::info_criteria(r.nll, r.p, r.n);
    const bool ok = std::abs(ic.aic - r.aic) <= 0.05 && std::abs(ic.bic - r.bic) <= 0.05 && std::abs(ic.bc - r.bc) <= 0.1;
    o.check(ok, f("%-12s aic %.3f/%.2f bic %.3f/%.2f bc %.3f/%.2f", r.name, ic.aic, r.aic, ic.bic, r.bic, ic.bc, r.bc));
  }
  return o;
}

// ---------------------------------------------------------------- 3

void check_fit(Outcome& o, const char* label, const bfm::Dataset& d, double nll_max, const bfm::BfmParams& want) {
  const auto fit = bfm::fit_mle(bfm::bfm_model(), d);
  o.check(fit.nll <= nll_max, f("%s nll %.5f <= %.2f", label, fit.nll, nll_max));
  static const char* names[] = {"nu", "theta", "tau", "zeta"};
  for (int k = 0; k < 4; ++k)
    o.check(rel(fit.params[k], want.values()[k]) <= 0.05,
            f("%s %-5s %.6g vs %.4g (%.2f%%)", label, names[k], fit.params[k], want.values()[k],
              100.0 * rel(fit.params[k], want.values()[k])));
}

Outcome c3_mle() {
  Outcome o;
  check_fit(o, "AFST", afst(), 53.70, kAfstOmp);
  if (auto d = efst(o)) check_fit(o, "EFST", *d, 274.80, kEfstOmp);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome c4_mttf() {
  Outcome o;
  // Appliance times are stored in thousands of cycles.
  const double afst_mttf = 1000.0 * bfm::mttf(kAfstOmp).value;
  o.check(std::abs(afst_mttf - 2254.41) <= 5.0, f("AFST mttf %.3f cycles vs 2254.41 +/- 5", afst_mttf));
  const double efst_mttf = bfm::mttf(kEfstOmp).value;
  o.check(std::abs(efst_mttf - 243.88) <= 0.5, f("EFST mttf %.3f vs 243.88 +/- 0.5", efst_mttf));
  // Diagnostic: zeta that would give the printed value with the other three fixed.
  const auto v = kEfstOmp.values();
  auto gap = [&](double z) { return bfm::mttf(P(v[0], v[1], v[2], z)).value - 243.88; };
  const double z = bfm::brent_root(gap, 0.0025, 0.0028, 1e-12);
  o.info(f("EFST mttf hits 243.88 at zeta %.6f (printed 0.0026)", z));
  o.info(f("EFST mttf across zeta rounding [0.00255, 0.00265]: %.3f .. %.3f",
           bfm::mttf(P(v[0], v[1], v[2], 0.00265)).value, bfm::mttf(P(v[0], v[1], v[2], 0.00255)).value));
  return o;
}

// ---------------------------------------------------------------- 5

Outcome c5_risks() {
  Outcome o;
  const auto d = afst();
  const auto fit = bfm::fit_mle(bfm::bfm_model(), d);
  const auto ra = bfm::risk_p1(bfm::BfmParams::from_span(fit.params));
  o.check(std::abs(ra.f1 - 0.635) <= 0.005 && std::abs(ra.f2 - 0.365) <= 0.005,
          f("AFST BFM-MLM (%.4f, %.4f) vs (0.635, 0.365)", ra.f1, ra.f2));

  std::optional<bfm::Dataset> e = efst(o);
  const bfm::BfmParams efst_p =
      e ? bfm::BfmParams::from_span(bfm::fit_mle(bfm::bfm_model(), *e).params) : kEfstOmp;
  const auto re = bfm::risk_p1(efst_p);
  o.check(std::abs(re.f1 - 0.705) <= 0.005 && std::abs(re.f2 - 0.295) <= 0.005,
          f("EFST BFM-MLM (%.4f, %.4f) vs (0.705, 0.295)%s", re.f1, re.f2, e ? "" : " at printed OMPs"));

  const std::vector<double> facg{0.323, 0.002, 0.224, 99.93};
  const std::vector<double> faepg{1.244, 0.027, 1.583, 705.9};
  const auto rf = bfm::competitor_risks(bfm::facg_model(), facg);
  const auto rg = bfm::competitor_risks(bfm::faepg_model(), faepg);
  o.check(std::abs(rf.f1 - 0.927) <= 0.01 && std::abs(rf.f2 - 0.073) <= 0.01,
          f("EFST FACG (%.4f, %.4f) vs (0.927, 0.073)", rf.f1, rf.f2));
  o.check(std::abs(rg.f1 - 0.926) <= 0.01 && std::abs(rg.f2 - 0.074) <= 0.01,
          f("EFST FAEPG (%.4f, %.4f) vs (0.926, 0.074)", rg.f1, rg.f2));
  const double onset = faepg[3] / faepg[2];
  o.info(f("FAEPG Gompertz onset theta/lambda = %.1f; chf there %.3g", onset, bfm::faepg_model().chf(onset, faepg)));
  return o;
}

// ---------------------------------------------------------------- 6

Outcome c6_hmc() {
  Outcome o;
  {
    bfm::HmcConfig cfg;
    cfg.mass_diag = {1.0};
    cfg.epsilon = 0.2;
    cfg.leapfrog_steps = 10;
    auto lp = [](const std::vector<double>& q) { return -0.5 * q[0] * q[0]; };
    auto gr = [](const std::vector<double>& q) { return std::vector<double>{-q[0]}; };
    const auto ch = bfm::hmc_sample(lp, gr, {0.5}, cfg);
    double s = 0, ss = 0, n = 0;
    for (const auto& c : ch.draws)
      for (const auto& d : c) {
        s += d[0];
        ss += d[0] * d[0];
        ++n;
      }
    const double mean = s / n, var = ss / n - mean * mean;
    o.check(std::abs(mean) <= 0.05 && std::abs(var - 1.0) <= 0.1, f("standard normal mean %.4f var %.4f", mean, var));
  }
  {
    auto grad_u = [](const std::vector<double>& q) { return std::vector<double>{q[0]}; };
    const std::vector<double> m{1.0};
    std::vector<double> q{1.0}, p{0.3};
    bfm::leapfrog(q, p, 0.1, 50, m, grad_u);
    p[0] = -p[0];
    bfm::leapfrog(q, p, 0.1, 50, m, grad_u);
    const double err = std::max(std::abs(q[0] - 1.0), std::abs(-p[0] - 0.3));
    o.check(err <= 1e-10, f("leapfrog reversibility error %.2e", err));
    std::vector<double> q2{1.0}, p2{0.0};
    bfm::leapfrog(q2, p2, 0.01, 100, m, grad_u);
    const double dh = std::abs(0.5 * (q2[0] * q2[0] + p2[0] * p2[0]) - 0.5);
    o.check(dh <= 1e-4, f("harmonic energy drift %.2e over 100 steps", dh));
  }
  if (auto d = efst(o)) {
    const std::vector<double> omp(kEfstOmp.values().begin(), kEfstOmp.values().end());
    const auto ch = bfm::hmc_run(*d, bfm::priors_centered_at(omp), bfm::HmcConfig{}, omp);
    const auto s = bfm::summarize(ch);
    const double be[] = {0.0128, 0.6172, 3.4994, 0.0026};
    for (int k = 0; k < 4; ++k) {
      o.check(s.rhat[k] < 1.05, f("EFST rhat[%d] %.4f", k, s.rhat[k]));
      o.check(rel(s.mean[k], be[k]) <= 0.15, f("EFST mean[%d] %.5g vs %.4g", k, s.mean[k], be[k]));
    }
    for (std::size_t c = 0; c < ch.chain_count(); ++c)
      o.check(ch.accept_rate[c] >= 0.4 && ch.accept_rate[c] <= 0.99, f("EFST chain %zu acceptance %.3f", c, ch.accept_rate[c]));
  }
  return o;
}

// ---------------------------------------------------------------- 7

// Five-point central difference.
template <class F>
double central(F&& fn, std::vector<double> x, std::size_t k, double h) {
  const double x0 = x[k];
  auto at = [&](double t) {
    x[k] = x0 + t;
    return fn(x);
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

void gradient_points(Outcome& o, const char* label, const bfm::Dataset& d, const bfm::BfmParams& centre) {
  bfm::Rng rng(7);
  const std::span<const bfm::CensoredObservation> obs(d.observations);
  const std::vector<double> c(centre.values().begin(), centre.values().end());
  const auto priors = bfm::priors_centered_at(c);
  double worst_nll = 0.0, worst_lp = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(4), y(4);
    for (int k = 0; k < 4; ++k) {
      x[k] = c[k] * std::exp(rng.uniform() - 0.5);
      y[k] = std::log(x[k]);
    }
    const auto g = bfm::bfm_nll_grad(bfm::BfmParams::from_span(x), obs);
    auto nll = [&](const std::vector<double>& v) { return bfm::bfm_nll(bfm::BfmParams::from_span(v), obs); };
    const auto gl = bfm::log_posterior_grad(y, obs, priors);
    auto lp = [&](const std::vector<double>& v) { return bfm::log_posterior(v, obs, priors); };
    for (std::size_t k = 0; k < 4; ++k) {
      const double fd = central(nll, x, k, 1e-4 * x[k]);
      worst_nll = std::max(worst_nll, std::abs(g[k] - fd) / std::max(std::abs(g[k]), std::abs(fd)));
      const double fdl = central(lp, y, k, 1e-4);
      worst_lp = std::max(worst_lp, std::abs(gl[k] - fdl) / std::max(std::abs(gl[k]), std::abs(fdl)));
    }
  }
  o.check(worst_nll <= 1e-6, f("%s nll gradient worst relative error %.2e", label, worst_nll));
  o.check(worst_lp <= 1e-6, f("%s log-posterior gradient worst relative error %.2e", label, worst_lp));
}

Outcome c7_gradients() {
  Outcome o;
  gradient_points(o, "AFST", afst(), kAfstOmp);
  if (auto d = efst(o)) gradient_points(o, "EFST", *d, kEfstOmp);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome c8_mrl_identity() {
  Outcome o;
  struct Set {
    const char* name;
    bfm::BfmParams p;
  };
  const Set sets[] = {{"tau>1 theta<1", P(0.0127, 0.6124, 3.577, 0.0026)},
                      {"tau>1 theta>1", P(0.5, 8.0, 3.0, 1.2)},
                      {"tau<1 theta>1", P(0.0054, 4.9472, 0.4701, 0.0419)},
                      {"tau>1 theta<1 b", P(0.2, 0.5, 2.0, 0.1)},
                      {"tau>1 theta=1", P(0.05, 1.0, 1.5, 0.05)}};
  int bfr = 0;
  for (const auto& s : sets) {
    const double lo = bfm::bfm_quantile(1e-4, s.p), hi = bfm::bfm_quantile(1.0 - 1e-8, s.p);
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
      const double x = lo * std::pow(hi / lo, i / 39.0);
      const double mu = bfm::mrl(x, s.p).value;
      worst = std::max(worst, std::abs(bfm::mrl_frf_identity_residual(x, s.p)) / std::max(1.0, mu));
    }
    o.check(worst <= 1e-5, f("%-16s identity residual / max(1, mu) %.2e", s.name, worst));

    const auto [a, b] = bfm::change_point_domain(s.p);
    const auto r = bfm::find_change_points([&](double x) { return bfm::bfm_frf(x, s.p); }, a, b);
    if (r.shape_label != bfm::ShapeLabel::bathtub) {
      o.info(f("%-16s frf shape %s, turning-point order not applicable", s.name, bfm::to_string(r.shape_label)));
      continue;
    }
    ++bfr;
    const auto m = bfm::find_change_points([&](double x) { return bfm::mrl(x, s.p).value; }, a, b);
    if (m.locations.empty()) {
      o.check(false, f("%-16s bathtub frf but mrl has no turning point", s.name));
      continue;
    }
    o.check(m.locations.front() <= r.locations.front(),
            f("%-16s x_mu %.6g <= x_r %.6g", s.name, m.locations.front(), r.locations.front()));
  }
  o.check(bfr > 0, f("%d bathtub-shaped sets examined", bfr));
  return o;
}

// ---------------------------------------------------------------- 9

Outcome c9_identities() {
  Outcome o;
  const bfm::BfmParams sets[] = {P(0.01, 2.0, 0.6, 0.6), P(0.05, 6.0, 0.7, 2.8), P(0.01, 0.3, 1.5, 0.6),
                                 P(0.5, 0.05, 0.25, 0.8), P(0.5, 8.0, 3.0, 1.2),  kAfstOmp, kEfstOmp};
  int i = 0;
  for (const auto& p : sets) {
    ++i;
    double e_sf = 0, e_pdf = 0, e_u = 0, e_x = 0;
    const double lo = bfm::bfm_quantile(1e-6, p), hi = bfm::bfm_quantile(1.0 - 1e-6, p);
    for (int j = 0; j < 200; ++j) {
      const double x = lo * std::pow(hi / lo, j / 199.0);
      // Closed forms in long double as the oracle.
      const long double X = x, nu = p.nu(), th = p.theta(), ta = p.tau(), ze = p.zeta();
      const long double w = std::pow(ze * X, ta), dh = nu * std::pow(X, th);
      const long double sf = std::exp(1.0L - std::exp(w)) / (dh + 1.0L);
      const long double frf = nu * th * std::pow(X, th - 1.0L) / (1.0L + dh) + ta * ze * std::pow(ze * X, ta - 1.0L) * std::exp(w);
      e_sf = std::max(e_sf, static_cast<double>(std::abs(bfm::bfm_sf(x, p) - sf) / sf));
      e_sf = std::max(e_sf, std::abs(bfm::bfm_sf(x, p) - std::exp(-bfm::bfm_chf(x, p))) / bfm::bfm_sf(x, p));
      e_pdf = std::max(e_pdf, static_cast<double>(std::abs(bfm::bfm_pdf(x, p) - frf * sf) / (frf * sf)));
      e_pdf = std::max(e_pdf, std::abs(bfm::bfm_pdf(x, p) - bfm::bfm_frf(x, p) * bfm::bfm_sf(x, p)) / bfm::bfm_pdf(x, p));
      const double xr = bfm::bfm_quantile(bfm::bfm_cdf(x, p), p);
      e_x = std::max(e_x, std::abs(xr - x) / x);
    }
    for (int j = 1; j < 1000; ++j) {
      const double u = j / 1000.0;
      e_u = std::max(e_u, std::abs(bfm::bfm_cdf(bfm::bfm_quantile(u, p), p) - u));
    }
    o.check(e_sf <= 1e-12 && e_pdf <= 1e-12, f("set %d sf err %.1e pdf err %.1e", i, e_sf, e_pdf));
    o.check(e_u <= 1e-9 && e_x <= 1e-9, f("set %d quantile round trip u %.1e x %.1e", i, e_u, e_x));

    const auto draws = bfm::bfm_sample(p, 100000, 500 + i);
    std::vector<double> t;
    for (const auto& d : draws) t.push_back(d.time);
    std::sort(t.begin(), t.end());
    double ks = 0.0;
    const double n = t.size();
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double F = bfm::bfm_cdf(t[k], p);
      ks = std::max({ks, (k + 1) / n - F, F - k / n});
    }
    o.check(ks < 0.01, f("set %d sampler KS %.5f", i, ks));
  }
  return o;
}

// ---------------------------------------------------------------- 10

void verdicts(Outcome& o, const char* label, const bfm::Dataset& d, int need, const double* printed_nll) {
  bfm::MleConfig cfg;
  cfg.random_starts = 24;
  std::vector<bfm::ModelReport> reports;
  reports.push_back(bfm::evaluate_model(bfm::bfm_model(), d, cfg, 199, 1000));
  int i = 1;
  for (const auto& name : bfm::competitor_names())
    reports.push_back(bfm::evaluate_model(bfm::competitor(name), d, cfg, 199, 1000 + 1000 * i++));
  const auto ev = bfm::rank_models(reports);
  std::size_t bfm_index = 0;
  for (std::size_t k = 0; k < ev.models.size(); ++k)
    if (ev.models[k].name == "BFM") bfm_index = k;
  const int wins = ev.minima(bfm_index);
  o.check(wins >= need, f("%s BFM smallest on %d of 7 metrics (need %d)", label, wins, need));
  for (std::size_t k = 0; k < ev.models.size(); ++k) {
    const auto& m = ev.models[k];
    const auto mv = m.metrics();
    std::string line = f("%s %-6s nll %.3f", label, m.name.c_str(), m.nll);
    if (printed_nll) line += f(" (printed %.3f)", printed_nll[k]);
    line += f(" aic %.2f bic %.2f bc %.2f ks %.3f ad %.3f cvm %.3f avg rank %.2f%s", mv[1], mv[2], mv[3], mv[4], mv[5],
              mv[6], ev.average_rank[k], m.at_bound ? " [on search box]" : "");
    o.info(line);
  }
  for (int k = 0; k < bfm::kMetricCount; ++k) {
    double best = ev.models[bfm_index].metrics()[k];
    std::string who = "BFM";
    for (const auto& m : ev.models)
      if (m.metrics()[k] < best) {
        best = m.metrics()[k];
        who = m.name;
      }
    if (who != "BFM") o.info(f("%s %s: smallest is %s", label, bfm::metric_names()[k], who.c_str()));
  }
}

Outcome c10_verdicts() {
  Outcome o;
  const double afst_nll[] = {53.693, 55.192, 54.962, 55.337, 56.242, 57.097};
  verdicts(o, "AFST", afst(), 7, afst_nll);
  if (auto d = efst(o)) {
    const double efst_nll[] = {274.79, 275.78, 282.21, 282.44, 278.21, 276.56};
    verdicts(o, "EFST", *d, 6, efst_nll);
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "risk table P1/P3/MC", 30, c1_risk_table},
      {2, "information criteria arithmetic", 1, c2_info_criteria},
      {3, "MLE reproduction", 60, c3_mle},
      {4, "MTTF", 5, c4_mttf},
      {5, "risk tables", 30, c5_risks},
      {6, "HMC behaviour", 300, c6_hmc},
      {7, "gradient correctness", 10, c7_gradients},
      {8, "MRL-FRF identity", 30, c8_mrl_identity},
      {9, "distributional identities", 30, c9_identities},
      {10, "comparison verdicts", 600, c10_verdicts},
  };
  return all;
}

Verdict run_one(const Criterion& c, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > c.budget_s) o.check(false, f("runtime %.2fs over budget %.0fs", secs, c.budget_s));
  const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "BLOCKED";
  std::printf("criterion %2d %-7s %-32s %8.2fs (budget %.0fs)\n", c.id, tag, c.name, secs, c.budget_s);
  if (verbose)
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
  std::fflush(stdout);
  return o.verdict;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool verbose = true;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--quiet")) verbose = false;
    else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--quiet]\n", argv[0]);
      return 2;
    }
  }
  bool any_fail = false, any_block = false, found = false;
  for (const auto& c : criteria()) {
    if (only && c.id != only) continue;
    found = true;
    const Verdict v = run_one(c, verbose);
    any_fail |= v == Verdict::fail;
    any_block |= v == Verdict::blocked;
  }
  if (!found) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return any_fail ? 1 : any_block ? 77 : 0;
}
