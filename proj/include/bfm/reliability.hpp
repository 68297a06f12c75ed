#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bfm/distribution.hpp"
#include "bfm/numerics.hpp"

namespace bfm {

enum class MrlMethod { quadrature, series };

struct MrlResult {
  double value = 0.0;
  MrlMethod method = MrlMethod::quadrature;
  std::optional<SeriesResult> series_detail;
};

enum class ShapeLabel { increasing, decreasing, bathtub, inverted_bathtub, ibbfr, roller_coaster, other };

inline const char* to_string(ShapeLabel s) {
  switch (s) {
    case ShapeLabel::increasing: return "increasing";
    case ShapeLabel::decreasing: return "decreasing";
    case ShapeLabel::bathtub: return "bathtub";
    case ShapeLabel::inverted_bathtub: return "inverted_bathtub";
    case ShapeLabel::ibbfr: return "ibbfr";
    case ShapeLabel::roller_coaster: return "roller_coaster";
    case ShapeLabel::other: return "other";
  }
  return "other";
}

struct ChangePoints {
  std::vector<double> locations;
  ShapeLabel shape_label = ShapeLabel::other;
  std::vector<int> signs;  // derivative sign on each segment, left to right
};

struct TttPoint {
  double u, phi;
};
struct TttCurve {
  std::vector<TttPoint> points;
};

namespace detail {

// Integral of sf(x_tilde + x) / sf(x_tilde) over x >= 0, stopped where the
// ratio drops below 1e-14.
inline double mrl_quadrature(double x_tilde, const BfmParams& p) {
  const double h0 = bfm_chf(x_tilde, p);
  const double x_end = bfm_chf_inverse(h0 + 14.0 * std::log(10.0), p);
  auto f = [&](double t) { return std::exp(h0 - bfm_chf(t, p)); };
  std::vector<double> breaks;
  const double dh_scale = std::pow(p.nu(), -1.0 / p.theta());
  const double ep_scale = 1.0 / p.zeta();
  for (double s : {dh_scale, ep_scale, 0.1 * dh_scale, 0.1 * ep_scale, 10.0 * dh_scale})
    if (std::isfinite(s) && s > x_tilde && s < x_end) breaks.push_back(s);
  // Log-spaced breaks let the rule resolve structure near x_tilde and far out.
  if (x_tilde > 0.0) {
    for (double k = 1e-3; x_tilde * (1.0 + k) < x_end && k < 1e6; k *= 10.0) breaks.push_back(x_tilde * (1.0 + k));
  } else {
    for (double s = x_end * 1e-12; s < x_end; s *= 10.0) breaks.push_back(s);
  }
  const QuadratureOptions opt{1e-300, 1e-13, 2000000};
  return integrate(f, x_tilde, x_end, opt, breaks).value;
}

inline SeriesResult mrl_series(double x_tilde, const BfmParams& p, double tol, int max_terms) {
  const double nu = p.nu(), th = p.theta(), ta = p.tau(), ze = p.zeta();
  const double h0 = x_tilde > 0.0 ? bfm_chf(x_tilde, p) : 0.0;
  const double log_lower = x_tilde > 0.0 ? std::pow(ze * x_tilde, ta) : 0.0;
  auto term = [&](int l) {
    const double j = (l * th + 1.0) / ta - 1.0;
    const double lg = 1.0 + h0 + l * std::log(nu) - (l * th + 1.0) * std::log(ze) - std::log(ta) +
                      log_gen_integro_exponential(j, log_lower);
    const double mag = std::exp(lg);
    return (l % 2 == 0) ? mag : -mag;
  };
  return guarded_alternating_sum(term, tol, max_terms);
}

}  // namespace detail

/// Mean residual life at x_tilde. Quadrature is canonical; the series is the
/// term-by-term expansion in (-nu x^theta)^l and may diverge.
inline MrlResult mrl(double x_tilde, const BfmParams& p, MrlMethod method = MrlMethod::quadrature,
                     double tol = 1e-10, int max_terms = 200) {
  detail::require_nonneg_x(x_tilde, "mrl");
  if (method == MrlMethod::quadrature) return {detail::mrl_quadrature(x_tilde, p), method, std::nullopt};
  auto s = detail::mrl_series(x_tilde, p, tol, max_terms);
  return {s.value, method, s};
}

inline MrlResult mttf(const BfmParams& p, MrlMethod method = MrlMethod::quadrature, double tol = 1e-10,
                      int max_terms = 200) {
  return mrl(0.0, p, method, tol, max_terms);
}

/// mu'(x) - (mu(x) r(x) - 1), with mu' from a five-point central difference.
inline double mrl_frf_identity_residual(double x_tilde, const BfmParams& p) {
  detail::require_positive_x(x_tilde, "mrl_frf_identity_residual");
  const double h = 1e-3 * x_tilde;
  const double mu = mrl(x_tilde, p).value;
  auto m = [&](double t) { return mrl(x_tilde + t, p).value; };
  const double dmu = (8.0 * (m(h) - m(-h)) - (m(2.0 * h) - m(-2.0 * h))) / (12.0 * h);
  return dmu - (mu * bfm_frf(x_tilde, p) - 1.0);
}

inline ShapeLabel shape_from_signs(const std::vector<int>& s) {
  if (s.empty()) return ShapeLabel::other;
  if (s.size() == 1) return s[0] > 0 ? ShapeLabel::increasing : ShapeLabel::decreasing;
  if (s.size() == 2) return s[0] < 0 ? ShapeLabel::bathtub : ShapeLabel::inverted_bathtub;
  if (s.size() == 3) return s[0] > 0 ? ShapeLabel::ibbfr : ShapeLabel::other;
  return ShapeLabel::roller_coaster;
}

/// Local extrema of f on a log-spaced grid over (lo, hi), each refined to
/// relative width 1e-6.
template <class F>
ChangePoints find_change_points(F&& f, double lo, double hi, int grid_size = 512) {
  if (!(lo > 0.0) || !(hi > lo)) throw DomainError("find_change_points: need 0 < lo < hi");
  if (grid_size < 64) throw ConfigError("find_change_points: grid_size must be >= 64");
  std::vector<double> x(grid_size), y(grid_size);
  const double r = std::log(hi / lo);
  for (int i = 0; i < grid_size; ++i) {
    x[i] = lo * std::exp(r * i / (grid_size - 1));
    y[i] = f(x[i]);
  }
  // Signs of forward differences, with differences at rounding level treated as flat.
  struct Run {
    int sign, first, last;
  };
  std::vector<Run> runs;
  for (int i = 0; i + 1 < grid_size; ++i) {
    const double d = y[i + 1] - y[i];
    const double noise = 1e-12 * std::max(std::abs(y[i]), std::abs(y[i + 1]));
    if (!std::isfinite(d)) continue;
    const int s = d > noise ? 1 : (d < -noise ? -1 : 0);
    if (s == 0) continue;
    if (runs.empty() || runs.back().sign != s) runs.push_back({s, i, i});
    else runs.back().last = i;
  }
  ChangePoints out;
  for (const auto& run : runs) out.signs.push_back(run.sign);
  for (std::size_t k = 1; k < runs.size(); ++k) {
    double a = x[runs[k - 1].last], b = x[runs[k].first + 1];
    const bool is_max = runs[k - 1].sign > 0;
    auto g = [&](double t) { return is_max ? f(t) : -f(t); };
    // Shrink by comparing two interior points (sign of a secant slope).
    while ((b - a) > 1e-6 * 0.5 * (a + b)) {
      const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      if (g(m1) < g(m2)) a = m1;
      else b = m2;
    }
    out.locations.push_back(0.5 * (a + b));
  }
  out.shape_label = shape_from_signs(out.signs);
  return out;
}

/// Domain used for BFM change-point scans: 1e-3/zeta up to 1e3/zeta, cut where
/// the survival function has fallen to about exp(-600).
inline std::pair<double, double> change_point_domain(const BfmParams& p) {
  const double lo = 1e-3 / p.zeta();
  double hi = 1e3 / p.zeta();
  hi = std::min(hi, bfm_chf_inverse(600.0, p));
  return {lo, hi};
}

enum class BoundaryFlag { interior, at_lower, at_upper };

struct BurnIn {
  double b_opt = 0.0;
  double mu_star = 0.0;
  BoundaryFlag boundary = BoundaryFlag::interior;
};

/// Burn-in time maximising mean residual life on [0, search_hi].
inline BurnIn optimal_burn_in(const BfmParams& p, double search_hi, int grid_size = 256) {
  if (!(search_hi > 0.0)) throw DomainError("optimal_burn_in: search_hi must be positive");
  std::vector<double> xs{0.0};
  for (int i = 1; i <= grid_size; ++i) xs.push_back(search_hi * i / grid_size);
  for (int i = 0; i < 64; ++i) xs.push_back(search_hi / grid_size * std::pow(10.0, -6.0 + 6.0 * i / 64.0));
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> mu(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) mu[i] = mrl(xs[i], p).value;
  const std::size_t k = std::max_element(mu.begin(), mu.end()) - mu.begin();
  if (k == 0) return {0.0, mu[0], BoundaryFlag::at_lower};
  if (k + 1 == xs.size()) return {xs[k], mu[k], BoundaryFlag::at_upper};
  auto g = [&](double t) { return mrl(t, p).value; };
  const double b = golden_section_max(g, xs[k - 1], xs[k + 1], 1e-9);
  const double mb = g(b);
  if (mb < mu[k]) return {xs[k], mu[k], BoundaryFlag::interior};
  return {b, mb, BoundaryFlag::interior};
}

/// Scaled total-time-on-test transform of a sample.
inline TttCurve scaled_ttt(std::vector<double> times) {
  if (times.empty()) throw DomainError("scaled_ttt: need at least one time");
  for (double t : times)
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("scaled_ttt: times must be positive");
  std::sort(times.begin(), times.end());
  const std::size_t n = times.size();
  double total = 0.0;
  for (double t : times) total += t;
  TttCurve c;
  double partial = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    partial += times[i - 1];
    const double phi = i == n ? 1.0 : (partial + (n - i) * times[i - 1]) / total;
    c.points.push_back({static_cast<double>(i) / n, phi});
  }
  return c;
}

/// Hazard-shape reading of an empirical TTT curve. The slope of the curve is
/// smoothed with a Gaussian-kernel local-linear fit; its reciprocal is a hazard
/// proxy whose extrema are the change points.
inline ChangePoints ttt_shape(const TttCurve& curve, double bandwidth = 0.15) {
  const auto& pts = curve.points;
  if (pts.size() < 5) return {};
  std::vector<double> u{0.0}, v{0.0};
  for (const auto& q : pts) {
    u.push_back(q.u);
    v.push_back(q.phi);
  }
  auto slope = [&](double at) {
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = u[i] - at;
      const double w = std::exp(-0.5 * d * d / (bandwidth * bandwidth));
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      t0 += w * v[i];
      t1 += w * d * v[i];
    }
    return (s0 * t1 - s1 * t0) / (s0 * s2 - s1 * s1);
  };
  auto proxy = [&](double at) { return 1.0 / std::max(slope(at), 1e-12); };
  return find_change_points(proxy, 0.05, 0.95, 256);
}

}  // namespace bfm
