#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include "bfm/error.hpp"

namespace bfm {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int evaluations = 0;
};

struct SeriesResult {
  double value = 0.0;
  int terms_used = 0;
  bool converged = false;
  double last_term_magnitude = 0.0;
};

/// Stopping rule: error <= max(abs_tol, rel_tol * |value|).
struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_evaluations = 400000;
};

inline double log_gamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("log_gamma: z must be positive and finite");
  return std::lgamma(z);
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  if (m == std::numeric_limits<double>::infinity()) return m;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// log(1 - exp(x)) for x <= 0.
inline double log1m_exp(double x) {
  if (x > -std::numbers::ln2) return std::log(-std::expm1(x));
  return std::log1p(-std::exp(x));
}

/// log(1 + exp(x)).
inline double softplus(double x) {
  if (x > 35.0) return x + std::exp(-x);
  return std::log1p(std::exp(x));
}

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082,
                                  0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975,
                                  0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// 15-point Kronrod rule with QUADPACK-style error scaling.
template <class F>
Segment gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  const double result = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, result, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature over [a, b] with optional interior breakpoints.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt,
                           const std::vector<double>& breaks = {}) {
  if (!(opt.abs_tol > 0.0 || opt.rel_tol > 0.0)) throw ConfigError("integrate: tolerance must be positive");
  if (a == b) return {0.0, 0.0, 1};
  const double sign = b < a ? -1.0 : 1.0;
  if (b < a) std::swap(a, b);

  int evals = 0;
  auto counted = [&](double x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };

  std::vector<double> pts{a};
  for (double p : breaks)
    if (p > a && p < b) pts.push_back(p);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::priority_queue<detail::Segment> heap;
  double total = 0.0, total_err = 0.0, frozen_err = 0.0, frozen_val = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto s = detail::gk15(counted, pts[i], pts[i + 1]);
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }

  auto done = [&] { return total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (!done() && !heap.empty()) {
    if (evals >= opt.max_evaluations)
      throw ConvergenceError("integrate: evaluation budget exhausted", sign * total);
    auto s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b) || (s.b - s.a) <= 1e-15 * std::max(std::abs(s.a), std::abs(s.b))) {
      // Interval cannot be split further; keep its contribution as is.
      frozen_err += s.error;
      frozen_val += s.value;
      continue;
    }
    auto l = detail::gk15(counted, s.a, mid);
    auto r = detail::gk15(counted, mid, s.b);
    total += l.value + r.value - s.value;
    total_err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double v = frozen_val, e = frozen_err;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  return {sign * v, e, evals};
}

template <class F>
QuadratureResult integrate(F&& f, double a, double b, double tol = 1e-10) {
  return integrate(std::forward<F>(f), a, b, QuadratureOptions{tol, tol});
}

/// Integral over [a, inf) via y = a + scale * t / (1 - t).
template <class F>
QuadratureResult integrate_semiinf(F&& f, double a, const QuadratureOptions& opt, double scale = 1.0) {
  if (!(scale > 0.0)) throw ConfigError("integrate_semiinf: scale must be positive");
  auto g = [&](double t) {
    const double om = 1.0 - t;
    const double y = a + scale * t / om;
    if (!std::isfinite(y)) return 0.0;
    const double v = f(y);
    if (v == 0.0) return 0.0;
    return v * scale / (om * om);
  };
  return integrate(g, 0.0, 1.0, opt);
}

template <class F>
QuadratureResult integrate_semiinf(F&& f, double a, double tol = 1e-10) {
  return integrate_semiinf(std::forward<F>(f), a, QuadratureOptions{tol, tol}, 1.0);
}

/// Integral over (-inf, b] via y = b - scale * t / (1 - t).
template <class F>
QuadratureResult integrate_to_neginf(F&& f, double b, const QuadratureOptions& opt, double scale = 1.0) {
  return integrate_semiinf([&](double y) { return f(2.0 * b - y); }, b, opt, scale);
}

/// Root of the equation u e^u = y for y > 0 (principal Lambert W).
inline double lambert_w(double y) {
  if (!(y > 0.0)) throw DomainError("lambert_w: argument must be positive");
  double u = y < 3.0 ? std::log1p(y) * 0.75 : std::log(y) - std::log(std::log(y));
  for (int i = 0; i < 100; ++i) {
    // Newton on log u + u - log y, well behaved for u > 0.
    const double h = std::log(u) + u - std::log(y);
    const double step = h / (1.0 / u + 1.0);
    double next = u - step;
    if (next <= 0.0) next = 0.5 * u;
    if (std::abs(next - u) <= 1e-15 * u) return next;
    u = next;
  }
  return u;
}

/// log of  int_{lower}^{inf} (ln y)^j y^{-1} e^{-y} dy  with lower = exp(log_lower).
/// Works on u = ln y, normalised by the integrand peak so large j does not overflow.
inline double log_gen_integro_exponential(double j, double log_lower) {
  if (!(j > -1.0)) throw DomainError("gen_integro_exponential: j must exceed -1");
  if (!(log_lower >= 0.0)) throw DomainError("gen_integro_exponential: lower must be >= 1");
  if (log_lower == std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  const double c = log_lower;
  double peak = c;
  if (j > 0.0) peak = std::max(c, lambert_w(j));
  const double lstar = (peak > 0.0 ? j * std::log(peak) : 0.0) - std::exp(peak);
  auto h = [&](double u) {
    if (u <= 0.0) return 0.0;
    return std::exp(j * std::log(u) - std::exp(u) - lstar);
  };
  const QuadratureOptions opt{1e-300, 1e-13, 400000};
  double sum = 0.0;
  double left = c;
  if (c == 0.0) {
    // w = u^{j+1} removes the u^j endpoint behaviour on [0, 1].
    const double k = j + 1.0;
    auto hw = [&](double w) {
      const double u = w > 0.0 ? std::pow(w, 1.0 / k) : 0.0;
      return std::exp(-std::exp(u) - lstar) / k;
    };
    sum += integrate(hw, 0.0, 1.0, opt).value;
    left = 1.0;
  }
  const double m = std::max(peak, left);
  const double width = 1.0 / std::sqrt(std::exp(m) * (1.0 + std::abs(j) / (m * m)));
  if (peak > left) {
    sum += integrate(h, left, peak, opt).value;
    left = peak;
  }
  sum += integrate_semiinf(h, left, opt, std::clamp(width, 1e-6, 1.0)).value;
  return lstar + std::log(sum);
}

/// int_{lower}^{inf} (ln y)^j y^{-1} e^{-y} dy; at lower = 1 this is Gamma(j+1) E_1^j(1).
inline double gen_integro_exponential(double j, double lower) {
  if (!(lower >= 1.0)) throw DomainError("gen_integro_exponential: lower must be >= 1");
  return std::exp(log_gen_integro_exponential(j, std::log(lower)));
}

/// Sums term(0), term(1), ... until |term| <= tol * max(1, |sum|).
/// On divergence (three consecutive growing terms) or budget exhaustion the
/// result is not converged and holds the partial sum through the smallest term.
template <class Term>
SeriesResult guarded_alternating_sum(Term&& term, double tol = 1e-10, int max_terms = 200) {
  if (!(tol > 0.0)) throw ConfigError("guarded_alternating_sum: tol must be positive");
  if (max_terms < 1) throw ConfigError("guarded_alternating_sum: max_terms must be >= 1");
  double sum = 0.0, best_sum = 0.0, best_mag = std::numeric_limits<double>::infinity();
  double prev_mag = std::numeric_limits<double>::infinity();
  int best_n = 0, grow = 0;
  for (int l = 0; l < max_terms; ++l) {
    const double t = term(l);
    if (!std::isfinite(t)) break;
    sum += t;
    const double mag = std::abs(t);
    if (mag < best_mag) {
      best_mag = mag;
      best_sum = sum;
      best_n = l + 1;
    }
    if (mag <= tol * std::max(1.0, std::abs(sum))) return {sum, l + 1, true, mag};
    grow = (l > 0 && mag > prev_mag) ? grow + 1 : 0;
    if (grow >= 3) break;
    prev_mag = mag;
  }
  if (best_n == 0) return {0.0, 0, false, std::numeric_limits<double>::infinity()};
  return {best_sum, best_n, false, best_mag};
}

/// Brent root finder on [a, b]; f(a) and f(b) must bracket a root.
template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-15, int max_iter = 300) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw ConvergenceError("brent_root: interval does not bracket a root", a, a, b);
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  throw ConvergenceError("brent_root: iteration cap reached", b, std::min(b, c), std::max(b, c));
}

/// Golden-section search for a maximum of a unimodal f on [a, b].
template <class F>
double golden_section_max(F&& f, double a, double b, double rel_tol = 1e-10, int max_iter = 500) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > rel_tol * std::max(1e-300, std::abs(a) + std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace bfm
