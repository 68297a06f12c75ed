#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace bfm {

struct OptimResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex minimiser. Non-finite objective values count as +inf.
template <class F>
OptimResult nelder_mead(F&& f, std::vector<double> x0, double step = 0.5, int max_iter = 5000,
                        double ftol = 1e-12, double xtol = 1e-10) {
  const std::size_t n = x0.size();
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<std::vector<double>> s(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(s[i]);

  std::vector<std::size_t> order(n + 1);
  OptimResult out;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
    const auto best = order.front(), worst = order.back(), second = order[n - 1];

    double diam = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) diam = std::max(diam, std::abs(s[i][k] - s[best][k]));
    const double spread = fs[worst] - fs[best];
    if (std::isfinite(spread) && spread <= ftol * (std::abs(fs[best]) + 1e-20) && diam <= xtol) {
      out.converged = true;
      break;
    }

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) c[k] += s[i][k] / n;
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) x[k] = c[k] + t * (s[worst][k] - c[k]);
      return x;
    };
    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        s[worst] = xe;
        fs[worst] = fe;
      } else {
        s[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      s[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst])) {
      s[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) s[i][k] = s[best][k] + 0.5 * (s[i][k] - s[best][k]);
      fs[i] = eval(s[i]);
    }
  }
  const auto best = std::min_element(fs.begin(), fs.end()) - fs.begin();
  out.x = s[best];
  out.f = fs[best];
  out.iterations = it;
  return out;
}

/// Quasi-Newton (BFGS) minimiser with backtracking line search. Only steps that
/// lower f are taken, so the objective never increases across iterations.
template <class F, class G>
OptimResult bfgs(F&& f, G&& grad, std::vector<double> x, int max_iter = 500, double gtol = 1e-9) {
  const std::size_t n = x.size();
  std::vector<double> hinv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
  double fx = f(x);
  std::vector<double> g = grad(x);
  OptimResult out;
  int it = 0;
  for (; it < max_iter; ++it) {
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (!std::isfinite(fx) || !std::isfinite(gmax)) break;
    if (gmax <= gtol * std::max(1.0, std::abs(fx))) {
      out.converged = true;
      break;
    }
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) d[i] -= hinv[i * n + k] * g[k];
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += d[i] * g[i];
    if (!(slope < 0.0)) {
      // Not a descent direction: reset curvature and use steepest descent.
      std::fill(hinv.begin(), hinv.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0;
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += d[i] * g[i];
    }
    double t = 1.0;
    std::vector<double> xn(n);
    double fn = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * d[i];
      fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * slope && fn < fx) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.converged = gmax <= 1e-5 * std::max(1.0, std::abs(fx));
      break;
    }
    std::vector<double> gn = grad(xn);
    std::vector<double> sv(n), yv(n);
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sv[i] = xn[i] - x[i];
      yv[i] = gn[i] - g[i];
      sy += sv[i] * yv[i];
    }
    x = xn;
    fx = fn;
    g = gn;
    if (sy > 1e-300) {
      std::vector<double> hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) hy[i] += hinv[i * n + k] * yv[k];
      double yhy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yhy += yv[i] * hy[i];
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          hinv[i * n + k] += rho * ((1.0 + rho * yhy) * sv[i] * sv[k] - hy[i] * sv[k] - sv[i] * hy[k]);
    }
  }
  out.x = x;
  out.f = fx;
  out.iterations = it;
  return out;
}

/// Central-difference gradient with per-coordinate step h * max(1, |x_i|).
template <class F>
std::vector<double> fd_gradient(F&& f, const std::vector<double>& x, double h = 1e-6) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
    xp[i] = xm[i] = x[i];
  }
  return g;
}

}  // namespace bfm
