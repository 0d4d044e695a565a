// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace divlab::optimize {

struct ScalarMin {
  double argmin = 0.0;
  double value = 0.0;
  bool hit_lower = false;
  bool hit_upper = false;
};

/// Golden-section search for a unimodal function on [lo, hi]. Infinite
/// values are allowed and compare as +inf. Boundary flags report whether the
/// minimizer ended within one final bracket width of an endpoint.
inline ScalarMin golden_section(const std::function<double(double)>& f, double lo, double hi,
                                double x_tol = 1e-12, int max_iter = 400) {
  constexpr double kInvPhi = 0.6180339887498949;
  const double a0 = lo, b0 = hi;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  ScalarMin out;
  out.argmin = fc <= fd ? c : d;
  out.value = std::min(fc, fd);
  // Endpoints are candidates too (monotone objectives).
  const double fa = f(a0), fb = f(b0);
  if (fa < out.value) out = {a0, fa};
  if (fb < out.value) out = {b0, fb};
  const double width = std::max(b - a, 1e-9 * (b0 - a0));
  out.hit_lower = out.argmin - a0 <= width;
  out.hit_upper = b0 - out.argmin <= width;
  return out;
}

/// Bisection for the boundary of {x : pred(x)} where pred is false on the
/// left and true on the right of the bracket. Returns the right end of the
/// final interval, so pred(result) is always true.
inline double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi,
                               double x_tol) {
  for (int it = 0; it < 400 && hi - lo > x_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

struct AscentOptions {
  int max_iters = 5000;
  double step0 = 1.0;
  double tol = 1e-10;
  int memory = 8;
};

struct AscentResult {
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool budget_exhausted = false;
};

/// Objective returns F(x) and writes a (super)gradient into `grad`.
using ValueAndGradient = std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// Maximizes a smooth concave function with limited-memory BFGS directions
/// and Armijo backtracking. Stops on a vanishing gradient, on several
/// consecutive improvements below `tol`, or when the budget runs out.
inline AscentResult lbfgs_maximize(const ValueAndGradient& objective, std::vector<double> x,
                                   const AscentOptions& opt) {
  const std::size_t n = x.size();
  std::vector<double> g(n), g_new(n), dir(n), x_new(n);
  double fx = objective(x, g);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  AscentResult res;
  int small_steps = 0;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    if (detail::norm_inf(g) <= 1e-11) break;
    // Two-loop recursion on the ascent problem (minimizing -F).
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = g[i];
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * detail::dot(s_hist[k], q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * y_hist[k][i];
    }
    double gamma = opt.step0 / std::max(detail::norm_inf(g), 1e-300);
    if (!s_hist.empty()) gamma = detail::dot(s_hist.back(), y_hist.back()) / detail::dot(y_hist.back(), y_hist.back());
    for (std::size_t i = 0; i < n; ++i) q[i] *= gamma;
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * detail::dot(y_hist[k], q);
      for (std::size_t i = 0; i < n; ++i) q[i] += s_hist[k][i] * (alpha[k] - beta);
    }
    dir = q;
    double slope = detail::dot(g, dir);
    if (!(slope > 0.0)) {
      // Not an ascent direction: reset memory and fall back to the gradient.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      const double scale = opt.step0 / std::max(detail::norm_inf(g), 1e-300);
      for (std::size_t i = 0; i < n; ++i) dir[i] = scale * g[i];
      slope = detail::dot(g, dir);
    }
    double step = 1.0;
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && f_new >= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      break;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g[i] - g_new[i];  // curvature pair for -F
    }
    const double sy = detail::dot(s, y);
    if (sy > 1e-16 * detail::dot(y, y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double improvement = f_new - fx;
    x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    small_steps = improvement < opt.tol ? small_steps + 1 : 0;
    if (small_steps >= 5) {
      ++it;
      break;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  res.iterations = it;
  res.budget_exhausted = it >= opt.max_iters;
  return res;
}

/// Supergradient ascent with diminishing steps step0 / sqrt(k+1), for
/// piecewise-linear concave objectives. Tracks the best iterate.
inline AscentResult supergradient_maximize(const ValueAndGradient& objective, std::vector<double> x,
                                           const AscentOptions& opt) {
  const std::size_t n = x.size();
  std::vector<double> g(n);
  AscentResult res;
  res.x = x;
  res.value = objective(x, g);
  int stall = 0;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    const double gn = std::sqrt(detail::dot(g, g));
    if (gn <= 1e-14) break;
    const double step = opt.step0 / std::sqrt(static_cast<double>(it) + 1.0);
    for (std::size_t i = 0; i < n; ++i) x[i] += step * g[i] / gn;
    const double fx = objective(x, g);
    if (fx > res.value + opt.tol) {
      res.value = fx;
      res.x = x;
      stall = 0;
    } else if (++stall > 200) {
      ++it;
      break;
    }
  }
  res.iterations = it;
  res.budget_exhausted = it >= opt.max_iters;
  return res;
}

struct SimplexMax {
  std::vector<double> argmax;
  double value = -std::numeric_limits<double>::infinity();
};

/// Maximizes a concave function over the probability simplex in R^n: a scan
/// of the lattice with spacing 1/resolution, then pairwise mass transfers
/// with halving step until the step drops below `step_tol`.
inline SimplexMax simplex_maximize(const std::function<double(const std::vector<double>&)>& f, std::size_t n,
                                   int resolution = 24, double step_tol = 1e-10) {
  SimplexMax best;
  if (n == 0) return best;
  std::vector<int> counts(n, 0);
  std::vector<double> p(n);
  // Enumerate compositions of `resolution` into n parts.
  auto visit = [&](auto&& self, std::size_t i, int remaining) -> void {
    if (i + 1 == n) {
      counts[i] = remaining;
      for (std::size_t k = 0; k < n; ++k) p[k] = static_cast<double>(counts[k]) / resolution;
      const double v = f(p);
      if (v > best.value) best.value = v, best.argmax = p;
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[i] = c;
      self(self, i + 1, remaining - c);
    }
  };
  visit(visit, 0, resolution);
  if (best.argmax.empty()) {
    best.argmax.assign(n, 1.0 / static_cast<double>(n));
    best.value = f(best.argmax);
  }
  double step = 1.0 / resolution;
  std::vector<double> q(n);
  while (step > step_tol) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || best.argmax[j] <= 0.0) continue;
        const double move = std::min(step, best.argmax[j]);
        q = best.argmax;
        q[i] += move;
        q[j] -= move;
        const double v = f(q);
        if (v > best.value) {
          best.value = v;
          best.argmax = q;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace divlab::optimize
