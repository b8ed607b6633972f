#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

namespace triode::optim {

enum class StepRule { Descent, Lbfgs };

enum class StopReason { GradientTolerance, EnergyStall, MaxIterations, LineSearchStall };

inline const char *to_string(StopReason r) {
  switch (r) {
    case StopReason::GradientTolerance: return "gradient-tolerance";
    case StopReason::EnergyStall: return "energy-stall";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::LineSearchStall: return "line-search-stall";
  }
  return "unknown";
}

struct Options {
  StepRule rule = StepRule::Lbfgs;
  int max_iter = 500000;
  double tol_grad = 1e-10;    // on the max-norm of the gradient
  double tol_energy = 1e-11;  // relative decrement over `window` iterations
  int window = 10;
  int memory = 12;            // L-BFGS history
  double descent_step = 1.0;  // base step for StepRule::Descent
};

struct Result {
  double energy = 0.0;
  double initial_energy = 0.0;
  double grad_max = 0.0;
  int iterations = 0;
  int accepted_increases = 0;  // must stay 0; checked by callers
  StopReason reason = StopReason::MaxIterations;
  bool converged() const {
    return reason == StopReason::GradientTolerance || reason == StopReason::EnergyStall;
  }
};

namespace detail {

inline double dotv(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const std::vector<double> &a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace detail

/// Monotone minimization of f over x (modified in place). `f(x, g)` returns the
/// objective and writes the gradient into g. Every accepted step satisfies an
/// Armijo decrease, so the recorded energy sequence never increases.
template <class F>
Result minimize(F &&f, std::vector<double> &x, const Options &opt) {
  using detail::dotv;
  const std::size_t n = x.size();
  std::vector<double> g(n), x_new(n), g_new(n), dir(n);
  Result res;
  double e = f(x, g);
  res.initial_energy = e;
  res.energy = e;
  res.grad_max = detail::max_abs(g);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> energy_hist{e};
  double step_scale = opt.descent_step;

  for (int it = 0; it < opt.max_iter; ++it) {
    if (res.grad_max <= opt.tol_grad) {
      res.reason = StopReason::GradientTolerance;
      res.iterations = it;
      return res;
    }

    // Search direction.
    double t0 = 1.0;
    if (opt.rule == StepRule::Lbfgs && !s_hist.empty()) {
      dir = g;
      const std::size_t m = s_hist.size();
      std::vector<double> alpha(m);
      for (std::size_t k = m; k-- > 0;) {
        alpha[k] = rho_hist[k] * dotv(s_hist[k], dir);
        for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y_hist[k][i];
      }
      const double gamma = dotv(s_hist.back(), y_hist.back()) / dotv(y_hist.back(), y_hist.back());
      for (double &v : dir) v *= gamma;
      for (std::size_t k = 0; k < m; ++k) {
        const double beta = rho_hist[k] * dotv(y_hist[k], dir);
        for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[k] - beta) * s_hist[k][i];
      }
      for (double &v : dir) v = -v;
      if (dotv(dir, g) >= 0.0) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
        t0 = 1e-3 / std::max(res.grad_max, 1e-300);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      if (opt.rule == StepRule::Descent) {
        t0 = step_scale;
      } else {
        t0 = 1e-3 / std::max(res.grad_max, 1e-300);
      }
    }

    // Backtracking (Armijo for L-BFGS, plain decrease for explicit descent).
    const double slope = dotv(dir, g);
    double t = t0;
    double e_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + t * dir[i];
      e_new = f(x_new, g_new);
      const bool ok = opt.rule == StepRule::Lbfgs ? (e_new <= e + 1e-4 * t * slope)
                                                  : (e_new <= e);
      if (ok && std::isfinite(e_new)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (opt.rule == StepRule::Lbfgs && !s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      res.reason = StopReason::LineSearchStall;
      res.iterations = it;
      return res;
    }
    if (e_new > e) ++res.accepted_increases;

    if (opt.rule == StepRule::Descent) {
      step_scale = (t < t0) ? t : std::min(opt.descent_step, t * 1.1);
    } else {
      std::vector<double> s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = x_new[i] - x[i];
        y[i] = g_new[i] - g[i];
      }
      const double sy = dotv(s, y);
      if (sy > 1e-300) {
        s_hist.push_back(std::move(s));
        y_hist.push_back(std::move(y));
        rho_hist.push_back(1.0 / sy);
        if (static_cast<int>(s_hist.size()) > opt.memory) {
          s_hist.pop_front();
          y_hist.pop_front();
          rho_hist.pop_front();
        }
      }
    }

    x.swap(x_new);
    g.swap(g_new);
    e = e_new;
    res.energy = e;
    res.grad_max = detail::max_abs(g);
    res.iterations = it + 1;

    energy_hist.push_back(e);
    if (static_cast<int>(energy_hist.size()) > opt.window + 1) energy_hist.pop_front();
    if (static_cast<int>(energy_hist.size()) == opt.window + 1 &&
        energy_hist.front() - e < opt.tol_energy * (1.0 + std::abs(e))) {
      res.reason = res.grad_max <= opt.tol_grad ? StopReason::GradientTolerance
                                                : StopReason::EnergyStall;
      return res;
    }
  }
  res.reason = res.grad_max <= opt.tol_grad ? StopReason::GradientTolerance
                                            : StopReason::MaxIterations;
  res.iterations = opt.max_iter;
  return res;
}

}  // namespace triode::optim
