#include "triode/connection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "triode/error.hpp"
#include "triode/optim.hpp"

namespace triode {

Vec2 ConnectionProfile::operator()(double e) const {
  if (e <= -L) return values.front();
  if (e >= L) return values.back();
  const double s = (e + L) / spacing();
  int k = static_cast<int>(std::floor(s));
  k = std::clamp(k, 0, n - 2);
  const double f = s - k;
  return (1.0 - f) * values[k] + f * values[k + 1];
}

ConnectionProfile ConnectionProfile::reversed() const {
  ConnectionProfile r = *this;
  std::swap(r.i, r.j);
  std::reverse(r.values.begin(), r.values.end());
  return r;
}

double action(const ConnectionProfile &p, const PotentialSpec &spec) {
  const double h = p.spacing();
  double s = 0.0;
  for (int k = 0; k + 1 < p.n; ++k) {
    const Vec2 d = p.values[k + 1] - p.values[k];
    const Vec2 mid = 0.5 * (p.values[k] + p.values[k + 1]);
    s += 0.5 * norm2(d) / h + h * spec.eval(mid);
  }
  return s;
}

std::vector<Vec2> action_gradient(const ConnectionProfile &p, const PotentialSpec &spec) {
  const double h = p.spacing();
  std::vector<Vec2> g(p.n);
  std::vector<Vec2> wmid(p.n - 1);
  for (int k = 0; k + 1 < p.n; ++k) wmid[k] = spec.grad(0.5 * (p.values[k] + p.values[k + 1]));
  for (int k = 1; k + 1 < p.n; ++k) {
    g[k] = (1.0 / h) * (2.0 * p.values[k] - p.values[k - 1] - p.values[k + 1]) +
           (0.5 * h) * (wmid[k - 1] + wmid[k]);
  }
  return g;
}

ConnectionProfile segment_profile(const PotentialSpec &spec, int i, int j, double L, int n) {
  if (i == j) {
    // Validation mode: constant profile.
    ConnectionProfile p;
    p.i = i;
    p.j = j;
    p.L = L;
    p.n = n;
    p.values.assign(n, spec.wells()[i]);
    p.action = action(p, spec);
    return p;
  }
  if (i < 0 || i > 2 || j < 0 || j > 2) throw Error(ErrorKind::InvalidInput, "well index out of range");
  if (!(L > 0.0) || n < 64) throw Error(ErrorKind::InvalidInput, "need L > 0 and n >= 64");
  ConnectionProfile p;
  p.i = i;
  p.j = j;
  p.L = L;
  p.n = n;
  p.values.resize(n);
  const Vec2 a = spec.wells()[i], b = spec.wells()[j];
  for (int k = 0; k < n; ++k) {
    const double s = 0.5 * (1.0 + std::tanh(2.0 * p.eta(k)));
    p.values[k] = a + s * (b - a);
  }
  p.values.front() = a;
  p.values.back() = b;
  p.action = action(p, spec);
  return p;
}

namespace {

// Solves (H + mu I) d = -g for the interior nodes with a block Thomas sweep.
// Returns an empty vector if a pivot block is not positive definite.
std::vector<Vec2> newton_step(const ConnectionProfile &p, const PotentialSpec &spec,
                              const std::vector<Vec2> &g, double mu) {
  const double h = p.spacing();
  const int n = p.n;
  std::vector<Sym2> hm(n - 1);
  for (int k = 0; k + 1 < n; ++k) hm[k] = spec.hess(0.5 * (p.values[k] + p.values[k + 1]));
  // Unknowns k = 1..n-2. Diagonal D_k, coupling C_k between k and k+1 (symmetric).
  struct M2 {
    double a, b, c, d;
  };
  auto diag = [&](int k) {
    const Sym2 &l = hm[k - 1], &r = hm[k];
    return M2{2.0 / h + 0.25 * h * (l.xx + r.xx) + mu, 0.25 * h * (l.xy + r.xy),
              0.25 * h * (l.xy + r.xy), 2.0 / h + 0.25 * h * (l.yy + r.yy) + mu};
  };
  auto coup = [&](int k) {
    const Sym2 &m = hm[k];
    return M2{-1.0 / h + 0.25 * h * m.xx, 0.25 * h * m.xy, 0.25 * h * m.xy, -1.0 / h + 0.25 * h * m.yy};
  };
  auto mul = [](const M2 &A, const M2 &B) {
    return M2{A.a * B.a + A.b * B.c, A.a * B.b + A.b * B.d, A.c * B.a + A.d * B.c, A.c * B.b + A.d * B.d};
  };
  auto mulv = [](const M2 &A, const Vec2 &v) { return Vec2{A.a * v.x + A.b * v.y, A.c * v.x + A.d * v.y}; };
  auto inv = [](const M2 &A, bool &ok) {
    const double det = A.a * A.d - A.b * A.c;
    ok = A.a > 0.0 && det > 0.0;
    return M2{A.d / det, -A.b / det, -A.c / det, A.a / det};
  };
  std::vector<M2> dinv(n);
  std::vector<Vec2> rhs(n);
  // Forward elimination.
  M2 Dk = diag(1);
  bool ok = true;
  dinv[1] = inv(Dk, ok);
  if (!ok) return {};
  rhs[1] = -g[1];
  for (int k = 2; k + 1 < n; ++k) {
    const M2 C = coup(k - 1);  // couples k-1 and k
    const M2 L = mul(C, dinv[k - 1]);
    M2 D = diag(k);
    const M2 LC = mul(L, C);
    D.a -= LC.a;
    D.b -= LC.b;
    D.c -= LC.c;
    D.d -= LC.d;
    dinv[k] = inv(D, ok);
    if (!ok) return {};
    rhs[k] = -g[k] - mulv(L, rhs[k - 1]);
  }
  // Back substitution.
  std::vector<Vec2> d(n);
  d[n - 2] = mulv(dinv[n - 2], rhs[n - 2]);
  for (int k = n - 3; k >= 1; --k) {
    const M2 C = coup(k);
    d[k] = mulv(dinv[k], rhs[k] - mulv(C, d[k + 1]));
  }
  return d;
}

}  // namespace

ConnectionProfile minimize_action(const PotentialSpec &spec, int i, int j,
                                  const ConnectionOptions &opt) {
  if (i == j) throw Error(ErrorKind::InvalidInput, "connection needs distinct wells");
  ConnectionProfile p = segment_profile(spec, i, j, opt.L, opt.n);

  const int m = p.n - 2;
  std::vector<double> x(2 * m);
  for (int k = 0; k < m; ++k) {
    x[2 * k] = p.values[k + 1].x;
    x[2 * k + 1] = p.values[k + 1].y;
  }
  auto unpack = [&](const std::vector<double> &v) {
    for (int k = 0; k < m; ++k) p.values[k + 1] = {v[2 * k], v[2 * k + 1]};
  };
  auto f = [&](const std::vector<double> &v, std::vector<double> &g) {
    unpack(v);
    const auto gv = action_gradient(p, spec);
    for (int k = 0; k < m; ++k) {
      g[2 * k] = gv[k + 1].x;
      g[2 * k + 1] = gv[k + 1].y;
    }
    return action(p, spec);
  };

  // sigma is unknown before the solve; the initializer's action is an upper
  // bound and gives a conservative scale for the tolerance.
  const double tol = opt.tol_grad * (1.0 + p.action);

  // Coarse phase: L-BFGS to get into the quadratic basin.
  optim::Options o;
  o.rule = optim::StepRule::Lbfgs;
  o.max_iter = opt.max_iter;
  o.tol_grad = std::max(tol, 1e-6);
  o.tol_energy = 0.0;
  o.memory = 20;
  optim::Result r = optim::minimize(f, x, o);
  unpack(x);
  int iterations = r.iterations;

  // Polish: damped Newton on the block-tridiagonal Hessian. The near-zero
  // translation mode is regularized by the damping mu.
  double s_cur = action(p, spec);
  double mu = 1e-8;
  for (int it = 0; it < 200; ++it) {
    const auto g = action_gradient(p, spec);
    double gmax = 0.0;
    for (const Vec2 &v : g) gmax = std::max({gmax, std::abs(v.x), std::abs(v.y)});
    if (gmax <= tol) break;
    bool improved = false;
    while (mu < 1e8) {
      const auto step = newton_step(p, spec, g, mu);
      if (!step.empty()) {
        ConnectionProfile trial = p;
        for (int k = 1; k + 1 < p.n; ++k) trial.values[k] += step[k];
        const double s_new = action(trial, spec);
        double gnew = 0.0;
        for (const Vec2 &v : action_gradient(trial, spec)) gnew = std::max({gnew, std::abs(v.x), std::abs(v.y)});
        if (s_new <= s_cur || (s_new <= s_cur + 1e-14 * (1.0 + s_cur) && gnew < gmax)) {
          p = std::move(trial);
          s_cur = s_new;
          mu = std::max(mu * 0.1, 1e-14);
          improved = true;
          break;
        }
      }
      mu *= 10.0;
    }
    ++iterations;
    if (!improved) break;
  }
  p.action = action(p, spec);
  p.iterations = iterations;

  // Independent re-evaluation of the stationarity criterion.
  double gmax = 0.0;
  for (const Vec2 &g : action_gradient(p, spec)) gmax = std::max({gmax, std::abs(g.x), std::abs(g.y)});
  p.grad_max = gmax;
  if (gmax > tol) {
    throw Error(ErrorKind::NonConvergence,
                "connection (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                    ") stalled: action " + std::to_string(p.action) + ", gradient " +
                    std::to_string(gmax));
  }

  p.warnings.clear();
  if (spec.kind() == PotentialKind::PerturbedCubic && spec.perturbation().amplitude != 0.0 &&
      spec.perturbation_admissible()) {
    const Perturbation &b = spec.perturbation();
    if (min_distance_to(p, b.center) < 2.0 * b.radius) {
      p.warnings.push_back("profile passes within rho of the perturbation support");
    }
  }
  return p;
}

std::array<ConnectionProfile, 3> minimize_all(const PotentialSpec &spec, const ConnectionOptions &opt) {
  return {minimize_action(spec, 0, 1, opt), minimize_action(spec, 1, 2, opt),
          minimize_action(spec, 2, 0, opt)};
}

EqualActionReport check_equal_actions(const std::array<ConnectionProfile, 3> &profiles, double tol) {
  EqualActionReport r;
  r.tol = tol;
  for (int k = 0; k < 3; ++k) {
    r.sigmas[k] = profiles[k].action;
    if (!(r.sigmas[k] > 0.0)) {
      throw Error(ErrorKind::InvalidProfile, "non-positive action " + std::to_string(r.sigmas[k]));
    }
  }
  r.sigma = (r.sigmas[0] + r.sigmas[1] + r.sigmas[2]) / 3.0;
  double dev = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      dev = std::max(dev, std::abs(r.sigmas[a] - r.sigmas[b]) / std::min(r.sigmas[a], r.sigmas[b]));
    }
  }
  r.max_rel_deviation = dev;
  r.pass = dev <= tol;
  return r;
}

EqualActionReport check_equal_actions(const PotentialSpec &spec, double tol, const ConnectionOptions &opt) {
  return check_equal_actions(minimize_all(spec, opt), tol);
}

namespace {

DecayFit fit_tail(const std::vector<double> &eta, const std::vector<double> &logd) {
  const int m = static_cast<int>(eta.size());
  if (m < 8) {
    throw Error(ErrorKind::InsufficientTail,
                "only " + std::to_string(m) + " tail points in the fit window; increase L");
  }
  double se = 0, sl = 0, see = 0, sel = 0;
  for (int k = 0; k < m; ++k) {
    se += eta[k];
    sl += logd[k];
    see += eta[k] * eta[k];
    sel += eta[k] * logd[k];
  }
  const double slope = (m * sel - se * sl) / (m * see - se * se);
  const double icpt = (sl - slope * se) / m;
  double ss = 0.0;
  for (int k = 0; k < m; ++k) {
    const double r = logd[k] - (icpt + slope * eta[k]);
    ss += r * r;
  }
  const auto [lo, hi] = std::minmax_element(logd.begin(), logd.end());
  const double range = std::max(*hi - *lo, 1e-300);
  DecayFit f;
  f.k = std::abs(slope);
  f.K = std::exp(icpt);
  f.residual = std::sqrt(ss / m) / range;
  f.points = m;
  return f;
}

}  // namespace

TailFits fit_decay(const ConnectionProfile &p, const PotentialSpec &spec, double delta_w, double floor) {
  const Vec2 a = spec.wells()[p.i], b = spec.wells()[p.j];
  std::vector<double> le, ll, re, rl;
  // Walk outward from the core so the window is the contiguous tail.
  const int mid = p.n / 2;
  for (int k = mid; k >= 1; --k) {
    const double d = dist(p.values[k], a);
    if (d >= 0.5 * delta_w) continue;
    if (d < floor) break;
    le.push_back(p.eta(k));
    ll.push_back(std::log(d));
  }
  for (int k = mid; k + 1 < p.n; ++k) {
    const double d = dist(p.values[k], b);
    if (d >= 0.5 * delta_w) continue;
    if (d < floor) break;
    re.push_back(p.eta(k));
    rl.push_back(std::log(d));
  }
  TailFits t;
  t.left = fit_tail(le, ll);
  t.right = fit_tail(re, rl);
  return t;
}

double extrapolate_sigma(const std::array<double, 3> &h, const std::array<double, 3> &s) {
  // Solve [1 h^2 h^4] [s0 c d]^T = sigma by Cramer's rule.
  double A[3][3], rhs[3];
  for (int r = 0; r < 3; ++r) {
    const double q = h[r] * h[r];
    A[r][0] = 1.0;
    A[r][1] = q;
    A[r][2] = q * q;
    rhs[r] = s[r];
  }
  auto det3 = [](double M[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
           M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  };
  const double D = det3(A);
  double B[3][3];
  for (int r = 0; r < 3; ++r) {
    B[r][0] = rhs[r];
    B[r][1] = A[r][1];
    B[r][2] = A[r][2];
  }
  return det3(B) / D;
}

double min_distance_to(const ConnectionProfile &p, const Vec2 &c) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < p.n; ++k) {
    const Vec2 a = p.values[k], d = p.values[k + 1] - a;
    const double l2 = norm2(d);
    double s = l2 > 0 ? dot(c - a, d) / l2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    m = std::min(m, dist(c, a + s * d));
  }
  return m;
}

}  // namespace triode
