#include <algorithm>
#include <cmath>
#include <functional>

#include "triode/io.hpp"
#include "triode/sweep.hpp"

namespace triode {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// max/min of a positive series; infinity when any entry is not positive.
double spread(const std::vector<double> &v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

std::string series(const std::vector<double> &v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + num(v[k]);
  return s + "]";
}

}  // namespace

std::vector<Check> evaluate_acceptance(const RunResult &r) {
  const auto &ms = r.members;
  const double three_sigma = 3.0 * r.sigma;
  bool all_solved = !ms.empty();
  for (const MemberResult &m : ms) all_solved = all_solved && m.solved;

  std::vector<Check> out;
  auto add = [&](const std::string &id, const std::string &title, const std::function<void(Check &)> &fn) {
    Check c;
    c.id = id;
    c.title = title;
    fn(c);
    out.push_back(c);
  };

  add("equal-actions", "equal actions and sigma stability", [&](Check &c) {
    const double rel = std::abs(r.connection.refined_sigma - r.sigma) / r.sigma;
    c.pass = r.connection.actions.max_rel_deviation <= 1e-6 && rel <= 1e-4;
    c.detail = "spread " + num(r.connection.actions.max_rel_deviation) + " (<= 1e-6), refinement " + num(rel) +
               " (<= 1e-4)";
  });

  add("upper-bound", "test-function energy exceeds 3 sigma at rate eps", [&](Check &c) {
    std::vector<double> ratios;
    bool above = !ms.empty();
    for (const MemberResult &m : ms) {
      above = above && m.test_energy - three_sigma > 0.0;
      ratios.push_back((m.test_energy - three_sigma) / m.epsilon);
    }
    c.pass = above && spread(ratios) <= 3.0;
    c.detail = "(E_test - 3 sigma)/eps = " + series(ratios) + ", max/min <= 3";
  });

  add("certificate", "lower-bound certificate", [&](Check &c) {
    std::vector<double> ratios;
    bool ok = all_solved;
    for (const MemberResult &m : ms) {
      const auto &cert = m.diagnostics.certificate;
      if (!cert) {
        ok = false;
        continue;
      }
      ok = ok && cert->value <= m.solve.energy * 1.02;
      ratios.push_back((three_sigma - cert->value) / std::sqrt(m.epsilon));
    }
    c.pass = ok && spread(ratios) <= 5.0;
    c.detail = "(3 sigma - value)/sqrt(eps) = " + series(ratios) + ", max/min <= 5";
  });

  add("bracket", "certificate <= energy <= test energy, |E - 3 sigma| decreasing", [&](Check &c) {
    bool ok = all_solved;
    std::vector<double> gaps;
    for (const MemberResult &m : ms) {
      if (!m.solved || !m.diagnostics.certificate) {
        ok = false;
        continue;
      }
      ok = ok && m.diagnostics.certificate->value <= m.solve.energy && m.solve.energy <= m.test_energy;
      gaps.push_back(std::abs(m.solve.energy - three_sigma));
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) ok = ok && gaps[k] < gaps[k - 1];
    c.pass = ok;
    c.detail = "|E - 3 sigma| = " + series(gaps);
  });

  auto scaled = [&](const std::function<std::optional<double>(const MemberResult &)> &get, double power,
                    std::vector<double> &v) {
    bool ok = all_solved;
    for (const MemberResult &m : ms) {
      const auto x = get(m);
      if (!x) {
        ok = false;
        continue;
      }
      v.push_back(*x / std::pow(m.epsilon, power));
    }
    return ok;
  };

  add("junction-center", "|y*| / eps^(1/4) bounded", [&](Check &c) {
    std::vector<double> v;
    const bool ok = scaled(
        [](const MemberResult &m) -> std::optional<double> {
          if (!m.diagnostics.certificate) return std::nullopt;
          return std::abs(m.diagnostics.certificate->y_star);
        },
        0.25, v);
    c.pass = ok && spread(v) <= 5.0;
    c.detail = "|y*|/eps^(1/4) = " + series(v) + ", max/min <= 5";
  });

  add("localization", "interface within C eps^(1/4) of the triod", [&](Check &c) {
    std::vector<double> v;
    const bool ok = scaled(
        [](const MemberResult &m) -> std::optional<double> {
          if (!m.diagnostics.localization) return std::nullopt;
          return m.diagnostics.localization->max_distance;
        },
        0.25, v);
    c.pass = ok && spread(v) <= 5.0;
    c.detail = "dist/eps^(1/4) = " + series(v) + ", max/min <= 5";
  });

  add("width", "interface width r1 <= C eps", [&](Check &c) {
    std::vector<double> v;
    bool ok = scaled(
        [](const MemberResult &m) -> std::optional<double> {
          if (!m.diagnostics.width) return std::nullopt;
          return m.diagnostics.width->max_r1;
        },
        1.0, v);
    for (std::size_t k = 1; k < v.size(); ++k) ok = ok && v[k] <= 2.0 * v[k - 1];
    c.pass = ok && !v.empty();
    c.detail = "max r1/eps = " + series(v) + ", consecutive growth <= 2x";
  });

  const MemberResult *fine = ms.empty() ? nullptr : &ms.back();
  add("triple-point", "triple point at the finest scale", [&](Check &c) {
    if (fine == nullptr || !fine->diagnostics.triple || !fine->diagnostics.width) {
      c.detail = "triple point unavailable";
      for (const std::string &e : fine ? fine->errors : std::vector<std::string>{}) c.detail += "; " + e;
      return;
    }
    const TriplePoint &tp = *fine->diagnostics.triple;
    const double bound = fine->diagnostics.width->c0_measured * fine->epsilon;
    const double worst = std::max(tp.dist_pq, tp.dist_pr);
    c.pass = tp.sign_changes >= 1 && worst <= bound;
    c.detail = "eps " + num(fine->epsilon) + ": max(PQ, PR) = " + num(worst) + " vs C0 eps = " + num(bound) +
               ", sign changes " + std::to_string(tp.sign_changes);
  });

  add("discretization", "balanced junction families at the finest scale", [&](Check &c) {
    if (fine == nullptr || !fine->diagnostics.families) {
      c.detail = "families unavailable";
      if (fine) {
        for (const std::string &e : fine->errors) {
          if (e.rfind("discretization", 0) == 0) c.detail += "; " + e;
        }
      }
      return;
    }
    const JunctionFamilies &f = *fine->diagnostics.families;
    c.pass = f.distance_bounds_ok && f.separation_ok;
    c.detail = "k = " + std::to_string(f.k) + ", min pair distance " + num(f.min_pair_distance) + " vs 6 C0 eps = " +
               num(6.0 * f.spacing / 8.0);
  });

  add("gamma-limit", "L1 distance to the triod partition decreasing", [&](Check &c) {
    std::vector<double> v;
    bool ok = all_solved;
    for (const MemberResult &m : ms) {
      if (!m.diagnostics.l1) {
        ok = false;
        continue;
      }
      v.push_back(m.diagnostics.l1->best);
    }
    for (std::size_t k = 1; k < v.size(); ++k) ok = ok && v[k] < v[k - 1];
    ok = ok && v.size() >= 2 && v.back() < 0.5 * v.front();
    c.pass = ok;
    c.detail = "L1 = " + series(v) + ", last < 50% of first";
  });

  add("soundness", "gradient consistency and determinism", [&](Check &c) {
    const SoundnessReport &s = r.soundness;
    c.pass = s.adjoint_max_rel <= 1e-6 && s.grad_w_max_err <= 1e-6 && s.deterministic;
    c.detail = "dot-product rel " + num(s.adjoint_max_rel) + " over " + std::to_string(s.trials) +
               " directions, grad W " + num(s.grad_w_max_err) + ", deterministic " + (s.deterministic ? "yes" : "no");
  });

  const auto &cfg = r.config.checks;
  const bool all = std::find(cfg.begin(), cfg.end(), "all") != cfg.end();
  for (Check &c : out) c.enabled = all || std::find(cfg.begin(), cfg.end(), c.id) != cfg.end();
  return out;
}

}  // namespace triode
