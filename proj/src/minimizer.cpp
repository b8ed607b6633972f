#include "triode/minimizer.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "triode/error.hpp"
#include "triode/io.hpp"

namespace triode {

Initializer parse_initializer(const std::string &s) {
  if (s == "test-function") return Initializer::TestFunction;
  if (s == "constant-well") return Initializer::ConstantWell;
  if (s == "random") return Initializer::Random;
  if (s == "rotated-test-function") return Initializer::RotatedTestFunction;
  if (s == "warm-start") return Initializer::WarmStart;
  throw Error(ErrorKind::InvalidConfig, "unknown initializer '" + s + "'");
}

std::string to_string(Initializer init) {
  switch (init) {
    case Initializer::TestFunction: return "test-function";
    case Initializer::ConstantWell: return "constant-well";
    case Initializer::Random: return "random";
    case Initializer::RotatedTestFunction: return "rotated-test-function";
    case Initializer::WarmStart: return "warm-start";
  }
  return "unknown";
}

optim::StepRule parse_step_rule(const std::string &s) {
  if (s == "lbfgs") return optim::StepRule::Lbfgs;
  if (s == "descent") return optim::StepRule::Descent;
  throw Error(ErrorKind::InvalidConfig, "unknown step rule '" + s + "'");
}

std::string to_string(optim::StepRule rule) {
  return rule == optim::StepRule::Lbfgs ? "lbfgs" : "descent";
}

int SolveConfig::resolved_grid() const {
  return grid > 0 ? grid : DiskGrid::resolution_for(epsilon, points_per_eps);
}

void SolveConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorKind::InvalidConfig, "epsilon must lie in (0, 1)");
  if (!(c0 > 0.0) || !(2.0 * c0 * epsilon < M_PI / 3.0)) {
    throw Error(ErrorKind::InvalidConfig, "c0 must satisfy 0 < 2 c0 eps < pi/3");
  }
  const int n = resolved_grid();
  if (n < 5) throw Error(ErrorKind::InvalidConfig, "grid too small");
  if (2.0 / (n - 1) > epsilon / 4.0 + 1e-15) {
    throw Error(ErrorKind::InvalidConfig, "grid violates h <= eps/4 (N=" + std::to_string(n) + ")");
  }
  if (!(tol_energy > 0.0)) throw Error(ErrorKind::InvalidConfig, "tol-e must be positive");
  if (tol_grad < 0.0) throw Error(ErrorKind::InvalidConfig, "tol-g must be positive");
  if (max_iter <= 0) throw Error(ErrorKind::InvalidConfig, "max-iter must be positive");
  if (starts <= 0) throw Error(ErrorKind::InvalidConfig, "starts must be positive");
  if (well < 0 || well > 2) throw Error(ErrorKind::InvalidConfig, "well index must be 0, 1 or 2");
}

double quadrature_tolerance(const DiskGrid &grid) { return 2.0 * grid.h(); }

Field resample(const Field &from, std::shared_ptr<const DiskGrid> grid, double epsilon) {
  Field f(grid, epsilon, from.c0, from.wells, from.clamp);
  for (std::size_t id : grid->free_nodes()) f.values[id] = from.sample(grid->point(id));
  f.apply_boundary();
  return f;
}

namespace {

// The affine map of the order-parameter plane sending a_i to a_{i+k}; for the
// cube roots this is multiplication by w^k.
Vec2 rotate_labels(const Vec2 &u, int k, const WellSet &a) {
  k = (k % 3 + 3) % 3;
  if (k == 0) return u;
  // Barycentric coordinates of u with respect to (a1, a2, a3).
  const Vec2 e1 = a[1] - a[0], e2 = a[2] - a[0], d = u - a[0];
  const double det = cross(e1, e2);
  const double l1 = cross(d, e2) / det, l2 = cross(e1, d) / det, l0 = 1.0 - l1 - l2;
  return l0 * a[k] + l1 * a[(1 + k) % 3] + l2 * a[(2 + k) % 3];
}

struct Run {
  Field field;
  optim::Result result;
  std::uint64_t hash = 0;
};

Run descend(Field f, const SolveConfig &cfg, const PotentialSpec &spec, double tol_grad,
            double c2) {
  const DiskGrid &g = *f.grid;
  const auto &free = g.free_nodes();
  std::vector<double> x(2 * free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    x[2 * k] = f.values[free[k]].x;
    x[2 * k + 1] = f.values[free[k]].y;
  }
  auto objective = [&](const std::vector<double> &xx, std::vector<double> &gg) {
    for (std::size_t k = 0; k < free.size(); ++k) f.values[free[k]] = {xx[2 * k], xx[2 * k + 1]};
    const std::vector<Vec2> gr = energy_gradient(f, spec);
    for (std::size_t k = 0; k < free.size(); ++k) {
      gg[2 * k] = gr[free[k]].x;
      gg[2 * k + 1] = gr[free[k]].y;
    }
    return energy(f, spec);
  };
  optim::Options o;
  o.rule = cfg.rule;
  o.max_iter = cfg.max_iter;
  o.tol_grad = tol_grad;
  o.tol_energy = cfg.tol_energy;
  // Lipschitz estimate of the node gradient: 8 eps from the Dirichlet part,
  // h^2 c2 / eps from the potential.
  const double h = g.h();
  o.descent_step = 0.9 * 2.0 / (8.0 * f.epsilon + h * h * c2 / f.epsilon);
  Run run;
  run.result = optim::minimize(objective, x, o);
  for (std::size_t k = 0; k < free.size(); ++k) f.values[free[k]] = {x[2 * k], x[2 * k + 1]};
  run.hash = io::field_hash(f);
  run.field = std::move(f);
  return run;
}

}  // namespace

Field initial_field(const SolveConfig &cfg, const PotentialSpec &spec,
                    const std::array<ConnectionProfile, 3> &connections, int k, const Field *warm) {
  auto grid = std::make_shared<const DiskGrid>(cfg.resolved_grid());
  const WellSet &wells = spec.wells();
  switch (cfg.init) {
    case Initializer::TestFunction:
    case Initializer::RotatedTestFunction: {
      Field f = build_test_function(grid, cfg.epsilon, cfg.c0, connections, wells);
      const int rot = (cfg.init == Initializer::RotatedTestFunction ? cfg.rotation : 0) + k;
      if (rot % 3 != 0) {
        for (std::size_t id : grid->free_nodes()) f.values[id] = rotate_labels(f.values[id], rot, wells);
      }
      return f;
    }
    case Initializer::ConstantWell:
      return Field::constant(grid, cfg.epsilon, cfg.c0, wells, wells[(cfg.well + k) % 3], true);
    case Initializer::Random: {
      Field f(grid, cfg.epsilon, cfg.c0, wells, true);
      std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(k));
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      for (std::size_t id : grid->free_nodes()) {
        Vec2 u;
        do u = {uni(rng), uni(rng)};
        while (norm2(u) > 1.0);
        f.values[id] = u;
      }
      return f;
    }
    case Initializer::WarmStart: {
      Field src;
      if (warm != nullptr) {
        src = *warm;
      } else {
        src = io::read_field(cfg.warm_start).field;
      }
      Field f = resample(src, grid, cfg.epsilon);
      f.c0 = cfg.c0;
      f.apply_boundary();
      if (k % 3 != 0) {
        for (std::size_t id : grid->free_nodes()) f.values[id] = rotate_labels(f.values[id], k, wells);
      }
      return f;
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unknown initializer");
}

Solution minimize(const SolveConfig &cfg, const PotentialSpec &spec,
                  const std::array<ConnectionProfile, 3> &connections, const Field *warm) {
  cfg.validate();
  if (cfg.init == Initializer::WarmStart && warm == nullptr && cfg.warm_start.empty()) {
    throw Error(ErrorKind::InvalidConfig, "warm-start initializer needs a field path");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double sigma = (connections[0].action + connections[1].action + connections[2].action) / 3.0;
  const double tol_grad = cfg.tol_grad > 0.0 ? cfg.tol_grad : 1e-8 * (1.0 + sigma) / cfg.epsilon;
  double c2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    double lo = 0.0, hi = 0.0;
    spec.hess(spec.wells()[i]).eigenvalues(lo, hi);
    c2 = std::max(c2, hi);
  }

  std::optional<Run> best;
  SolveReport rep;
  for (int k = 0; k < cfg.starts; ++k) {
    Run run = descend(initial_field(cfg, spec, connections, k, warm), cfg, spec, tol_grad, c2);
    StartRecord rec;
    rec.index = k;
    rec.energy = run.result.energy;
    rec.hash = io::hex64(run.hash);
    rec.reason = optim::to_string(run.result.reason);
    rec.converged = run.result.converged();
    rep.starts.push_back(rec);
    const bool better = !best || run.result.energy < best->result.energy ||
                        (run.result.energy == best->result.energy && run.hash < best->hash);
    if (better) {
      rep.best_start = k;
      best = std::move(run);
    }
  }

  const Field &f = best->field;
  const double qtol = quadrature_tolerance(*f.grid);
  for (const StartRecord &r : rep.starts) {
    if (std::abs(r.energy - best->result.energy) > 2.0 * qtol * std::abs(best->result.energy)) {
      rep.basins_agree = false;
    }
  }
  rep.epsilon = cfg.epsilon;
  rep.grid = f.grid->n();
  rep.initial_energy = best->result.initial_energy;
  rep.energy = best->result.energy;
  rep.iterations = best->result.iterations;
  rep.reason = optim::to_string(best->result.reason);
  rep.converged = best->result.converged();
  rep.grad_max = best->result.grad_max;
  rep.accepted_increases = best->result.accepted_increases;
  const SupNorms s = sup_norms(f);
  rep.sup_u = s.u;
  rep.eps_grad = s.eps_grad;
  rep.field_hash = io::hex64(best->hash);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return Solution{std::move(best->field), std::move(rep)};
}

std::vector<Solution> continuation_sweep(const std::vector<double> &epsilons, const SolveConfig &tmpl,
                                         const PotentialSpec &spec,
                                         const std::array<ConnectionProfile, 3> &connections) {
  if (epsilons.empty()) throw Error(ErrorKind::InvalidConfig, "empty epsilon ladder");
  for (std::size_t i = 1; i < epsilons.size(); ++i) {
    if (!(epsilons[i] < epsilons[i - 1])) {
      throw Error(ErrorKind::InvalidConfig, "epsilon ladder must be strictly descending");
    }
  }
  std::vector<Solution> out;
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    SolveConfig cfg = tmpl;
    cfg.epsilon = epsilons[i];
    if (i > 0) {
      cfg.grid = 0;
      cfg.init = Initializer::WarmStart;
      cfg.starts = 1;
    }
    out.push_back(minimize(cfg, spec, connections, i > 0 ? &out.back().field : nullptr));
  }
  return out;
}

}  // namespace triode
