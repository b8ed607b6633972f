#include "triode/sweep.hpp"

#include <chrono>
#include <random>
#include <sstream>

#include "triode/error.hpp"
#include "triode/io.hpp"

namespace triode {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string pair_name(const ConnectionProfile &p) {
  return std::to_string(p.i + 1) + "_" + std::to_string(p.j + 1);
}

std::string member_dir(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "eps_%g", eps);
  return buf;
}

nlohmann::json fit_json(const DecayFit &f) {
  return {{"K", f.K}, {"k", f.k}, {"residual", f.residual}, {"points", f.points}};
}

// Collects artifact paths relative to the run directory.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void text(const std::string &rel, std::string_view data) {
    io::write_atomic(dir_ / rel, data);
    files_.push_back(rel);
  }
  void json(const std::string &rel, const nlohmann::json &j) { text(rel, j.dump(2) + "\n"); }
  void field(const std::string &rel, const Field &f, const PotentialSpec &spec) {
    io::write_field(dir_ / rel, f, spec);
    files_.push_back(rel);
    files_.push_back(rel + ".json");
  }

  nlohmann::json listing() const {
    nlohmann::json out = nlohmann::json::array();
    for (const std::string &rel : files_) {
      const auto path = dir_ / rel;
      out.push_back({{"path", rel},
                     {"bytes", std::filesystem::file_size(path)},
                     {"fnv1a", io::hex64(io::file_hash(path))}});
    }
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

}  // namespace

nlohmann::json to_json(const SolveReport &r) {
  nlohmann::json starts = nlohmann::json::array();
  for (const StartRecord &s : r.starts) {
    starts.push_back({{"index", s.index},
                      {"energy", s.energy},
                      {"field_fnv1a", s.hash},
                      {"reason", s.reason},
                      {"converged", s.converged}});
  }
  return {{"format_version", io::kFormatVersion},
          {"epsilon", r.epsilon},
          {"grid", r.grid},
          {"initial_energy", r.initial_energy},
          {"energy", r.energy},
          {"iterations", r.iterations},
          {"reason", r.reason},
          {"converged", r.converged},
          {"grad_max", r.grad_max},
          {"accepted_increases", r.accepted_increases},
          {"sup_u", r.sup_u},
          {"eps_grad_sup", r.eps_grad},
          {"wall_time", r.wall_time},
          {"best_start", r.best_start},
          {"basins_agree", r.basins_agree},
          {"field_fnv1a", r.field_hash},
          {"starts", starts}};
}

nlohmann::json to_json(const ConnectionStage &c) {
  nlohmann::json j;
  j["format_version"] = io::kFormatVersion;
  for (int k = 0; k < 3; ++k) {
    const ConnectionProfile &p = c.profiles[k];
    j["profiles"].push_back({{"pair", {p.i + 1, p.j + 1}},
                             {"L", p.L},
                             {"n", p.n},
                             {"action", p.action},
                             {"grad_max", p.grad_max},
                             {"iterations", p.iterations},
                             {"warnings", p.warnings},
                             {"decay_left", fit_json(c.fits[k].left)},
                             {"decay_right", fit_json(c.fits[k].right)}});
  }
  j["sigma"] = c.actions.sigma;
  j["max_rel_deviation"] = c.actions.max_rel_deviation;
  j["equal_tol"] = c.actions.tol;
  j["equal"] = c.actions.pass;
  j["refined_sigma"] = c.refined_sigma;
  j["wall_time"] = c.wall_time;
  return j;
}

nlohmann::json to_json(const SoundnessReport &s) {
  return {{"trials", s.trials},
          {"adjoint_max_rel", s.adjoint_max_rel},
          {"grad_w_max_err", s.grad_w_max_err},
          {"deterministic", s.deterministic},
          {"first_fnv1a", s.first_hash},
          {"repeat_fnv1a", s.repeat_hash}};
}

nlohmann::json to_json(const std::vector<Check> &checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const Check &c : checks) {
    out.push_back({{"id", c.id}, {"title", c.title}, {"enabled", c.enabled}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return out;
}

bool RunResult::passed() const {
  for (const Check &c : checks) {
    if (c.enabled && !c.pass) return false;
  }
  return true;
}

const std::vector<std::string> &summary_columns() {
  static const std::vector<std::string> cols = {
      "format_version", "epsilon", "grid",     "h",       "energy",   "test_energy", "three_sigma",
      "certificate",    "y_star",  "localization", "width_c0", "max_r1", "dist_pq",     "dist_pr",
      "l1_best",        "l1_origin", "converged", "iterations", "field_fnv1a"};
  return cols;
}

std::string summary_csv(const RunResult &r) {
  std::ostringstream out;
  const auto &cols = summary_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << "\n";
  auto num = [](double v) { return io::format_double(v); };
  for (const MemberResult &m : r.members) {
    const DiagnosticsReport &d = m.diagnostics;
    std::vector<std::string> row = {std::to_string(kSummaryVersion), num(m.epsilon), std::to_string(m.grid), num(m.h)};
    row.push_back(m.solved ? num(m.solve.energy) : "");
    row.push_back(num(m.test_energy));
    row.push_back(num(3.0 * r.sigma));
    row.push_back(d.certificate ? num(d.certificate->value) : "");
    row.push_back(d.certificate ? num(d.certificate->y_star) : "");
    row.push_back(d.localization ? num(d.localization->max_distance) : "");
    row.push_back(d.width ? num(d.width->c0_measured) : "");
    row.push_back(d.width ? num(d.width->max_r1) : "");
    row.push_back(d.triple ? num(d.triple->dist_pq) : "");
    row.push_back(d.triple ? num(d.triple->dist_pr) : "");
    row.push_back(d.l1 ? num(d.l1->best) : "");
    row.push_back(d.l1 ? num(d.l1->at_origin) : "");
    row.push_back(m.solved ? (m.solve.converged ? "1" : "0") : "");
    row.push_back(m.solved ? std::to_string(m.solve.iterations) : "");
    row.push_back(m.solved ? m.solve.field_hash : "");
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << "\n";
  }
  return out.str();
}

SoundnessReport soundness_checks(const ExperimentConfig &cfg, const PotentialSpec &spec,
                                 const std::array<ConnectionProfile, 3> &profiles, const std::string &first_hash) {
  SoundnessReport s;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  // Directional derivative of the energy against central differences, at the
  // (non-stationary) test function of the finest ladder member.
  SolveConfig sc = cfg.solve;
  sc.epsilon = cfg.ladder.back();
  sc.grid = 0;
  auto grid = std::make_shared<const DiskGrid>(sc.resolved_grid());
  const Field u = build_test_function(grid, sc.epsilon, sc.c0, profiles, spec.wells());
  const std::vector<Vec2> g = energy_gradient(u, spec);
  const double t = 1e-5;
  for (int trial = 0; trial < s.trials; ++trial) {
    std::vector<Vec2> v(grid->size(), Vec2{0.0, 0.0});
    for (std::size_t id : grid->free_nodes()) v[id] = {uni(rng), uni(rng)};
    double exact = 0.0;
    Field up = u, um = u;
    for (std::size_t id : grid->free_nodes()) {
      exact += dot(g[id], v[id]);
      up.values[id] = u.values[id] + t * v[id];
      um.values[id] = u.values[id] - t * v[id];
    }
    const double fd = (energy(up, spec) - energy(um, spec)) / (2.0 * t);
    s.adjoint_max_rel = std::max(s.adjoint_max_rel, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
  }

  std::uniform_real_distribution<double> box(-1.5, 1.5);
  const double d = 1e-6;
  for (int k = 0; k < 200; ++k) {
    const Vec2 z{box(rng), box(rng)};
    const Vec2 gw = grad_w(spec, z);
    const Vec2 fd{(eval_w(spec, z + Vec2{d, 0}) - eval_w(spec, z - Vec2{d, 0})) / (2 * d),
                  (eval_w(spec, z + Vec2{0, d}) - eval_w(spec, z - Vec2{0, d})) / (2 * d)};
    s.grad_w_max_err = std::max(s.grad_w_max_err, norm(gw - fd) / std::max(1.0, norm(gw)));
  }

  SolveConfig first = cfg.solve;
  first.epsilon = cfg.ladder.front();
  first.grid = 0;
  first.seed = cfg.seed;
  s.first_hash = first_hash;
  s.repeat_hash = minimize(first, spec, profiles).report.field_hash;
  s.deterministic = !first_hash.empty() && s.first_hash == s.repeat_hash;
  return s;
}

RunResult run(const ExperimentConfig &config) {
  config.validate();
  const auto t_run = Clock::now();
  RunResult r;
  r.config = config;
  r.config.solve.seed = config.seed;
  r.hash = config_hash(config);
  r.dir = config.output / ("run-" + r.hash);
  std::filesystem::create_directories(r.dir);
  Artifacts out(r.dir);
  out.text("config.ini", to_ini(r.config));

  const PotentialSpec spec = config.potential_spec();
  validate_potential(spec);
  r.constants = estimate_constants(spec);

  const auto t_conn = Clock::now();
  ConnectionStage &cs = r.connection;
  cs.profiles = minimize_all(spec, config.connection);
  cs.actions = check_equal_actions(cs.profiles, config.equal_tol);
  ConnectionOptions refined = config.connection;
  refined.L = config.refine_L;
  refined.n = config.refine_n;
  cs.refined_sigma = check_equal_actions(spec, config.equal_tol, refined).sigma;
  for (int k = 0; k < 3; ++k) {
    try {
      cs.fits[k] = fit_decay(cs.profiles[k], spec, r.constants.delta_w);
    } catch (const Error &e) {
      r.errors.push_back("decay-fit " + pair_name(cs.profiles[k]) + ": " + e.what());
    }
  }
  cs.wall_time = seconds_since(t_conn);
  r.sigma = cs.actions.sigma;
  for (const ConnectionProfile &p : cs.profiles) out.text("connection_" + pair_name(p) + ".csv", io::profile_csv(p));
  out.json("connections.json", to_json(cs));

  check_gamma(config.diagnostics.gamma, config.diagnostics.gamma0, spec, gamma_cap(spec, r.constants, r.sigma));

  const Field *warm = nullptr;
  std::vector<Field> fields;
  fields.reserve(config.ladder.size());
  for (std::size_t i = 0; i < config.ladder.size(); ++i) {
    MemberResult m;
    m.epsilon = config.ladder[i];
    SolveConfig sc = r.config.solve;
    sc.epsilon = m.epsilon;
    sc.grid = 0;
    if (warm != nullptr) {
      sc.init = Initializer::WarmStart;
      sc.starts = 1;
    }
    m.grid = sc.resolved_grid();
    m.h = 2.0 / (m.grid - 1);
    const std::string dir = member_dir(m.epsilon);
    try {
      Solution sol = minimize(sc, spec, cs.profiles, warm);
      m.solve = sol.report;
      m.solved = true;
      fields.push_back(std::move(sol.field));
      warm = &fields.back();
    } catch (const Error &e) {
      m.errors.push_back(std::string("solve: ") + e.what());
    }
    const auto grid = std::make_shared<const DiskGrid>(m.grid);
    const Field test = build_test_function(grid, m.epsilon, sc.c0, cs.profiles, spec.wells());
    m.test_energy = energy(test, spec);
    if (m.solved) {
      const auto t_diag = Clock::now();
      m.diagnostics = diagnose(*warm, spec, r.constants, r.sigma, config.diagnostics);
      m.diagnose_time = seconds_since(t_diag);
      for (const std::string &e : m.diagnostics.errors) m.errors.push_back(e);
      const DiagnosticsReport &d = m.diagnostics;
      out.field(dir + "/field.bin", *warm, spec);
      nlohmann::json sj = to_json(m.solve);
      sj["test_energy"] = m.test_energy;
      out.json(dir + "/solve.json", sj);
      out.json(dir + "/diagnostics.json", to_json(d));
      if (d.certificate) {
        out.text(dir + "/lambda.csv", lambda_csv(d.certificate->rows));
        out.text(dir + "/certificate.csv", certificate_csv(*d.certificate));
      }
      if (d.geometry) out.text(dir + "/curves.csv", curves_csv(*d.geometry));
      if (d.width) out.text(dir + "/width.csv", width_csv(*d.width));
    }
    for (const std::string &e : m.errors) r.errors.push_back(dir + " " + e);
    r.members.push_back(std::move(m));
  }

  const std::string first_hash = r.members.front().solved ? r.members.front().solve.field_hash : "";
  r.soundness = soundness_checks(r.config, spec, cs.profiles, first_hash);
  r.checks = evaluate_acceptance(r);

  out.text("summary.csv", summary_csv(r));
  nlohmann::json acc;
  acc["format_version"] = io::kFormatVersion;
  acc["passed"] = r.passed();
  acc["soundness"] = to_json(r.soundness);
  acc["checks"] = to_json(r.checks);
  out.json("acceptance.json", acc);

  r.wall_time = seconds_since(t_run);
  nlohmann::json man;
  man["format_version"] = io::kFormatVersion;
  man["summary_version"] = kSummaryVersion;
  man["config_fnv1a"] = r.hash;
  man["config"] = to_json(r.config);
  man["versions"] = {{"triode", TRIODE_VERSION}, {"compiler", __VERSION__}, {"cxx", __cplusplus}};
  man["seed"] = config.seed;
  man["sigma"] = r.sigma;
  man["constants"] = {{"c_w", r.constants.c_w}, {"C_w", r.constants.C_w}, {"delta_w", r.constants.delta_w},
                      {"c1", r.constants.c1},   {"c2", r.constants.c2},   {"M", r.constants.M}};
  nlohmann::json times = {{"connect", cs.wall_time}, {"total", r.wall_time}};
  for (const MemberResult &m : r.members) {
    times["members"].push_back({{"epsilon", m.epsilon}, {"solve", m.solve.wall_time}, {"diagnose", m.diagnose_time}});
  }
  man["wall_times"] = times;
  man["errors"] = r.errors;
  man["passed"] = r.passed();
  man["files"] = out.listing();
  io::write_atomic(r.dir / "manifest.json", man.dump(2) + "\n");
  return r;
}

}  // namespace triode
