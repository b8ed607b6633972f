#include <cstdio>
#include <cstdlib>
#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "triode/connection.hpp"
#include "triode/diagnostics.hpp"
#include "triode/error.hpp"
#include "triode/io.hpp"
#include "triode/minimizer.hpp"
#include "triode/sweep.hpp"

using namespace triode;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

void apply_thread_env() {
  const char *s = std::getenv("TRIODE_THREADS");
  if (s == nullptr || *s == '\0') {
    set_kernel_threads(1);
    return;
  }
  char *end = nullptr;
  const long n = std::strtol(s, &end, 10);
  if (*end != '\0' || n < 1) throw Error(ErrorKind::InvalidConfig, "TRIODE_THREADS must be a positive integer");
  set_kernel_threads(static_cast<int>(n));
}

PotentialSpec potential_of(const std::string &config_path) {
  if (config_path.empty()) return PotentialSpec::cubic();
  return load_config(config_path).potential_spec();
}

void print_checks(const RunResult &r) {
  std::printf("run %s -> %s\n", r.hash.c_str(), r.dir.string().c_str());
  for (const Check &c : r.checks) {
    const char *tag = !c.enabled ? "SKIP" : c.pass ? "PASS" : "FAIL";
    std::printf("%s %-16s %s\n", tag, c.id.c_str(), c.detail.c_str());
  }
  for (const std::string &e : r.errors) std::printf("note %s\n", e.c_str());
}

int cmd_run(const std::vector<std::string> &configs, int jobs) {
  std::vector<ExperimentConfig> cfgs;
  for (const std::string &p : configs) cfgs.push_back(load_config(p));
  bool ok = true;
  if (jobs <= 1 || cfgs.size() == 1) {
    for (const ExperimentConfig &c : cfgs) {
      const RunResult r = run(c);
      print_checks(r);
      ok = ok && r.passed();
    }
    return ok ? 0 : kExitFail;
  }
  // Independent runs: one kernel thread each, a bounded number in flight.
  set_kernel_threads(1);
  std::size_t next = 0;
  while (next < cfgs.size()) {
    std::vector<std::future<RunResult>> batch;
    for (int k = 0; k < jobs && next < cfgs.size(); ++k, ++next) {
      batch.push_back(std::async(std::launch::async, [&c = cfgs[next]] { return run(c); }));
    }
    for (auto &f : batch) {
      const RunResult r = f.get();
      print_checks(r);
      ok = ok && r.passed();
    }
  }
  return ok ? 0 : kExitFail;
}

int cmd_connect(const std::string &config, ConnectionOptions opt, double tol, const std::string &out_dir) {
  const PotentialSpec spec = potential_of(config);
  const auto profiles = minimize_all(spec, opt);
  const EqualActionReport rep = check_equal_actions(profiles, tol);
  const PotentialConstants k = estimate_constants(spec);
  ConnectionStage stage;
  stage.profiles = profiles;
  stage.actions = rep;
  for (int i = 0; i < 3; ++i) {
    try {
      stage.fits[i] = fit_decay(profiles[i], spec, k.delta_w);
    } catch (const Error &e) {
      std::fprintf(stderr, "warning: %s\n", e.what());
    }
  }
  const std::filesystem::path dir(out_dir);
  for (const ConnectionProfile &p : profiles) {
    io::write_atomic(dir / ("connection_" + std::to_string(p.i + 1) + "_" + std::to_string(p.j + 1) + ".csv"),
                     io::profile_csv(p));
    std::printf("sigma_%d%d %.12g\n", p.i + 1, p.j + 1, p.action);
  }
  io::write_atomic(dir / "connections.json", to_json(stage).dump(2) + "\n");
  std::printf("%s equal actions: spread %.3g (tol %.3g)\n", rep.pass ? "PASS" : "FAIL", rep.max_rel_deviation, tol);
  return rep.pass ? 0 : kExitFail;
}

struct SolveArgs {
  SolveConfig cfg;
  std::string init = "test-function";
  std::string rule = "lbfgs";
  std::string config;
  std::string out;
  std::string report;
};

int cmd_solve(SolveArgs a) {
  a.cfg.init = parse_initializer(a.init);
  a.cfg.rule = parse_step_rule(a.rule);
  const PotentialSpec spec = potential_of(a.config);
  const auto profiles = minimize_all(spec);
  const Solution sol = minimize(a.cfg, spec, profiles);
  const SolveReport &r = sol.report;
  if (!a.out.empty()) io::write_field(a.out, sol.field, spec);
  if (!a.report.empty()) io::write_atomic(a.report, to_json(r).dump(2) + "\n");
  std::printf("eps %g N %d energy %.12g iterations %d reason %s grad %.3g hash %s\n", r.epsilon, r.grid, r.energy,
              r.iterations, r.reason.c_str(), r.grad_max, r.field_hash.c_str());
  if (r.starts.size() > 1) std::printf("best start %d basins agree %s\n", r.best_start, r.basins_agree ? "yes" : "no");
  return r.converged ? 0 : kExitFail;
}

int cmd_diagnose(const std::string &field_path, DiagnosticsOptions opt, const std::string &out_dir) {
  const io::FieldFile ff = io::read_field(field_path);
  const auto profiles = minimize_all(ff.spec);
  const double sigma = check_equal_actions(profiles, 1e-6).sigma;
  const PotentialConstants k = estimate_constants(ff.spec);
  const DiagnosticsReport rep = diagnose(ff.field, ff.spec, k, sigma, opt);
  const std::filesystem::path dir(out_dir);
  io::write_atomic(dir / "diagnostics.json", to_json(rep).dump(2) + "\n");
  if (rep.certificate) {
    io::write_atomic(dir / "lambda.csv", lambda_csv(rep.certificate->rows));
    io::write_atomic(dir / "certificate.csv", certificate_csv(*rep.certificate));
  }
  if (rep.geometry) io::write_atomic(dir / "curves.csv", curves_csv(*rep.geometry));
  if (rep.width) io::write_atomic(dir / "width.csv", width_csv(*rep.width));
  std::printf("eps %g energy %.12g 3sigma %.12g\n", rep.epsilon, rep.energy, 3.0 * sigma);
  if (rep.certificate) std::printf("certificate %.6g y* %.6g\n", rep.certificate->value, rep.certificate->y_star);
  if (rep.width) std::printf("C0 %.6g\n", rep.width->c0_measured);
  for (const std::string &e : rep.errors) std::printf("error %s\n", e.c_str());
  return rep.errors.empty() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Vector Allen-Cahn triple junction lab"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  int jobs = 1;
  bool print_schema = false;
  auto *run_cmd = app.add_subcommand("run", "connect, solve and diagnose down an epsilon ladder");
  run_cmd->add_option("config", configs, "INI experiment config(s)");
  run_cmd->add_option("--jobs", jobs, "independent configs run concurrently")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--schema", print_schema, "print the config schema as JSON and exit");

  ConnectionOptions copt;
  double ctol = 1e-6;
  std::string cconfig, cout_dir = "connections";
  auto *connect_cmd = app.add_subcommand("connect", "compute the three heteroclinic connections");
  connect_cmd->add_option("--L", copt.L, "half-length of the domain")->capture_default_str();
  connect_cmd->add_option("--n", copt.n, "node count")->capture_default_str();
  connect_cmd->add_option("--tol-g", copt.tol_grad, "gradient tolerance (times 1 + sigma)")->capture_default_str();
  connect_cmd->add_option("--equal-tol", ctol, "allowed relative spread of the actions")->capture_default_str();
  connect_cmd->add_option("--config", cconfig, "take the potential from an experiment config");
  connect_cmd->add_option("--out-dir", cout_dir, "output directory")->capture_default_str();

  SolveArgs sa;
  auto *solve_cmd = app.add_subcommand("solve", "minimize the energy at one epsilon");
  solve_cmd->add_option("--epsilon", sa.cfg.epsilon, "interface scale")->capture_default_str();
  solve_cmd->add_option("--grid", sa.cfg.grid, "nodes per side (0: h <= eps/ppe)")->capture_default_str();
  solve_cmd->add_option("--ppe", sa.cfg.points_per_eps, "grid points per epsilon")->capture_default_str();
  solve_cmd->add_option("--c0", sa.cfg.c0, "boundary ramp constant")->capture_default_str();
  solve_cmd->add_option("--init", sa.init, "test-function | constant-well | random | rotated-test-function | warm-start")
      ->capture_default_str();
  solve_cmd->add_option("--warm", sa.cfg.warm_start, "field dump for --init warm-start");
  solve_cmd->add_option("--rule", sa.rule, "lbfgs | descent")->capture_default_str();
  solve_cmd->add_option("--tol-e", sa.cfg.tol_energy, "relative energy stall tolerance")->capture_default_str();
  solve_cmd->add_option("--tol-g", sa.cfg.tol_grad, "gradient max-norm tolerance (0: default)")->capture_default_str();
  solve_cmd->add_option("--max-iter", sa.cfg.max_iter, "iteration cap")->capture_default_str();
  solve_cmd->add_option("--starts", sa.cfg.starts, "number of starts")->capture_default_str();
  solve_cmd->add_option("--seed", sa.cfg.seed, "random seed")->capture_default_str();
  solve_cmd->add_option("--config", sa.config, "take the potential from an experiment config");
  solve_cmd->add_option("--out", sa.out, "field dump path");
  solve_cmd->add_option("--report", sa.report, "JSON report path");

  std::string field_path, dout_dir = "diagnostics";
  DiagnosticsOptions dopt;
  auto *diag_cmd = app.add_subcommand("diagnose", "measure a field dump");
  diag_cmd->add_option("field", field_path, "field dump")->required();
  diag_cmd->add_option("--gamma", dopt.gamma, "interface level")->capture_default_str();
  diag_cmd->add_option("--gamma0", dopt.gamma0, "maximum-principle threshold stand-in")->capture_default_str();
  diag_cmd->add_option("--samples", dopt.width_samples, "width samples")->capture_default_str();
  diag_cmd->add_option("--k", dopt.k, "junction family level")->capture_default_str();
  diag_cmd->add_option("--out-dir", dout_dir, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    apply_thread_env();
    if (*run_cmd) {
      if (print_schema) {
        std::cout << schema_json().dump(2) << "\n";
        return 0;
      }
      if (configs.empty()) throw Error(ErrorKind::InvalidConfig, "run needs at least one config");
      return cmd_run(configs, jobs);
    }
    if (*connect_cmd) return cmd_connect(cconfig, copt, ctol, cout_dir);
    if (*solve_cmd) return cmd_solve(sa);
    if (*diag_cmd) return cmd_diagnose(field_path, dopt, dout_dir);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
