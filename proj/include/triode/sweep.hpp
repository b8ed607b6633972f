#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "triode/connection.hpp"
#include "triode/diagnostics.hpp"
#include "triode/minimizer.hpp"
#include "triode/potential.hpp"

namespace triode {

// ---------------------------------------------------------------------------
// Experiment configuration: INI text with [section] key = value lines.

enum class ValueType { Real, Integer, Text, RealList, TextList };

struct SchemaEntry {
  std::string section;
  std::string key;
  ValueType type;
  std::string default_value;
  std::string constraint;  // human-readable range or choice list
  std::string doc;
};

/// Every accepted key. Unknown sections or keys are rejected.
const std::vector<SchemaEntry> &config_schema();
nlohmann::json schema_json();

/// Identifiers accepted by [acceptance] checks, in report order.
const std::vector<std::string> &acceptance_check_ids();

struct ExperimentConfig {
  std::string potential = "cubic";
  Perturbation perturbation;
  std::array<Vec2, 3> wells = WellSet::cube_roots().a;

  ConnectionOptions connection;
  double refine_L = 16.0;  // refinement used by the sigma stability check
  int refine_n = 2048;
  double equal_tol = 1e-6;

  SolveConfig solve;  // epsilon is taken from the ladder
  int grid_cap = 513;

  DiagnosticsOptions diagnostics;
  std::vector<double> ladder{0.2, 0.1, 0.05};
  std::filesystem::path output = "runs";
  std::uint64_t seed = 1;
  std::vector<std::string> checks{"all"};

  PotentialSpec potential_spec() const;
  /// Throws InvalidConfig naming the offending key.
  void validate() const;
};

ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);

/// Canonical form used for hashing; excludes the output directory.
nlohmann::json to_json(const ExperimentConfig &config);
std::string to_ini(const ExperimentConfig &config);
std::string config_hash(const ExperimentConfig &config);

// ---------------------------------------------------------------------------
// Pipeline.

struct ConnectionStage {
  std::array<ConnectionProfile, 3> profiles;
  EqualActionReport actions;
  double refined_sigma = 0.0;
  std::array<TailFits, 3> fits;
  double wall_time = 0.0;
};

struct MemberResult {
  double epsilon = 0.0;
  int grid = 0;
  double h = 0.0;
  bool solved = false;
  SolveReport solve;
  double test_energy = 0.0;
  DiagnosticsReport diagnostics;
  std::vector<std::string> errors;
  double diagnose_time = 0.0;
};

struct SoundnessReport {
  int trials = 20;
  double adjoint_max_rel = 0.0;  // energy_gradient vs central differences
  double grad_w_max_err = 0.0;   // grad W vs central differences
  bool deterministic = false;    // re-solve of the first member is bitwise equal
  std::string first_hash, repeat_hash;
};

struct Check {
  std::string id;
  std::string title;
  bool enabled = true;
  bool pass = false;
  std::string detail;
};

struct RunResult {
  ExperimentConfig config;
  std::string hash;
  std::filesystem::path dir;
  PotentialConstants constants;
  double sigma = 0.0;
  ConnectionStage connection;
  std::vector<MemberResult> members;
  SoundnessReport soundness;
  std::vector<Check> checks;
  std::vector<std::string> errors;
  double wall_time = 0.0;

  bool passed() const;
};

nlohmann::json to_json(const SolveReport &report);
nlohmann::json to_json(const ConnectionStage &stage);
nlohmann::json to_json(const SoundnessReport &report);
nlohmann::json to_json(const std::vector<Check> &checks);

inline constexpr int kSummaryVersion = 1;

/// Public column contract of summary.csv.
const std::vector<std::string> &summary_columns();
std::string summary_csv(const RunResult &result);

/// Runs connect, then solve and diagnose down the ladder with warm starts,
/// writing everything under output/run-<hash>. Stage errors are recorded and
/// the pipeline moves on where it can.
RunResult run(const ExperimentConfig &config);

/// Gradient and potential consistency checks plus a determinism re-solve.
SoundnessReport soundness_checks(const ExperimentConfig &config, const PotentialSpec &spec,
                                 const std::array<ConnectionProfile, 3> &profiles, const std::string &first_hash);

/// Evaluates the acceptance criteria on a finished run. The smallest ladder
/// member plays the role of the finest scale.
std::vector<Check> evaluate_acceptance(const RunResult &result);

}  // namespace triode
