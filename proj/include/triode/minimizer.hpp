#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triode/connection.hpp"
#include "triode/disk.hpp"
#include "triode/optim.hpp"
#include "triode/potential.hpp"

namespace triode {

enum class Initializer { TestFunction, ConstantWell, Random, RotatedTestFunction, WarmStart };

Initializer parse_initializer(const std::string &s);
std::string to_string(Initializer init);
optim::StepRule parse_step_rule(const std::string &s);
std::string to_string(optim::StepRule rule);

struct SolveConfig {
  double epsilon = 0.1;
  int grid = 0;                  // nodes per side; 0 picks the grid rule below
  double points_per_eps = 8.0;   // grid rule h <= eps / points_per_eps
  double c0 = 0.4;
  Initializer init = Initializer::TestFunction;
  int well = 0;                  // constant-well initializer
  int rotation = 1;              // rotated-test-function: labels times w^rotation
  std::string warm_start;        // field dump path for Initializer::WarmStart
  optim::StepRule rule = optim::StepRule::Lbfgs;
  double tol_energy = 1e-11;
  double tol_grad = 0.0;         // <= 0: 1e-8 (1 + sigma) / eps
  int max_iter = 500000;
  int starts = 1;
  std::uint64_t seed = 1;

  int resolved_grid() const;
  /// Throws InvalidConfig unless h <= eps/4, eps in (0,1), tolerances > 0.
  void validate() const;
};

struct StartRecord {
  int index = 0;
  double energy = 0.0;
  std::string hash;
  std::string reason;
  bool converged = false;
};

struct SolveReport {
  double epsilon = 0.0;
  int grid = 0;
  double initial_energy = 0.0;
  double energy = 0.0;
  int iterations = 0;
  std::string reason;
  bool converged = false;
  double grad_max = 0.0;
  int accepted_increases = 0;
  double sup_u = 0.0;
  double eps_grad = 0.0;
  double wall_time = 0.0;
  int best_start = 0;
  std::vector<StartRecord> starts;
  bool basins_agree = true;  // all starts within 2 quadrature tolerances
  std::string field_hash;
};

struct Solution {
  Field field;
  SolveReport report;
};

/// Relative quadrature tolerance of the masked-grid energy, 2h.
double quadrature_tolerance(const DiskGrid &grid);

/// Initial field for start `k` of a multistart run (k = 0 is the configured
/// initializer; later starts rotate the well labels or reseed).
Field initial_field(const SolveConfig &config, const PotentialSpec &spec,
                    const std::array<ConnectionProfile, 3> &connections, int k,
                    const Field *warm = nullptr);

/// Bilinear transfer of `from` onto `grid` (clamped nodes reset to g_eps).
Field resample(const Field &from, std::shared_ptr<const DiskGrid> grid, double epsilon);

/// Monotone minimization of the discrete energy with the g_eps clamp. With
/// several starts the lowest energy wins, ties broken by the smaller field hash.
Solution minimize(const SolveConfig &config, const PotentialSpec &spec,
                  const std::array<ConnectionProfile, 3> &connections, const Field *warm = nullptr);

/// Solves down a strictly descending eps ladder, warm-starting each member
/// from the previous minimizer. Non-convergent members are flagged, not fatal.
std::vector<Solution> continuation_sweep(const std::vector<double> &epsilons, const SolveConfig &tmpl,
                                         const PotentialSpec &spec,
                                         const std::array<ConnectionProfile, 3> &connections);

}  // namespace triode
