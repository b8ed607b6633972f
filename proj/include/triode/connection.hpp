#pragma once

#include <array>
#include <string>
#include <vector>

#include "triode/potential.hpp"
#include "triode/vec2.hpp"

namespace triode {

/// Discretized heteroclinic profile U_ij on the uniform grid eta_k = -L + k h,
/// h = 2L/(n-1), with U(-L) = a_i and U(L) = a_j pinned. Well indices are
/// zero-based here; reports print them one-based.
struct ConnectionProfile {
  int i = 0;
  int j = 1;
  double L = 12.0;
  int n = 1024;
  std::vector<Vec2> values;
  double action = 0.0;
  double grad_max = 0.0;  // max-norm of the discrete action gradient at exit
  int iterations = 0;
  std::vector<std::string> warnings;

  double spacing() const { return 2.0 * L / (n - 1); }
  double eta(int k) const { return -L + k * spacing(); }

  /// Linear interpolation; constant extension by the end values beyond [-L, L].
  Vec2 operator()(double eta) const;

  /// The (j, i) profile obtained by reversing the node order.
  ConnectionProfile reversed() const;
};

struct ConnectionOptions {
  double L = 12.0;
  int n = 1024;
  double tol_grad = 1e-10;  // scaled by (1 + sigma)
  int max_iter = 200000;
};

/// Discrete action sum_k h (1/2 |dU/h|^2 + W(U_mid)).
double action(const ConnectionProfile &profile, const PotentialSpec &spec);

/// Gradient of the discrete action with respect to the interior node values;
/// the pinned end nodes get zero.
std::vector<Vec2> action_gradient(const ConnectionProfile &profile, const PotentialSpec &spec);

/// Straight-segment initializer a_i -> a_j with a tanh-shaped parametrization.
ConnectionProfile segment_profile(const PotentialSpec &spec, int i, int j, double L, int n);

/// Minimizes the discrete action with pinned ends, starting from the segment
/// initializer. Throws Error(NonConvergence) if the gradient criterion is not
/// met.
ConnectionProfile minimize_action(const PotentialSpec &spec, int i, int j,
                                  const ConnectionOptions &opt = {});

/// Minimizes (1,2), (2,3), (3,1) in that order.
std::array<ConnectionProfile, 3> minimize_all(const PotentialSpec &spec,
                                              const ConnectionOptions &opt = {});

struct EqualActionReport {
  std::array<double, 3> sigmas{};  // sigma_12, sigma_23, sigma_31
  double max_rel_deviation = 0.0;
  double tol = 0.0;
  bool pass = false;
  double sigma = 0.0;  // mean of the three
};

EqualActionReport check_equal_actions(const std::array<ConnectionProfile, 3> &profiles, double tol);
EqualActionReport check_equal_actions(const PotentialSpec &spec, double tol,
                                      const ConnectionOptions &opt = {});

struct DecayFit {
  double K = 0.0;
  double k = 0.0;
  double residual = 0.0;  // RMS log residual over the log-range of the window
  int points = 0;
};

struct TailFits {
  DecayFit left;   // approach to a_i as eta -> -inf
  DecayFit right;  // approach to a_j as eta -> +inf
};

/// Least-squares fit of log|U - a| against eta on each tail, using nodes with
/// floor <= |U - a| < delta_w / 2. Throws Error(InsufficientTail) below 8 points.
TailFits fit_decay(const ConnectionProfile &profile, const PotentialSpec &spec, double delta_w,
                   double floor = 1e-9);

/// Richardson-style extrapolation of sigma(h) = s + c h^2 + d h^4 through three
/// (h, sigma) samples.
double extrapolate_sigma(const std::array<double, 3> &h, const std::array<double, 3> &sigma);

/// Closest approach of the profile to a point (e.g. the origin).
double min_distance_to(const ConnectionProfile &profile, const Vec2 &p);

}  // namespace triode
