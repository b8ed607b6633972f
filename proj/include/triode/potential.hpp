#pragma once

#include <array>
#include <string>

#include "triode/vec2.hpp"

namespace triode {

/// The three minima a1, a2, a3 of a triple-well potential.
struct WellSet {
  std::array<Vec2, 3> a;

  const Vec2 &operator[](int i) const { return a[static_cast<std::size_t>(i)]; }

  /// The cube roots of unity 1, w, w^2 (zeros of z^3 - 1).
  static WellSet cube_roots();
  double min_separation() const;
};

enum class PotentialKind { Cubic, PerturbedCubic, UserPolynomial };

PotentialKind parse_potential_kind(const std::string &s);
std::string to_string(PotentialKind kind);

/// Smooth compactly supported bump added to |z^3 - 1|^2:
///   s * phi(|u - c|^2 / rho^2) * (1 + tilt * d.(u - c) / rho)
/// with phi(q) = exp(1 - 1/(1 - q)) on q < 1. The linear tilt along d breaks
/// every reflection and rotation symmetry of the well triangle.
struct Perturbation {
  double amplitude = 0.0;  // s
  double radius = 0.2;     // rho
  Vec2 center{0.0, 0.0};
  double tilt = 0.5;
  double tilt_angle = 0.3;  // direction d = (cos, sin)
};

/// W(u) = |p(u)|^2 (+ bump) where p is the monic cubic with roots at the wells.
/// For the cubic kind p(z) = z^3 - 1.
class PotentialSpec {
 public:
  static PotentialSpec cubic();
  static PotentialSpec perturbed_cubic(const Perturbation &bump);
  static PotentialSpec user_polynomial(const WellSet &wells);

  PotentialKind kind() const { return kind_; }
  const WellSet &wells() const { return wells_; }
  const Perturbation &perturbation() const { return bump_; }

  double eval(const Vec2 &u) const;
  Vec2 grad(const Vec2 &u) const;
  Sym2 hess(const Vec2 &u) const;

  /// True when B_rho(center) stays clear of a rho-tube around every straight
  /// well-to-well segment. Always true for the unperturbed kinds.
  bool perturbation_admissible() const;

 private:
  PotentialSpec(PotentialKind kind, WellSet wells, Perturbation bump);

  PotentialKind kind_;
  WellSet wells_;
  Perturbation bump_;
};

// Free-function evaluators; all throw Error(InvalidInput) on non-finite u.
double eval_w(const PotentialSpec &spec, const Vec2 &u);
Vec2 grad_w(const PotentialSpec &spec, const Vec2 &u);
Sym2 hess_w(const PotentialSpec &spec, const Vec2 &u);

/// Measured constants of the well hypotheses.
struct PotentialConstants {
  double c_w = 0.0;      // lower quadratic well bound: W >= c_w/2 |u-a|^2
  double C_w = 0.0;      // upper quadratic well bound: W <= C_w/2 |u-a|^2
  double delta_w = 0.0;  // radius on which both bounds hold
  double c1 = 0.0;       // smallest Hessian eigenvalue over the wells
  double c2 = 0.0;       // largest Hessian eigenvalue over the wells
  double M = 0.0;        // coercivity radius: W_u(u).u > 0 for |u| > M
};

/// Checks distinct wells, W(a_i) = 0 and W > 0 on a sample grid away from the
/// wells. Throws Error(HypothesisViolation) naming the failing sample.
void validate_potential(const PotentialSpec &spec);

/// Dense-sampling estimate (64 radii x 256 angles per well). delta_w is the
/// largest sampled radius on which 2W/|u-a|^2 stays inside [c1/2, 2 c2].
PotentialConstants estimate_constants(const PotentialSpec &spec);

/// Largest admissible interface level gamma allowed by the main estimates:
/// min(1/2 min|a_i - a_j|, sqrt(sigma / (20 C_w))).
double gamma_cap(const PotentialSpec &spec, const PotentialConstants &k, double sigma);

}  // namespace triode
