#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "triode/disk.hpp"
#include "triode/potential.hpp"

namespace triode {

struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;

  double length() const;
};

/// Nearest point on a family of polylines.
struct Nearest {
  Vec2 point;
  double distance = 0.0;
};
std::optional<Nearest> nearest_on(const std::vector<Polyline> &family, const Vec2 &z);
double distance_to(const std::vector<Polyline> &family, const Vec2 &z);

/// Polyline with cumulative arclength, evaluated at any t in [0, length].
class ArclengthCurve {
 public:
  explicit ArclengthCurve(std::vector<Vec2> points);
  double length() const { return s_.empty() ? 0.0 : s_.back(); }
  Vec2 at(double t) const;
  const std::vector<Vec2> &points() const { return p_; }
  const std::vector<double> &knots() const { return s_; }

 private:
  std::vector<Vec2> p_;
  std::vector<double> s_;
};

// ---------------------------------------------------------------------------
// Row measures, junction height and the lower-bound certificate.

struct LambdaRows {
  double threshold = 0.0;
  std::vector<double> y;
  std::vector<double> chord;  // node count of the row inside B_1, times h
  std::vector<double> lambda1, lambda2, lambda3;
};

/// Rows y in [-1/2, 1]: measure (node count x h) of {|u - a_i| < threshold}.
LambdaRows lambda_rows(const Field &field, double threshold);

/// Smallest row with lambda1 + lambda2 >= chord - alpha sqrt(eps). Throws
/// DegenerateField if no row qualifies.
double y_star(const Field &field, const LambdaRows &rows, double alpha);

/// Smallest alpha with c_w alpha / 8 >= 2 sigma.
double certificate_alpha(const PotentialConstants &k, double sigma);

struct LowerBoundCertificate {
  double alpha = 0.0;
  double threshold = 0.0;
  double y_star = 0.0;
  double k_measure = 0.0;
  double m_measure = 0.0;
  double beta = 0.0;
  double interface_term = 0.0;  // (sqrt3/2 |K| + |M|)(sigma - C_w sqrt(eps))
  double beta_term = 0.0;       // c_w alpha beta / 8
  double top_term = 0.0;        // sigma max(1 - c0 eps - y*, 0)
  double value = 0.0;
  double energy = 0.0;
  double tolerance = 0.02;      // relative
  LambdaRows rows;
};

/// Evaluates the lower bound from measured sets. Throws CertificateViolation
/// when value > energy (1 + tolerance).
LowerBoundCertificate lower_bound_certificate(const Field &field, const PotentialSpec &spec,
                                              const PotentialConstants &constants, double sigma);

/// 1 - x + sqrt(3 + 4 (x + 1/2)^2); the junction-height penalty of the
/// three-interface lower bound, minimal (= 3) at x = 0.
double junction_height_profile(double x);

// ---------------------------------------------------------------------------
// Level curves and the diffuse interface.

/// Marching squares on phi(z) = |u(z) - a_well| - level over the full node
/// square, linked into polylines and clipped to the closed unit disk. Nodes
/// where `mask` is false are treated as outside the sub-level set. The
/// sub-level side lies to the left of each polyline.
std::vector<Polyline> contour(const Field &field, int well, double level,
                              const std::vector<std::uint8_t> *mask = nullptr);

struct InterfaceGeometry {
  double gamma = 0.0;
  std::array<std::vector<Polyline>, 3> curves;
  std::vector<std::uint8_t> interface_mask;  // nodes farther than gamma from all wells
  std::size_t interface_nodes = 0;
};

/// Throws InvalidConfig unless gamma < min(gamma0, 1/2 min|a_i - a_j|, cap).
void check_gamma(double gamma, double gamma0, const PotentialSpec &spec, double cap);

InterfaceGeometry extract_level_curves(const Field &field, double gamma);

/// Triod with legs at pi/2, 7pi/6, 11pi/6 from `center`.
double distance_to_triod(const Vec2 &z, const Vec2 &center);

struct Localization {
  Vec2 center;
  double center_offset = 0.0;
  double max_distance = 0.0;
};

/// Minimax triod fit over the interface nodes. Throws DegenerateField when the
/// diffuse interface is empty.
Localization localization_distance(const InterfaceGeometry &geometry, const Field &field);

// ---------------------------------------------------------------------------
// Width of the transition layer.

struct WidthSample {
  int family = 0;
  Vec2 point;
  double r1 = 0.0;
};

struct WidthReport {
  std::vector<WidthSample> samples;
  double max_r1 = 0.0;
  double c0_measured = 0.0;  // max r1 / eps
};

/// Splits the three families (joined end to end) into `samples` strata of equal
/// arclength and keeps the point of largest r1 in each, where r1 is the
/// distance to the union of the other two families. Throws DegenerateField if a
/// family is empty.
WidthReport interface_width(const InterfaceGeometry &geometry, const Field &field, int samples = 50);

struct CompetitorBound {
  double potential_inside = 0.0;   // int_{B(z1,r1)} W(u)/eps
  double energy_inside = 0.0;      // J_eps(u, B(z1,r1))
  double competitor_energy = 0.0;  // J_eps(v, B(z1,r1))
};

/// Replaces u by a_well inside B(z1, r1 - eps), blends linearly on the width-eps
/// annulus and evaluates both energies over cells centred in B(z1, r1).
CompetitorBound competitor_energy_bound(const Field &field, const Vec2 &z1, double r1,
                                        const PotentialSpec &spec, int well = 0);
Field competitor_field(const Field &field, const Vec2 &z1, double r1, const Vec2 &target);

// ---------------------------------------------------------------------------
// Junction structure along the a_1 boundary curve.

struct BoundaryCurve {
  std::vector<Polyline> pieces;   // every clipped piece of the component boundary
  std::vector<Vec2> curve;        // oriented from A to B
  Vec2 a, b;
  bool single_arc = false;        // one piece, two endpoints on the circle
};

/// Boundary of the connected component of {|u - a1| < gamma} that touches the
/// clamped boundary, minus the circle, oriented from the end nearest (0, 1).
/// Throws StructureViolation if no arc joins two boundary points.
BoundaryCurve boundary_curve(const Field &field, double gamma, const WellSet &wells);

struct TriplePoint {
  Vec2 p, q, r;
  double t = 0.0;
  double dist_pq = 0.0, dist_pr = 0.0;
  double residual_p = 0.0;  // ||u(P) - a1| - gamma|
  bool negative_side = false, positive_side = false;
  int sign_changes = 0;
};

/// alpha(t) = dist(eta(t), Gamma^2) - dist(eta(t), Gamma^3) along the curve;
/// bisection on the first sign change inside the half disk (else the first).
TriplePoint triple_point(const InterfaceGeometry &geometry, const BoundaryCurve &curve, const Field &field,
                         double tol);

/// Row y0 in [1/4, 3/8] on which every curve vertex with |y - y0| <= band is at
/// least as close to Gamma^2 as to Gamma^3.
std::optional<double> closer_to_second_row(const InterfaceGeometry &geometry, const BoundaryCurve &curve,
                                           const DiskGrid &grid, double band);

/// Greedy points along the curve at chord distance exactly `spacing`.
std::vector<Vec2> discretize_curve(const ArclengthCurve &curve, double spacing, double tol);

struct JunctionFamilies {
  int k = 1;
  double spacing = 0.0;  // 8 C0 eps
  std::vector<Vec2> points;
  std::vector<int> labels;  // 2 or 3
  int count2 = 0, count3 = 0;
  int window_start = -1;
  Vec2 p;
  std::vector<Vec2> q, r;
  double min_pair_distance = 0.0;
  double min_chord = 0.0;   // smallest non-adjacent pairwise distance of the z_i
  bool distance_bounds_ok = false;
  bool separation_ok = false;
};

/// Balanced-window construction at level k. Throws ScaleLimit when the curve
/// holds fewer than 2^(k+1) points and StructureViolation when no balanced
/// window exists.
JunctionFamilies discretize_interface(const InterfaceGeometry &geometry, const BoundaryCurve &curve,
                                      double c0_measured, double eps, int k, double tol);

// ---------------------------------------------------------------------------
// Blow-down comparison.

/// Piecewise-constant triod field value at z.
Vec2 triod_value(const Vec2 &z, const Vec2 &center, double orientation, const WellSet &wells);

struct L1Fit {
  double at_origin = 0.0;
  double best = 0.0;
  Vec2 center;
  double orientation = 0.0;
};

double l1_distance(const Field &field, const Vec2 &center, double orientation);
L1Fit l1_blowdown_distance(const Field &field, const Vec2 &center = {}, double orientation = 0.0);

// ---------------------------------------------------------------------------

struct DiagnosticsOptions {
  double gamma = 0.05;
  double gamma0 = 1.0;  // stand-in for the maximum-principle threshold
  int width_samples = 50;
  int k = 1;
};

struct DiagnosticsReport {
  double epsilon = 0.0;
  double energy = 0.0;
  double sigma = 0.0;
  std::optional<LowerBoundCertificate> certificate;
  std::optional<InterfaceGeometry> geometry;
  std::optional<Localization> localization;
  std::optional<WidthReport> width;
  std::optional<BoundaryCurve> boundary;
  std::optional<TriplePoint> triple;
  std::optional<double> row_y0;
  std::optional<JunctionFamilies> families;
  std::optional<L1Fit> l1;
  std::vector<std::string> errors;  // "stage: message"
  bool sublevel_disjoint = true;
};

/// Runs every diagnostic; stage failures are recorded, not thrown.
DiagnosticsReport diagnose(const Field &field, const PotentialSpec &spec, const PotentialConstants &constants,
                           double sigma, const DiagnosticsOptions &options);

nlohmann::json to_json(const DiagnosticsReport &report);

/// CSV exports: rows, polylines (family,piece,x,y), r1 samples, certificate terms.
std::string lambda_csv(const LambdaRows &rows);
std::string curves_csv(const InterfaceGeometry &geometry);
std::string width_csv(const WidthReport &width);
std::string certificate_csv(const LowerBoundCertificate &cert);

}  // namespace triode
