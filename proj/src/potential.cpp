#include "triode/potential.hpp"

#include <algorithm>
#include <complex>
#include <cstdio>
#include <limits>

#include "triode/error.hpp"

namespace triode {

namespace {

using cplx = std::complex<double>;

cplx to_c(const Vec2 &v) { return {v.x, v.y}; }

void require_finite(const Vec2 &u) {
  if (!is_finite(u)) throw Error(ErrorKind::InvalidInput, "non-finite order parameter");
}

std::string describe(const Vec2 &u) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.6g, %.6g)", u.x, u.y);
  return buf;
}

// Distance from point p to the segment [a, b].
double segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b) {
  const Vec2 d = b - a;
  const double len2 = norm2(d);
  double s = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return dist(p, a + s * d);
}

}  // namespace

WellSet WellSet::cube_roots() {
  const double s = std::sqrt(3.0) / 2.0;
  return WellSet{{Vec2{1.0, 0.0}, Vec2{-0.5, s}, Vec2{-0.5, -s}}};
}

double WellSet::min_separation() const {
  return std::min({dist(a[0], a[1]), dist(a[1], a[2]), dist(a[2], a[0])});
}

PotentialKind parse_potential_kind(const std::string &s) {
  if (s == "cubic") return PotentialKind::Cubic;
  if (s == "perturbed-cubic") return PotentialKind::PerturbedCubic;
  if (s == "user-polynomial") return PotentialKind::UserPolynomial;
  throw Error(ErrorKind::InvalidConfig, "unknown potential kind '" + s + "'");
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Cubic: return "cubic";
    case PotentialKind::PerturbedCubic: return "perturbed-cubic";
    case PotentialKind::UserPolynomial: return "user-polynomial";
  }
  return "unknown";
}

PotentialSpec::PotentialSpec(PotentialKind kind, WellSet wells, Perturbation bump)
    : kind_(kind), wells_(wells), bump_(bump) {
  for (int i = 0; i < 3; ++i) {
    if (!is_finite(wells_[i])) throw Error(ErrorKind::InvalidInput, "non-finite well");
  }
  if (wells_.min_separation() <= 0.0) {
    throw Error(ErrorKind::InvalidInput, "wells must be pairwise distinct");
  }
  if (kind_ == PotentialKind::PerturbedCubic && !(bump_.radius > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "perturbation radius must be positive");
  }
}

PotentialSpec PotentialSpec::cubic() {
  return PotentialSpec(PotentialKind::Cubic, WellSet::cube_roots(), Perturbation{});
}

PotentialSpec PotentialSpec::perturbed_cubic(const Perturbation &bump) {
  return PotentialSpec(PotentialKind::PerturbedCubic, WellSet::cube_roots(), bump);
}

PotentialSpec PotentialSpec::user_polynomial(const WellSet &wells) {
  return PotentialSpec(PotentialKind::UserPolynomial, wells, Perturbation{});
}

namespace {

struct PolyEval {
  cplx p, dp, ddp;
};

PolyEval poly(const PotentialSpec &spec, const Vec2 &u) {
  const cplx z = to_c(u);
  if (spec.kind() == PotentialKind::UserPolynomial) {
    const cplx r1 = to_c(spec.wells()[0]), r2 = to_c(spec.wells()[1]), r3 = to_c(spec.wells()[2]);
    const cplx e1 = z - r1, e2 = z - r2, e3 = z - r3;
    return {e1 * e2 * e3, e1 * e2 + e2 * e3 + e1 * e3, 2.0 * (e1 + e2 + e3)};
  }
  return {z * z * z - 1.0, 3.0 * z * z, 6.0 * z};
}

// Bump value, gradient and Hessian. Zero outside the open support.
struct BumpEval {
  double v = 0.0;
  Vec2 g;
  Sym2 h;
};

BumpEval bump(const Perturbation &b, const Vec2 &u) {
  BumpEval out;
  if (b.amplitude == 0.0) return out;
  const Vec2 w = u - b.center;
  const double rho2 = b.radius * b.radius;
  const double q = norm2(w) / rho2;
  if (q >= 1.0) return out;
  const double om = 1.0 - q;
  const double phi = std::exp(1.0 - 1.0 / om);
  const double dphi = -phi / (om * om);
  const double ddphi = phi * (1.0 / (om * om * om * om) - 2.0 / (om * om * om));
  const Vec2 d{std::cos(b.tilt_angle), std::sin(b.tilt_angle)};
  const Vec2 dl = (b.tilt / b.radius) * d;  // gradient of the tilt factor
  const double tf = 1.0 + dot(dl, w);
  const Vec2 gq = (2.0 / rho2) * w;
  const Vec2 gphi = dphi * gq;
  const double s = b.amplitude;
  out.v = s * phi * tf;
  out.g = s * (tf * gphi + phi * dl);
  const double c = 2.0 / rho2 * dphi;
  Sym2 hphi{ddphi * gq.x * gq.x + c, ddphi * gq.x * gq.y, ddphi * gq.y * gq.y + c};
  out.h.xx = s * (tf * hphi.xx + 2.0 * gphi.x * dl.x);
  out.h.xy = s * (tf * hphi.xy + gphi.x * dl.y + gphi.y * dl.x);
  out.h.yy = s * (tf * hphi.yy + 2.0 * gphi.y * dl.y);
  return out;
}

}  // namespace

double PotentialSpec::eval(const Vec2 &u) const {
  require_finite(u);
  const PolyEval e = poly(*this, u);
  double w = std::norm(e.p);
  if (kind_ == PotentialKind::PerturbedCubic) w += bump(bump_, u).v;
  return w;
}

Vec2 PotentialSpec::grad(const Vec2 &u) const {
  require_finite(u);
  const PolyEval e = poly(*this, u);
  const cplx g = 2.0 * std::conj(e.dp) * e.p;
  Vec2 out{g.real(), g.imag()};
  if (kind_ == PotentialKind::PerturbedCubic) out += bump(bump_, u).g;
  return out;
}

Sym2 PotentialSpec::hess(const Vec2 &u) const {
  require_finite(u);
  const PolyEval e = poly(*this, u);
  const double lap = 2.0 * std::norm(e.dp);
  const cplx q = e.p * std::conj(e.ddp);
  Sym2 h{lap + 2.0 * q.real(), 2.0 * q.imag(), lap - 2.0 * q.real()};
  if (kind_ == PotentialKind::PerturbedCubic) {
    const BumpEval b = bump(bump_, u);
    h.xx += b.h.xx;
    h.xy += b.h.xy;
    h.yy += b.h.yy;
  }
  return h;
}

bool PotentialSpec::perturbation_admissible() const {
  if (kind_ != PotentialKind::PerturbedCubic || bump_.amplitude == 0.0) return true;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    if (segment_distance(bump_.center, wells_[i], wells_[j]) <= 2.0 * bump_.radius) return false;
  }
  return true;
}

double eval_w(const PotentialSpec &spec, const Vec2 &u) { return spec.eval(u); }
Vec2 grad_w(const PotentialSpec &spec, const Vec2 &u) { return spec.grad(u); }
Sym2 hess_w(const PotentialSpec &spec, const Vec2 &u) { return spec.hess(u); }

void validate_potential(const PotentialSpec &spec) {
  const WellSet &a = spec.wells();
  if (!(a.min_separation() > 1e-9)) throw Error(ErrorKind::HypothesisViolation, "wells are not distinct");
  for (int i = 0; i < 3; ++i) {
    const double w = spec.eval(a[i]);
    if (std::abs(w) > 1e-12) {
      throw Error(ErrorKind::HypothesisViolation, "W(a_" + std::to_string(i + 1) + ") = " +
                                                      std::to_string(w) + " is not zero");
    }
  }
  double extent = 0.0;
  for (int i = 0; i < 3; ++i) extent = std::max(extent, norm(a[i]));
  extent = 2.0 * extent + 1.0;
  const int n = 201;
  const double excl = 1e-3 * a.min_separation();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 u{-extent + 2.0 * extent * ix / (n - 1), -extent + 2.0 * extent * iy / (n - 1)};
      if (std::min({dist(u, a[0]), dist(u, a[1]), dist(u, a[2])}) < excl) continue;
      if (!(spec.eval(u) > 0.0)) {
        throw Error(ErrorKind::HypothesisViolation, "W <= 0 away from the wells at " + describe(u));
      }
    }
  }
}

PotentialConstants estimate_constants(const PotentialSpec &spec) {
  validate_potential(spec);
  constexpr int kRadii = 64;
  constexpr int kAngles = 256;
  const WellSet &a = spec.wells();
  PotentialConstants k;

  k.c1 = std::numeric_limits<double>::infinity();
  k.c2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    double lo = 0.0, hi = 0.0;
    spec.hess(a[i]).eigenvalues(lo, hi);
    if (!(lo > 0.0)) {
      throw Error(ErrorKind::HypothesisViolation,
                  "degenerate well a_" + std::to_string(i + 1) + " (Hessian eigenvalue " +
                      std::to_string(lo) + ")");
    }
    k.c1 = std::min(k.c1, lo);
    k.c2 = std::max(k.c2, hi);
  }

  // Quadratic sandwich around each well. Radii are scanned outward; the first
  // ring leaving [c1/2, 2 c2] ends the admissible range.
  const double delta_max = 0.5 * a.min_separation();
  const double lo_band = 0.5 * k.c1, hi_band = 2.0 * k.c2;
  double c_w = std::numeric_limits<double>::infinity(), C_w = 0.0, delta_w = 0.0;
  for (int r = 0; r < kRadii; ++r) {
    const double delta = delta_max * (r + 1) / kRadii;
    double ring_lo = std::numeric_limits<double>::infinity(), ring_hi = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int t = 0; t < kAngles; ++t) {
        const double th = 2.0 * M_PI * t / kAngles;
        const Vec2 u = a[i] + delta * Vec2{std::cos(th), std::sin(th)};
        const double q = 2.0 * spec.eval(u) / (delta * delta);
        ring_lo = std::min(ring_lo, q);
        ring_hi = std::max(ring_hi, q);
      }
    }
    if (ring_lo < lo_band || ring_hi > hi_band) break;
    c_w = std::min(c_w, ring_lo);
    C_w = std::max(C_w, ring_hi);
    delta_w = delta;
  }
  if (delta_w == 0.0) {
    throw Error(ErrorKind::HypothesisViolation,
                "no sampled radius satisfies the quadratic well bounds");
  }
  k.c_w = c_w;
  k.C_w = C_w;
  k.delta_w = delta_w;

  // Coercivity: smallest sampled radius beyond which W_u(u).u > 0 in every
  // sampled direction, then a 1.1 safety factor.
  double extent = 0.0;
  for (int i = 0; i < 3; ++i) extent = std::max(extent, norm(a[i]));
  const double r_max = 4.0 * std::max(extent, 1.0);
  constexpr int kCoerceRadii = 400;
  double last_bad = 0.0;
  for (int r = 1; r <= kCoerceRadii; ++r) {
    const double rad = r_max * r / kCoerceRadii;
    for (int t = 0; t < kAngles; ++t) {
      const double th = 2.0 * M_PI * t / kAngles;
      const Vec2 u = rad * Vec2{std::cos(th), std::sin(th)};
      if (!(dot(spec.grad(u), u) > 0.0)) {
        last_bad = rad;
        break;
      }
    }
  }
  if (last_bad >= r_max) {
    throw Error(ErrorKind::HypothesisViolation, "W is not coercive on the sampled range");
  }
  k.M = 1.1 * (last_bad > 0.0 ? last_bad : r_max / kCoerceRadii);

  // Re-check coercivity on (M, 2M] with an independent sample set.
  for (int r = 1; r <= kRadii; ++r) {
    const double rad = k.M * (1.0 + static_cast<double>(r) / kRadii);
    for (int t = 0; t < kAngles; ++t) {
      const double th = 2.0 * M_PI * (t + 0.5) / kAngles;
      const Vec2 u = rad * Vec2{std::cos(th), std::sin(th)};
      if (!(dot(spec.grad(u), u) > 0.0)) {
        throw Error(ErrorKind::HypothesisViolation, "coercivity fails at " + describe(u));
      }
    }
  }

  // Away from the wells: W >= c_w/2 min(dist, delta_w)^2 on a grid in B(0, 2M).
  const int n = 161;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 u{-2.0 * k.M + 4.0 * k.M * ix / (n - 1), -2.0 * k.M + 4.0 * k.M * iy / (n - 1)};
      if (norm(u) > 2.0 * k.M) continue;
      const double d = std::min({dist(u, a[0]), dist(u, a[1]), dist(u, a[2])});
      if (d < k.delta_w) continue;
      if (spec.eval(u) < 0.5 * k.c_w * k.delta_w * k.delta_w) {
        throw Error(ErrorKind::HypothesisViolation,
                    "W below the well-distance bound at " + describe(u));
      }
    }
  }
  return k;
}

double gamma_cap(const PotentialSpec &spec, const PotentialConstants &k, double sigma) {
  return std::min(0.5 * spec.wells().min_separation(), std::sqrt(sigma / (20.0 * k.C_w)));
}

}  // namespace triode
