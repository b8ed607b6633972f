#pragma once

#include <cmath>

namespace triode {

/// A point or vector in the plane. Used both for spatial coordinates z = (x, y)
/// and for order-parameter values u in R^2.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2 &a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2 &a, const Vec2 &b) = default;
};

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
constexpr double norm2(const Vec2 &a) { return dot(a, a); }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }
inline double dist(const Vec2 &a, const Vec2 &b) { return norm(a - b); }
inline bool is_finite(const Vec2 &a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Rotation of a vector by angle (radians) counter-clockwise.
inline Vec2 rotate(const Vec2 &a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Polar angle in [0, 2*pi).
inline double polar_angle(const Vec2 &a) {
  double t = std::atan2(a.y, a.x);
  if (t < 0.0) t += 2.0 * M_PI;
  if (t >= 2.0 * M_PI) t -= 2.0 * M_PI;
  return t;
}

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 operator*(const Vec2 &v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

  /// Eigenvalues in ascending order.
  void eigenvalues(double &lo, double &hi) const {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    lo = m - r;
    hi = m + r;
  }
};

}  // namespace triode
