#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>

#include "triode/connection.hpp"
#include "triode/diagnostics.hpp"
#include "triode/disk.hpp"
#include "triode/minimizer.hpp"
#include "triode/potential.hpp"

namespace support {

using namespace triode;

inline constexpr double kSqrt3 = 1.7320508075688772;
// Calibration bound sqrt(2)|F(a_j) - F(a_i)| with F' = z^3 - 1; equals the
// heteroclinic action for the cubic potential.
inline const double kBogomolnyi = 3.0 * std::sqrt(6.0) / 4.0;

// |z^3 - 1|^2 evaluated independently of the library.
inline double cubic_w(const Vec2 &u) {
  const std::complex<double> z(u.x, u.y);
  return std::norm(z * z * z - 1.0);
}

inline const PotentialSpec &cubic() {
  static const PotentialSpec spec = PotentialSpec::cubic();
  return spec;
}

inline const std::array<ConnectionProfile, 3> &connections() {
  static const auto profiles = minimize_all(cubic());
  return profiles;
}

inline double sigma() {
  const auto &p = connections();
  return (p[0].action + p[1].action + p[2].action) / 3.0;
}

inline const PotentialConstants &constants() {
  static const PotentialConstants k = estimate_constants(cubic());
  return k;
}

inline std::shared_ptr<const DiskGrid> grid(int n) { return std::make_shared<const DiskGrid>(n); }

// Converged minimizer at eps from the default solver settings, cached.
inline const Solution &minimizer(double eps) {
  static std::map<double, Solution> cache;
  auto it = cache.find(eps);
  if (it == cache.end()) {
    SolveConfig cfg;
    cfg.epsilon = eps;
    it = cache.emplace(eps, minimize(cfg, cubic(), connections())).first;
  }
  return it->second;
}

// Distance from z to the closed sector {arg(z) in [lo, hi]} (width < pi).
inline double sector_distance(const Vec2 &z, double lo, double hi) {
  double th = std::atan2(z.y, z.x);
  auto inside = [&](double t) {
    for (double k : {-2.0, 0.0, 2.0}) {
      if (t + k * M_PI >= lo && t + k * M_PI <= hi) return true;
    }
    return false;
  };
  if (inside(th)) return 0.0;
  double best = norm(z);
  for (double a : {lo, hi}) {
    const Vec2 d{std::cos(a), std::sin(a)};
    const double t = dot(z, d);
    if (t > 0.0) best = std::min(best, std::abs(cross(d, z)));
  }
  return best;
}

// Triod partition: a1 on (pi/2, 7pi/6), a3 on (7pi/6, 11pi/6), a2 elsewhere.
inline Field sharp_triod(int n, double eps, Vec2 shift = {0.0, 0.0}) {
  Field f(grid(n), eps, 0.4, WellSet::cube_roots(), false);
  for (std::size_t id = 0; id < f.grid->size(); ++id) {
    f.values[id] = triod_value(f.grid->point(id), shift, 0.0, f.wells);
  }
  return f;
}

// Triod with exponentially blended phases: weight exp(-d_i/delta) per sector.
inline Field mollified_triod(int n, double eps, double delta, Vec2 shift = {0.0, 0.0}) {
  Field f(grid(n), eps, 0.4, WellSet::cube_roots(), false);
  const double sectors[3][2] = {{M_PI / 2, 7 * M_PI / 6}, {-M_PI / 6, M_PI / 2}, {-5 * M_PI / 6, -M_PI / 6}};
  for (std::size_t id = 0; id < f.grid->size(); ++id) {
    const Vec2 z = f.grid->point(id) - shift;
    double w[3], s = 0.0;
    for (int i = 0; i < 3; ++i) {
      w[i] = std::exp(-sector_distance(z, sectors[i][0], sectors[i][1]) / delta);
      s += w[i];
    }
    Vec2 u{0.0, 0.0};
    for (int i = 0; i < 3; ++i) u = u + (w[i] / s) * f.wells[i];
    f.values[id] = u;
  }
  return f;
}

}  // namespace support
