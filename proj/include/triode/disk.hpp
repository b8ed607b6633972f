#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "triode/connection.hpp"
#include "triode/potential.hpp"
#include "triode/vec2.hpp"

namespace triode {

/// Uniform N x N node grid on [-1, 1]^2 with spacing h = 2/(N-1). Nodes with
/// |z| < 1 are free ("interior"); the rest are clamped to the boundary data.
/// Cell (i, j) has corners (i, j), (i+1, j), (i, j+1), (i+1, j+1) and takes
/// part in the energy when its center lies in B_1.
class DiskGrid {
 public:
  explicit DiskGrid(int n);

  int n() const { return n_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }
  double coord(int i) const { return -1.0 + i * h_; }
  Vec2 point(int i, int j) const { return {coord(i), coord(j)}; }
  Vec2 point(std::size_t id) const { return point(static_cast<int>(id % n_), static_cast<int>(id / n_)); }

  bool interior(std::size_t id) const { return interior_[id] != 0; }
  bool interior(int i, int j) const { return interior_[index(i, j)] != 0; }
  bool cell_active(int i, int j) const { return active_[static_cast<std::size_t>(j) * (n_ - 1) + i] != 0; }
  Vec2 cell_center(int i, int j) const { return {coord(i) + 0.5 * h_, coord(j) + 0.5 * h_}; }

  const std::vector<std::size_t> &free_nodes() const { return free_; }

  /// Smallest odd N with h <= eps / points_per_eps.
  static int resolution_for(double eps, double points_per_eps);

 private:
  int n_;
  double h_;
  std::vector<std::uint8_t> interior_;
  std::vector<std::uint8_t> active_;
  std::vector<std::size_t> free_;
};

/// Smoothstep 3x^2 - 2x^3: g0(0) = 0, g0(1) = 1, increasing, |g0'| <= 3/2.
double smoothstep(double x);

/// Three-phase boundary data on the unit circle: a1 on the upper-left arc, a3
/// at the bottom, a2 on the right, joined by smoothstep ramps of angular
/// half-width c0*eps centred at pi/2, 7pi/6, 11pi/6. Requires 2 c0 eps < pi/3.
Vec2 boundary_g_eps(double theta, double eps, double c0, const WellSet &wells);

/// Vector field u on a DiskGrid together with the problem parameters.
struct Field {
  std::shared_ptr<const DiskGrid> grid;
  std::vector<Vec2> values;
  double epsilon = 0.1;
  double c0 = 1.0;
  WellSet wells = WellSet::cube_roots();
  bool clamp = true;  // false only in validation mode

  Field() = default;
  Field(std::shared_ptr<const DiskGrid> g, double eps, double c0_, const WellSet &w, bool clamp_ = true);

  /// Writes g_eps(theta(z)) into every clamped node (no-op without clamping).
  void apply_boundary();
  /// Bilinear interpolation at an arbitrary point of [-1, 1]^2.
  Vec2 sample(const Vec2 &z) const;
  /// Same array with all values replaced by `u` (clamped nodes then reset).
  static Field constant(std::shared_ptr<const DiskGrid> g, double eps, double c0, const WellSet &w,
                        const Vec2 &u, bool clamp);
};

/// Discrete J_eps: sum over active cells of
///   eps/4 (sum of the four squared edge differences) + h^2/eps W(cell average).
double energy(const Field &field, const PotentialSpec &spec);

/// Same quadrature restricted to active cells whose centre satisfies `keep`.
double energy_in_region(const Field &field, const PotentialSpec &spec,
                        const std::function<bool(const Vec2 &)> &keep);

/// Potential part only, sum of h^2/eps W over the selected active cells.
double potential_in_region(const Field &field, const PotentialSpec &spec,
                           const std::function<bool(const Vec2 &)> &keep);

/// Exact gradient of `energy` with respect to the free (interior) node values.
/// Clamped nodes get exactly zero.
std::vector<Vec2> energy_gradient(const Field &field, const PotentialSpec &spec);

/// u_test: explicit competitor glued from the three 1D connections (ordered
/// (1,2), (2,3), (3,1)), with angular interpolation on the wedges, a discrete
/// harmonic fill of B_{c0 eps} and a radial blend to g_eps on the outer ring.
Field build_test_function(std::shared_ptr<const DiskGrid> grid, double eps, double c0,
                          const std::array<ConnectionProfile, 3> &connections,
                          const WellSet &wells);

struct ResidualReport {
  std::vector<double> per_node;  // zero outside the evaluation region
  double max = 0.0;
};

/// |eps Lap_h u - W_u(u)/eps| at interior nodes with |z| < 1 - 2h.
ResidualReport el_residual(const Field &field, const PotentialSpec &spec);

/// Sup-norm of u and eps * max |grad u| (forward differences) over B_1.
struct SupNorms {
  double u = 0.0;
  double eps_grad = 0.0;
};
SupNorms sup_norms(const Field &field);

/// Sets the thread count used by the grid kernels (1 = serial). Results do not
/// depend on it.
void set_kernel_threads(int n);

}  // namespace triode
