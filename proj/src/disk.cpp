#include "triode/disk.hpp"

#include <algorithm>
#include <cmath>

#include "triode/error.hpp"

#ifdef TRIODE_HAVE_OPENMP
#include <omp.h>
#endif

namespace triode {

void set_kernel_threads(int n) {
#ifdef TRIODE_HAVE_OPENMP
  omp_set_num_threads(std::max(1, n));
#else
  (void)n;
#endif
}

DiskGrid::DiskGrid(int n) : n_(n) {
  if (n < 5) throw Error(ErrorKind::InvalidInput, "grid needs at least 5 nodes per side");
  h_ = 2.0 / (n - 1);
  interior_.assign(size(), 0);
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      const std::size_t id = index(i, j);
      if (norm(point(i, j)) < 1.0) {
        interior_[id] = 1;
        free_.push_back(id);
      }
    }
  }
  active_.assign(static_cast<std::size_t>(n_ - 1) * (n_ - 1), 0);
  for (int j = 0; j + 1 < n_; ++j) {
    for (int i = 0; i + 1 < n_; ++i) {
      if (norm(cell_center(i, j)) < 1.0) active_[static_cast<std::size_t>(j) * (n_ - 1) + i] = 1;
    }
  }
}

int DiskGrid::resolution_for(double eps, double points_per_eps) {
  if (!(eps > 0.0) || !(points_per_eps >= 4.0)) {
    throw Error(ErrorKind::InvalidConfig, "resolution rule needs eps > 0 and h <= eps/4");
  }
  int n = static_cast<int>(std::ceil(2.0 * points_per_eps / eps - 1e-9)) + 1;
  if (n % 2 == 0) ++n;
  return n;
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

Vec2 boundary_g_eps(double theta, double eps, double c0, const WellSet &a) {
  if (!(2.0 * c0 * eps < M_PI / 3.0) || !(eps > 0.0) || !(c0 > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "boundary ramps overlap: need 0 < 2 c0 eps < pi/3");
  }
  const double two_pi = 2.0 * M_PI;
  theta = std::fmod(theta, two_pi);
  if (theta < 0.0) theta += two_pi;
  const double w = c0 * eps;
  const double t1 = M_PI / 2.0, t2 = 7.0 * M_PI / 6.0, t3 = 11.0 * M_PI / 6.0;
  auto ramp = [&](double center, const Vec2 &from, const Vec2 &to) {
    return from + smoothstep((theta - center + w) / (2.0 * w)) * (to - from);
  };
  if (theta >= t1 - w && theta < t1 + w) return ramp(t1, a[1], a[0]);
  if (theta >= t1 + w && theta < t2 - w) return a[0];
  if (theta >= t2 - w && theta < t2 + w) return ramp(t2, a[0], a[2]);
  if (theta >= t2 + w && theta < t3 - w) return a[2];
  if (theta >= t3 - w && theta < t3 + w) return ramp(t3, a[2], a[1]);
  return a[1];
}

Field::Field(std::shared_ptr<const DiskGrid> g, double eps, double c0_, const WellSet &w, bool clamp_)
    : grid(std::move(g)), values(grid->size()), epsilon(eps), c0(c0_), wells(w), clamp(clamp_) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidInput, "epsilon must lie in (0, 1)");
  apply_boundary();
}

void Field::apply_boundary() {
  if (!clamp) return;
  const DiskGrid &g = *grid;
  for (std::size_t id = 0; id < g.size(); ++id) {
    if (!g.interior(id)) values[id] = boundary_g_eps(polar_angle(g.point(id)), epsilon, c0, wells);
  }
}

Vec2 Field::sample(const Vec2 &z) const {
  const DiskGrid &g = *grid;
  const double sx = std::clamp((z.x + 1.0) / g.h(), 0.0, g.n() - 1.0);
  const double sy = std::clamp((z.y + 1.0) / g.h(), 0.0, g.n() - 1.0);
  const int i = std::min(static_cast<int>(sx), g.n() - 2);
  const int j = std::min(static_cast<int>(sy), g.n() - 2);
  const double fx = sx - i, fy = sy - j;
  return (1 - fx) * (1 - fy) * values[g.index(i, j)] + fx * (1 - fy) * values[g.index(i + 1, j)] +
         (1 - fx) * fy * values[g.index(i, j + 1)] + fx * fy * values[g.index(i + 1, j + 1)];
}

Field Field::constant(std::shared_ptr<const DiskGrid> g, double eps, double c0, const WellSet &w,
                      const Vec2 &u, bool clamp) {
  Field f(std::move(g), eps, c0, w, false);
  std::fill(f.values.begin(), f.values.end(), u);
  f.clamp = clamp;
  f.apply_boundary();
  return f;
}

namespace {

struct CellTerms {
  double gradient = 0.0;
  double potential = 0.0;
};

inline CellTerms cell_terms(const Field &f, const PotentialSpec &spec, int i, int j) {
  const DiskGrid &g = *f.grid;
  const Vec2 &u00 = f.values[g.index(i, j)];
  const Vec2 &u10 = f.values[g.index(i + 1, j)];
  const Vec2 &u01 = f.values[g.index(i, j + 1)];
  const Vec2 &u11 = f.values[g.index(i + 1, j + 1)];
  const double e = f.epsilon, h = g.h();
  CellTerms t;
  t.gradient = 0.25 * e * (norm2(u10 - u00) + norm2(u11 - u01) + norm2(u01 - u00) + norm2(u11 - u10));
  t.potential = h * h / e * spec.eval(0.25 * (u00 + u10 + u01 + u11));
  return t;
}

template <class Keep>
double sum_cells(const Field &f, const PotentialSpec &spec, bool with_gradient, Keep keep) {
  const DiskGrid &g = *f.grid;
  const int nc = g.n() - 1;
  std::vector<double> rows(nc, 0.0);
#ifdef TRIODE_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int j = 0; j < nc; ++j) {
    double s = 0.0;
    for (int i = 0; i < nc; ++i) {
      if (!g.cell_active(i, j) || !keep(g.cell_center(i, j))) continue;
      const CellTerms t = cell_terms(f, spec, i, j);
      s += t.potential;
      if (with_gradient) s += t.gradient;
    }
    rows[j] = s;
  }
  double total = 0.0;
  for (double r : rows) total += r;  // ordered reduction
  return total;
}

}  // namespace

double energy(const Field &f, const PotentialSpec &spec) {
  return sum_cells(f, spec, true, [](const Vec2 &) { return true; });
}

double energy_in_region(const Field &f, const PotentialSpec &spec,
                        const std::function<bool(const Vec2 &)> &keep) {
  return sum_cells(f, spec, true, keep);
}

double potential_in_region(const Field &f, const PotentialSpec &spec,
                           const std::function<bool(const Vec2 &)> &keep) {
  return sum_cells(f, spec, false, keep);
}

std::vector<Vec2> energy_gradient(const Field &f, const PotentialSpec &spec) {
  const DiskGrid &g = *f.grid;
  const int n = g.n(), nc = n - 1;
  const double e = f.epsilon, h = g.h();
  const double wscale = 0.25 * h * h / e;

  // Pass 1: W_u at each active cell average.
  std::vector<Vec2> wu(static_cast<std::size_t>(nc) * nc);
#ifdef TRIODE_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int j = 0; j < nc; ++j) {
    for (int i = 0; i < nc; ++i) {
      if (!g.cell_active(i, j)) continue;
      const Vec2 avg = 0.25 * (f.values[g.index(i, j)] + f.values[g.index(i + 1, j)] +
                               f.values[g.index(i, j + 1)] + f.values[g.index(i + 1, j + 1)]);
      wu[static_cast<std::size_t>(j) * nc + i] = wscale * spec.grad(avg);
    }
  }

  // Pass 2: gather per node from its (up to) four cells in a fixed order.
  std::vector<Vec2> grad(g.size());
#ifdef TRIODE_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = g.index(i, j);
      if (!g.interior(id)) continue;
      const Vec2 &u = f.values[id];
      Vec2 acc;
      // (ci, cj) is the cell; (dx, dy) points from the node to its two
      // cell-neighbours along the cell edges.
      const int cells[4][4] = {{i - 1, j - 1, -1, -1}, {i, j - 1, 1, -1}, {i - 1, j, -1, 1}, {i, j, 1, 1}};
      for (const auto &c : cells) {
        const int ci = c[0], cj = c[1];
        if (ci < 0 || cj < 0 || ci >= nc || cj >= nc || !g.cell_active(ci, cj)) continue;
        const Vec2 &ux = f.values[g.index(i + c[2], j)];
        const Vec2 &uy = f.values[g.index(i, j + c[3])];
        acc += (0.5 * e) * (2.0 * u - ux - uy);
        acc += wu[static_cast<std::size_t>(cj) * nc + ci];
      }
      grad[id] = acc;
    }
  }
  return grad;
}

namespace {

// Annulus part of u_test at polar coordinates (r, theta), r > 0.
Vec2 annulus_value(double r, double theta, double eps, const std::array<ConnectionProfile, 3> &c) {
  const ConnectionProfile &u12 = c[0], &u23 = c[1], &u31 = c[2];
  const double third = M_PI / 3.0;
  auto leg12 = [&](double t) { return u12(r * std::sin(M_PI / 2.0 - t) / eps); };
  auto leg31 = [&](double t) { return u31(r * std::sin(7.0 * M_PI / 6.0 - t) / eps); };
  auto leg23 = [&](double t) { return u23(r * std::sin(11.0 * M_PI / 6.0 - t) / eps); };
  if (theta >= third && theta <= 2.0 * third) return leg12(theta);
  if (theta >= M_PI && theta <= 4.0 * third) return leg31(theta);
  if (theta >= 5.0 * third) return leg23(theta);
  if (theta > 2.0 * third && theta < M_PI) {
    const double s = (theta - 2.0 * third) / third;
    return (1.0 - s) * leg12(2.0 * third) + s * leg31(M_PI);
  }
  if (theta > 4.0 * third && theta < 5.0 * third) {
    const double s = (theta - 4.0 * third) / third;
    return (1.0 - s) * leg31(4.0 * third) + s * leg23(5.0 * third);
  }
  // [0, pi/3): between the a2 side of U23 (theta = 2 pi) and U12 at pi/3.
  const double s = theta / third;
  return (1.0 - s) * leg23(2.0 * M_PI) + s * leg12(third);
}

}  // namespace

Field build_test_function(std::shared_ptr<const DiskGrid> grid, double eps, double c0,
                          const std::array<ConnectionProfile, 3> &c, const WellSet &wells) {
  const int want[3][2] = {{0, 1}, {1, 2}, {2, 0}};
  for (int k = 0; k < 3; ++k) {
    if (c[k].values.empty() || c[k].i != want[k][0] || c[k].j != want[k][1]) {
      throw Error(ErrorKind::InvalidInput, "test function needs connections (1,2), (2,3), (3,1)");
    }
  }
  Field f(grid, eps, c0, wells, true);
  const DiskGrid &g = *grid;
  const double r1 = c0 * eps, r2 = 1.0 - c0 * eps;

  std::vector<std::uint8_t> inner(g.size(), 0);
  for (std::size_t id = 0; id < g.size(); ++id) {
    if (!g.interior(id)) continue;
    const Vec2 z = g.point(id);
    const double r = norm(z), th = polar_angle(z);
    if (r < r1) {
      inner[id] = 1;
      f.values[id] = annulus_value(std::max(r, 1e-300), th, eps, c);  // initial guess
    } else if (r < r2) {
      f.values[id] = annulus_value(r, th, eps, c);
    } else {
      const Vec2 core = annulus_value(r2, th, eps, c);
      const Vec2 gb = boundary_g_eps(th, eps, c0, wells);
      f.values[id] = ((1.0 - r) / (c0 * eps)) * core + ((r - r2) / (c0 * eps)) * gb;
    }
  }
  // Neighbours of the inner disc outside it carry the annulus formula; make
  // sure that holds even where they are clamped or in the outer ring.
  std::vector<Vec2> fixed(f.values);
  const int n = g.n();
  for (int j = 1; j + 1 < n; ++j) {
    for (int i = 1; i + 1 < n; ++i) {
      if (!inner[g.index(i, j)]) continue;
      const std::size_t nb[4] = {g.index(i + 1, j), g.index(i - 1, j), g.index(i, j + 1), g.index(i, j - 1)};
      for (std::size_t q : nb) {
        if (!inner[q]) {
          const Vec2 z = g.point(q);
          fixed[q] = annulus_value(norm(z), polar_angle(z), eps, c);
        }
      }
    }
  }

  // Damped Jacobi for the five-point Laplace problem on the inner disc.
  std::vector<std::size_t> unknowns;
  for (std::size_t id = 0; id < g.size(); ++id) if (inner[id]) unknowns.push_back(id);
  std::vector<Vec2> next(unknowns.size());
  for (int it = 0; it < 1000000 && !unknowns.empty(); ++it) {
    double res = 0.0;
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
      const std::size_t id = unknowns[k];
      const std::size_t nb[4] = {id + 1, id - 1, id + static_cast<std::size_t>(n), id - static_cast<std::size_t>(n)};
      Vec2 s;
      for (std::size_t q : nb) s += inner[q] ? f.values[q] : fixed[q];
      const Vec2 r = 0.25 * s - f.values[id];
      res = std::max(res, norm(r));
      next[k] = f.values[id] + 0.9 * r;
    }
    for (std::size_t k = 0; k < unknowns.size(); ++k) f.values[unknowns[k]] = next[k];
    if (res < 1e-10) break;
  }
  f.apply_boundary();
  return f;
}

ResidualReport el_residual(const Field &f, const PotentialSpec &spec) {
  const DiskGrid &g = *f.grid;
  const int n = g.n();
  const double h = g.h(), e = f.epsilon;
  ResidualReport r;
  r.per_node.assign(g.size(), 0.0);
  for (int j = 1; j + 1 < n; ++j) {
    for (int i = 1; i + 1 < n; ++i) {
      const std::size_t id = g.index(i, j);
      if (norm(g.point(i, j)) >= 1.0 - 2.0 * h) continue;
      const Vec2 &u = f.values[id];
      const Vec2 lap = (1.0 / (h * h)) * (f.values[g.index(i + 1, j)] + f.values[g.index(i - 1, j)] +
                                          f.values[g.index(i, j + 1)] + f.values[g.index(i, j - 1)] - 4.0 * u);
      const double v = norm(e * lap - (1.0 / e) * spec.grad(u));
      r.per_node[id] = v;
      r.max = std::max(r.max, v);
    }
  }
  return r;
}

SupNorms sup_norms(const Field &f) {
  const DiskGrid &g = *f.grid;
  const int n = g.n();
  SupNorms s;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t id = g.index(i, j);
      if (!g.interior(id)) continue;
      s.u = std::max(s.u, norm(f.values[id]));
      if (i + 1 < n) s.eps_grad = std::max(s.eps_grad, dist(f.values[g.index(i + 1, j)], f.values[id]) / g.h());
      if (j + 1 < n) s.eps_grad = std::max(s.eps_grad, dist(f.values[g.index(i, j + 1)], f.values[id]) / g.h());
    }
  }
  s.eps_grad *= f.epsilon;
  return s;
}

}  // namespace triode
