#include "triode/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "triode/error.hpp"
#include "triode/io.hpp"

namespace triode {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

bool in_row_range(double y) { return y >= -0.5 - 1e-12 && y <= 1.0 + 1e-12; }

}  // namespace

LambdaRows lambda_rows(const Field &field, double threshold) {
  const DiskGrid &g = *field.grid;
  const double h = g.h();
  LambdaRows rows;
  rows.threshold = threshold;
  for (int j = 0; j < g.n(); ++j) {
    const double y = g.coord(j);
    if (!in_row_range(y)) continue;
    int chord = 0, c[3] = {0, 0, 0};
    for (int i = 0; i < g.n(); ++i) {
      const std::size_t id = g.index(i, j);
      if (!g.interior(id)) continue;
      ++chord;
      for (int w = 0; w < 3; ++w) {
        if (dist(field.values[id], field.wells[w]) < threshold) ++c[w];
      }
    }
    rows.y.push_back(y);
    rows.chord.push_back(chord * h);
    rows.lambda1.push_back(c[0] * h);
    rows.lambda2.push_back(c[1] * h);
    rows.lambda3.push_back(c[2] * h);
  }
  return rows;
}

double y_star(const Field &field, const LambdaRows &rows, double alpha) {
  const double slack = alpha * std::sqrt(field.epsilon);
  for (std::size_t k = 0; k < rows.y.size(); ++k) {
    if (rows.lambda1[k] + rows.lambda2[k] >= rows.chord[k] - slack) return rows.y[k];
  }
  throw Error(ErrorKind::DegenerateField, "no row carries the two upper phases");
}

double certificate_alpha(const PotentialConstants &k, double sigma) { return 16.0 * sigma / k.c_w; }

double junction_height_profile(double x) { return 1.0 - x + std::sqrt(3.0 + 4.0 * (x + 0.5) * (x + 0.5)); }

LowerBoundCertificate lower_bound_certificate(const Field &field, const PotentialSpec &spec,
                                              const PotentialConstants &constants, double sigma) {
  const DiskGrid &g = *field.grid;
  const double eps = field.epsilon, h = g.h(), ce = field.c0 * eps;
  LowerBoundCertificate c;
  c.threshold = std::pow(eps, 0.25);
  c.alpha = certificate_alpha(constants, sigma);
  c.rows = lambda_rows(field, c.threshold);
  c.y_star = y_star(field, c.rows, c.alpha);

  int kcount = 0;
  const double xmax = kSqrt3 / 2.0 - ce;
  for (int i = 0; i < g.n(); ++i) {
    const double x = g.coord(i);
    if (x < -xmax - 1e-12 || x > xmax + 1e-12) continue;
    const double zeta = std::min(c.y_star, std::sqrt(std::max(0.0, 1.0 - x * x)));
    const Vec2 u = field.sample({x, zeta});
    if (dist(u, field.wells[0]) < c.threshold || dist(u, field.wells[1]) < c.threshold) ++kcount;
  }
  c.k_measure = kcount * h;

  int mcount = 0;
  for (std::size_t k = 0; k < c.rows.y.size(); ++k) {
    const double y = c.rows.y[k];
    if (y >= -0.5 + ce - 1e-12 && y <= c.y_star + 1e-12 && c.rows.lambda3[k] > 0.0) ++mcount;
  }
  c.m_measure = mcount * h;
  c.beta = c.y_star + 0.5 - ce - c.m_measure;

  c.interface_term = (kSqrt3 / 2.0 * c.k_measure + c.m_measure) * (sigma - constants.C_w * std::sqrt(eps));
  c.beta_term = constants.c_w * c.alpha * c.beta / 8.0;
  c.top_term = sigma * std::max(1.0 - ce - c.y_star, 0.0);
  c.value = c.interface_term + c.beta_term + c.top_term;
  c.energy = energy(field, spec);
  if (c.value > c.energy + c.tolerance * std::abs(c.energy)) {
    throw Error(ErrorKind::CertificateViolation,
                "lower bound " + io::format_double(c.value) + " exceeds energy " + io::format_double(c.energy));
  }
  return c;
}

void check_gamma(double gamma, double gamma0, const PotentialSpec &spec, double cap) {
  const double lim = std::min({gamma0, 0.5 * spec.wells().min_separation(), cap});
  if (!(gamma > 0.0) || !(gamma < lim)) {
    throw Error(ErrorKind::InvalidConfig,
                "gamma " + io::format_double(gamma) + " outside (0, " + io::format_double(lim) + ")");
  }
}

InterfaceGeometry extract_level_curves(const Field &field, double gamma) {
  if (!(gamma > 0.0) || !(gamma < 0.5 * field.wells.min_separation())) {
    throw Error(ErrorKind::InvalidConfig, "gamma must lie in (0, min|a_i - a_j|/2)");
  }
  InterfaceGeometry geo;
  geo.gamma = gamma;
  for (int w = 0; w < 3; ++w) geo.curves[w] = contour(field, w, gamma);
  const DiskGrid &g = *field.grid;
  geo.interface_mask.assign(g.size(), 0);
  for (std::size_t id : g.free_nodes()) {
    bool far = true;
    for (int w = 0; w < 3; ++w) far = far && dist(field.values[id], field.wells[w]) >= gamma;
    if (far) {
      geo.interface_mask[id] = 1;
      ++geo.interface_nodes;
    }
  }
  return geo;
}

double distance_to_triod(const Vec2 &z, const Vec2 &center) {
  static const double dirs[3] = {M_PI / 2.0, 7.0 * M_PI / 6.0, 11.0 * M_PI / 6.0};
  double best = std::numeric_limits<double>::infinity();
  const Vec2 r = z - center;
  for (double a : dirs) {
    const Vec2 d{std::cos(a), std::sin(a)};
    const double t = dot(r, d);
    best = std::min(best, t <= 0.0 ? norm(r) : std::abs(cross(d, r)));
  }
  return best;
}

Localization localization_distance(const InterfaceGeometry &geo, const Field &field) {
  const DiskGrid &g = *field.grid;
  std::vector<Vec2> pts;
  for (std::size_t id = 0; id < g.size(); ++id) {
    if (geo.interface_mask[id]) pts.push_back(g.point(id));
  }
  if (pts.empty()) throw Error(ErrorKind::DegenerateField, "empty diffuse interface");
  auto worst = [&](const Vec2 &c) {
    double m = 0.0;
    for (const Vec2 &p : pts) m = std::max(m, distance_to_triod(p, c));
    return m;
  };
  Vec2 best{0.0, 0.0};
  double fbest = worst(best);
  for (int a = -25; a <= 25; ++a) {
    for (int b = -25; b <= 25; ++b) {
      const Vec2 c{0.02 * a, 0.02 * b};
      const double f = worst(c);
      if (f < fbest) {
        fbest = f;
        best = c;
      }
    }
  }
  for (double step = 0.01; step > g.h() / 8.0; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (const Vec2 d : {Vec2{step, 0}, Vec2{-step, 0}, Vec2{0, step}, Vec2{0, -step}}) {
        const double f = worst(best + d);
        if (f < fbest) {
          fbest = f;
          best = best + d;
          moved = true;
        }
      }
    }
  }
  return {best, norm(best), fbest};
}

WidthReport interface_width(const InterfaceGeometry &geo, const Field &field, int samples) {
  for (int w = 0; w < 3; ++w) {
    if (geo.curves[w].empty()) {
      throw Error(ErrorKind::DegenerateField, "level curve family " + std::to_string(w + 1) + " is empty");
    }
  }
  if (samples <= 0) throw Error(ErrorKind::InvalidInput, "sample count must be positive");
  struct Piece {
    int family;
    ArclengthCurve curve;
  };
  std::vector<Piece> pieces;
  double total = 0.0;
  for (int w = 0; w < 3; ++w) {
    for (const Polyline &pl : geo.curves[w]) {
      std::vector<Vec2> p = pl.points;
      if (pl.closed) p.push_back(p.front());
      pieces.push_back({w, ArclengthCurve(std::move(p))});
      total += pieces.back().curve.length();
    }
  }
  std::array<std::vector<Polyline>, 3> others;
  for (int w = 0; w < 3; ++w) {
    for (int v = 0; v < 3; ++v) {
      if (v != w) others[w].insert(others[w].end(), geo.curves[v].begin(), geo.curves[v].end());
    }
  }
  // Each sample starts as the r1-maximizer among the stratum midpoint and the
  // curve vertices of its equal-arclength stratum.
  // The winning vertex is then polished by golden-section search along its
  // two adjacent segments.
  WidthReport rep;
  rep.samples.resize(samples);
  std::vector<std::uint8_t> seen(samples, 0);
  std::vector<std::pair<std::size_t, std::size_t>> vertex(samples, {pieces.size(), 0});
  std::size_t cur_piece = pieces.size(), cur_knot = 0;
  auto offer = [&](int s, int family, const Vec2 &z) {
    const double r1 = distance_to(others[family], z);
    if (!seen[s] || r1 > rep.samples[s].r1) {
      rep.samples[s] = {family, z, r1};
      vertex[s] = {cur_piece, cur_knot};
      seen[s] = 1;
    }
  };
  const double stride = total / samples;
  auto stratum = [&](double t) { return std::clamp(static_cast<int>(t / stride), 0, samples - 1); };
  double base = 0.0;
  std::size_t piece = 0;
  for (int s = 0; s < samples; ++s) {
    const double t = (s + 0.5) * stride;
    while (piece + 1 < pieces.size() && t > base + pieces[piece].curve.length()) {
      base += pieces[piece].curve.length();
      ++piece;
    }
    offer(s, pieces[piece].family, pieces[piece].curve.at(t - base));
  }
  base = 0.0;
  for (const Piece &pc : pieces) {
    const auto &pts = pc.curve.points();
    const auto &knots = pc.curve.knots();
    cur_piece = static_cast<std::size_t>(&pc - pieces.data());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      cur_knot = k;
      offer(stratum(base + knots[k]), pc.family, pts[k]);
    }
    base += pc.curve.length();
  }
  constexpr double kGolden = 0.6180339887498949;
  for (int s = 0; s < samples; ++s) {
    const auto [pi, k] = vertex[s];
    if (pi >= pieces.size()) continue;
    const auto &pts = pieces[pi].curve.points();
    WidthSample &ws = rep.samples[s];
    for (std::size_t other : {k - 1, k + 1}) {
      if (other >= pts.size()) continue;  // wraps for k == 0
      auto at = [&](double f) { return pts[k] + f * (pts[other] - pts[k]); };
      auto r1 = [&](double f) { return distance_to(others[ws.family], at(f)); };
      double a = 0.0, b = 1.0;
      double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
      double f1 = r1(x1), f2 = r1(x2);
      while (b - a > 1e-12) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + kGolden * (b - a);
          f2 = r1(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - kGolden * (b - a);
          f1 = r1(x1);
        }
      }
      const double f = 0.5 * (a + b), val = r1(f);
      if (val > ws.r1) {
        ws.point = at(f);
        ws.r1 = val;
      }
    }
  }
  for (const WidthSample &ws : rep.samples) rep.max_r1 = std::max(rep.max_r1, ws.r1);
  rep.c0_measured = rep.max_r1 / field.epsilon;
  return rep;
}

Field competitor_field(const Field &field, const Vec2 &z1, double r1, const Vec2 &target) {
  Field v = field;
  const double eps = field.epsilon;
  for (std::size_t id : field.grid->free_nodes()) {
    const double r = dist(field.grid->point(id), z1);
    if (r < r1 - eps) {
      v.values[id] = target;
    } else if (r < r1) {
      v.values[id] = ((r1 - r) / eps) * target + ((r - r1 + eps) / eps) * field.values[id];
    }
  }
  return v;
}

CompetitorBound competitor_energy_bound(const Field &field, const Vec2 &z1, double r1, const PotentialSpec &spec,
                                        int well) {
  if (!(r1 >= 2.0 * field.epsilon) || norm(z1) + r1 > 1.0) {
    throw Error(ErrorKind::InvalidInput, "competitor ball must satisfy r1 >= 2 eps and B(z1, r1) in B_1");
  }
  const auto ball = [&](const Vec2 &c) { return dist(c, z1) < r1; };
  CompetitorBound b;
  b.potential_inside = potential_in_region(field, spec, ball);
  b.energy_inside = energy_in_region(field, spec, ball);
  b.competitor_energy = energy_in_region(competitor_field(field, z1, r1, field.wells[well]), spec, ball);
  return b;
}

BoundaryCurve boundary_curve(const Field &field, double gamma, const WellSet &wells) {
  const DiskGrid &g = *field.grid;
  const int n = g.n();
  std::vector<std::uint8_t> comp(g.size(), 0);
  std::deque<std::size_t> queue;
  auto inside = [&](std::size_t id) { return dist(field.values[id], wells[0]) < gamma; };
  for (std::size_t id = 0; id < g.size(); ++id) {
    if (!g.interior(id) && inside(id)) {
      comp[id] = 1;
      queue.push_back(id);
    }
  }
  while (!queue.empty()) {
    const std::size_t id = queue.front();
    queue.pop_front();
    const int i = static_cast<int>(id % n), j = static_cast<int>(id / n);
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int a = i + di[k], b = j + dj[k];
      if (a < 0 || b < 0 || a >= n || b >= n) continue;
      const std::size_t q = g.index(a, b);
      if (!comp[q] && inside(q)) {
        comp[q] = 1;
        queue.push_back(q);
      }
    }
  }
  BoundaryCurve bc;
  bc.pieces = contour(field, 0, gamma, &comp);
  const auto on_circle = [](const Vec2 &p) { return std::abs(norm(p) - 1.0) < 1e-9; };
  const Polyline *best = nullptr;
  int arcs = 0;
  for (const Polyline &pl : bc.pieces) {
    if (pl.closed || !on_circle(pl.points.front()) || !on_circle(pl.points.back())) continue;
    ++arcs;
    if (best == nullptr || pl.length() > best->length()) best = &pl;
  }
  if (best == nullptr) {
    throw Error(ErrorKind::StructureViolation, "no boundary-to-boundary arc around the a1 component");
  }
  bc.single_arc = arcs == 1 && bc.pieces.size() == 1;
  bc.curve = best->points;
  const Vec2 top{0.0, 1.0};
  if (dist(bc.curve.back(), top) < dist(bc.curve.front(), top)) std::reverse(bc.curve.begin(), bc.curve.end());
  bc.a = bc.curve.front();
  bc.b = bc.curve.back();
  return bc;
}

TriplePoint triple_point(const InterfaceGeometry &geo, const BoundaryCurve &bc, const Field &field, double tol) {
  const ArclengthCurve eta(bc.curve);
  const auto &g2 = geo.curves[1];
  const auto &g3 = geo.curves[2];
  if (g2.empty() || g3.empty()) throw Error(ErrorKind::DegenerateField, "missing level curve family");
  auto alpha = [&](double t) {
    const Vec2 z = eta.at(t);
    return distance_to(g2, z) - distance_to(g3, z);
  };
  const auto &s = eta.knots();
  std::vector<double> vals(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) vals[k] = alpha(s[k]);

  TriplePoint tp;
  std::optional<std::size_t> first, first_inner;
  for (std::size_t k = 0; k < s.size(); ++k) {
    tp.negative_side = tp.negative_side || vals[k] <= 0.0;
    tp.positive_side = tp.positive_side || vals[k] >= 0.0;
    if (k + 1 < s.size() && (vals[k] < 0.0) != (vals[k + 1] < 0.0)) {
      ++tp.sign_changes;
      if (!first) first = k;
      if (!first_inner && norm(eta.at(0.5 * (s[k] + s[k + 1]))) <= 0.5) first_inner = k;
    }
  }
  if (!first) throw Error(ErrorKind::StructureViolation, "alpha has no sign change along the a1 curve");
  const std::size_t k = first_inner ? *first_inner : *first;
  double lo = s[k], hi = s[k + 1];
  const bool lo_neg = vals[k] < 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if ((alpha(mid) < 0.0) == lo_neg) lo = mid; else hi = mid;
  }
  tp.t = 0.5 * (lo + hi);
  tp.p = eta.at(tp.t);
  tp.q = nearest_on(g2, tp.p)->point;
  tp.r = nearest_on(g3, tp.p)->point;
  tp.dist_pq = dist(tp.p, tp.q);
  tp.dist_pr = dist(tp.p, tp.r);
  tp.residual_p = std::abs(dist(field.sample(tp.p), field.wells[0]) - geo.gamma);
  return tp;
}

std::optional<double> closer_to_second_row(const InterfaceGeometry &geo, const BoundaryCurve &bc,
                                           const DiskGrid &grid, double band) {
  for (int j = 0; j < grid.n(); ++j) {
    const double y0 = grid.coord(j);
    if (y0 < 0.25 - 1e-12 || y0 > 0.375 + 1e-12) continue;
    bool ok = true, any = false;
    for (const Vec2 &z : bc.curve) {
      if (std::abs(z.y - y0) > band) continue;
      any = true;
      if (distance_to(geo.curves[1], z) > distance_to(geo.curves[2], z)) {
        ok = false;
        break;
      }
    }
    if (ok && any) return y0;
  }
  return std::nullopt;
}

std::vector<Vec2> discretize_curve(const ArclengthCurve &curve, double spacing, double tol) {
  const auto &p = curve.points();
  if (p.empty()) return {};
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidInput, "spacing must be positive");
  std::vector<Vec2> z{p.front()};
  const Vec2 b = p.back();
  std::size_t from = 0;  // segment index where the current point lies
  while (dist(z.back(), b) > spacing + tol) {
    const Vec2 c = z.back();
    // Last segment (from the end) that comes within `spacing` of c.
    std::size_t seg = p.size();
    for (std::size_t k = p.size() - 1; k-- > from;) {
      const Vec2 d = p[k + 1] - p[k];
      const double len2 = norm2(d);
      const double s = len2 > 0.0 ? std::clamp(dot(c - p[k], d) / len2, 0.0, 1.0) : 0.0;
      if (dist(p[k] + s * d, c) <= spacing + tol) {
        seg = k;
        break;
      }
    }
    if (seg == p.size()) break;
    // Largest tau with |p + tau d - c| = spacing.
    const Vec2 d = p[seg + 1] - p[seg], w = p[seg] - c;
    const double qa = norm2(d), qb = 2.0 * dot(w, d), qc = norm2(w) - spacing * spacing;
    const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
    const double tau = qa > 0.0 ? std::clamp((-qb + std::sqrt(disc)) / (2.0 * qa), 0.0, 1.0) : 0.0;
    z.push_back(p[seg] + tau * d);
    from = seg;
  }
  return z;
}

JunctionFamilies discretize_interface(const InterfaceGeometry &geo, const BoundaryCurve &bc, double c0_measured,
                                      double eps, int k, double tol) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "level k must be positive");
  JunctionFamilies jf;
  jf.k = k;
  jf.spacing = 8.0 * c0_measured * eps;
  const ArclengthCurve eta(bc.curve);
  jf.points = discretize_curve(eta, jf.spacing, tol);
  const int npts = static_cast<int>(jf.points.size());
  for (const Vec2 &z : jf.points) {
    const int lab = distance_to(geo.curves[1], z) <= distance_to(geo.curves[2], z) ? 2 : 3;
    jf.labels.push_back(lab);
    (lab == 2 ? jf.count2 : jf.count3)++;
  }
  jf.min_chord = std::numeric_limits<double>::infinity();
  for (int a = 0; a < npts; ++a) {
    for (int b = a + 2; b < npts; ++b) jf.min_chord = std::min(jf.min_chord, dist(jf.points[a], jf.points[b]));
  }
  const int width = 1 << (k + 1);
  if (npts < width) {
    throw Error(ErrorKind::ScaleLimit, "curve holds " + std::to_string(npts) + " points at spacing 8 C0 eps, " +
                                           std::to_string(width) + " needed; use a smaller epsilon");
  }
  auto count2 = [&](int from, int len) {
    int c = 0;
    for (int i = from; i < from + len; ++i) c += jf.labels[i] == 2;
    return c;
  };
  int l = -1;
  for (int s = 0; s + width <= npts; ++s) {
    if (count2(s, width) == width / 2) {
      l = s;
      break;
    }
  }
  if (l < 0) throw Error(ErrorKind::StructureViolation, "no balanced window of the two label classes");
  jf.window_start = l;
  // Halve the window keeping the classes balanced.
  int lj = l;
  for (int level = 1; level <= k; ++level) {
    const int len = width >> level;
    int found = -1;
    for (int s = lj; s <= lj + len && s + len <= npts; ++s) {
      if (count2(s, len) == len / 2) {
        found = s;
        break;
      }
    }
    if (found < 0) throw Error(ErrorKind::StructureViolation, "balanced refinement failed");
    lj = found;
  }
  jf.p = jf.points[lj];
  for (int i = l; i < l + width; ++i) {
    if (jf.labels[i] == 2) {
      jf.q.push_back(nearest_on(geo.curves[1], jf.points[i])->point);
    } else {
      jf.r.push_back(nearest_on(geo.curves[2], jf.points[i])->point);
    }
  }
  const auto by_distance = [&](const Vec2 &a, const Vec2 &b) { return dist(a, jf.p) < dist(b, jf.p); };
  std::sort(jf.q.begin(), jf.q.end(), by_distance);
  std::sort(jf.r.begin(), jf.r.end(), by_distance);
  const double unit = c0_measured * eps;
  jf.distance_bounds_ok = true;
  for (std::size_t j = 0; j < jf.q.size(); ++j) {
    jf.distance_bounds_ok = jf.distance_bounds_ok && dist(jf.q[j], jf.p) <= (32.0 * (j + 1) + 1.0) * unit + tol;
  }
  for (std::size_t j = 0; j < jf.r.size(); ++j) {
    jf.distance_bounds_ok = jf.distance_bounds_ok && dist(jf.r[j], jf.p) <= (32.0 * (j + 1) + 1.0) * unit + tol;
  }
  std::vector<Vec2> all = jf.q;
  all.insert(all.end(), jf.r.begin(), jf.r.end());
  jf.min_pair_distance = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a + 1; b < all.size(); ++b) jf.min_pair_distance = std::min(jf.min_pair_distance, dist(all[a], all[b]));
  }
  jf.separation_ok = jf.min_pair_distance >= 6.0 * unit - tol;
  return jf;
}

Vec2 triod_value(const Vec2 &z, const Vec2 &center, double orientation, const WellSet &wells) {
  double th = std::atan2(z.y - center.y, z.x - center.x) - orientation;
  th = std::fmod(th, 2.0 * M_PI);
  if (th < 0.0) th += 2.0 * M_PI;
  if (th >= M_PI / 2.0 && th < 7.0 * M_PI / 6.0) return wells[0];
  if (th >= 7.0 * M_PI / 6.0 && th < 11.0 * M_PI / 6.0) return wells[2];
  return wells[1];
}

double l1_distance(const Field &field, const Vec2 &center, double orientation) {
  const DiskGrid &g = *field.grid;
  double s = 0.0;
  for (std::size_t id : g.free_nodes()) {
    s += dist(field.values[id], triod_value(g.point(id), center, orientation, field.wells));
  }
  return s * g.h() * g.h();
}

L1Fit l1_blowdown_distance(const Field &field, const Vec2 &center, double orientation) {
  L1Fit fit;
  fit.at_origin = l1_distance(field, center, orientation);
  double x[3] = {center.x, center.y, orientation};
  double best = fit.at_origin;
  for (double step = 0.05; step >= 1e-3; step *= 0.5) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (int c = 0; c < 3; ++c) {
        for (double sgn : {1.0, -1.0}) {
          double y[3] = {x[0], x[1], x[2]};
          y[c] += sgn * step;
          const double f = l1_distance(field, {y[0], y[1]}, y[2]);
          if (f < best) {
            best = f;
            x[0] = y[0];
            x[1] = y[1];
            x[2] = y[2];
            moved = true;
          }
        }
      }
    }
  }
  fit.best = best;
  fit.center = {x[0], x[1]};
  fit.orientation = x[2];
  return fit;
}

DiagnosticsReport diagnose(const Field &field, const PotentialSpec &spec, const PotentialConstants &constants,
                           double sigma, const DiagnosticsOptions &opt) {
  DiagnosticsReport rep;
  rep.epsilon = field.epsilon;
  rep.sigma = sigma;
  rep.energy = energy(field, spec);
  auto stage = [&](const char *name, auto &&fn) {
    try {
      fn();
    } catch (const Error &e) {
      rep.errors.push_back(std::string(name) + ": " + e.what());
    }
  };
  const DiskGrid &g = *field.grid;
  for (std::size_t id : g.free_nodes()) {
    int near = 0;
    for (int w = 0; w < 3; ++w) near += dist(field.values[id], field.wells[w]) < opt.gamma;
    if (near > 1) rep.sublevel_disjoint = false;
  }
  stage("certificate", [&] { rep.certificate = lower_bound_certificate(field, spec, constants, sigma); });
  stage("level-curves", [&] {
    check_gamma(opt.gamma, opt.gamma0, spec, gamma_cap(spec, constants, sigma));
    rep.geometry = extract_level_curves(field, opt.gamma);
  });
  if (rep.geometry) {
    stage("localization", [&] { rep.localization = localization_distance(*rep.geometry, field); });
    stage("width", [&] { rep.width = interface_width(*rep.geometry, field, opt.width_samples); });
    stage("boundary-curve", [&] { rep.boundary = boundary_curve(field, opt.gamma, field.wells); });
    if (rep.boundary) {
      stage("triple-point", [&] { rep.triple = triple_point(*rep.geometry, *rep.boundary, field, 1e-12); });
      if (rep.width) {
        const double band = rep.width->c0_measured * field.epsilon;
        rep.row_y0 = closer_to_second_row(*rep.geometry, *rep.boundary, g, band);
        stage("discretization", [&] {
          rep.families = discretize_interface(*rep.geometry, *rep.boundary, rep.width->c0_measured, field.epsilon,
                                              opt.k, g.h() / 4.0);
        });
      }
    }
  }
  stage("l1", [&] { rep.l1 = l1_blowdown_distance(field); });
  return rep;
}

namespace {

nlohmann::json pt(const Vec2 &p) { return nlohmann::json::array({p.x, p.y}); }

}  // namespace

nlohmann::json to_json(const DiagnosticsReport &r) {
  using nlohmann::json;
  json j;
  j["format_version"] = io::kFormatVersion;
  j["epsilon"] = r.epsilon;
  j["energy"] = r.energy;
  j["sigma"] = r.sigma;
  j["sublevel_disjoint"] = r.sublevel_disjoint;
  j["errors"] = r.errors;
  if (r.certificate) {
    const auto &c = *r.certificate;
    j["certificate"] = {{"alpha", c.alpha},          {"threshold", c.threshold},   {"y_star", c.y_star},
                        {"K_measure", c.k_measure},  {"M_measure", c.m_measure},   {"beta", c.beta},
                        {"interface_term", c.interface_term}, {"beta_term", c.beta_term},
                        {"top_term", c.top_term},    {"value", c.value},           {"energy", c.energy},
                        {"tolerance", c.tolerance}};
  }
  if (r.geometry) {
    json fam = json::array();
    for (int w = 0; w < 3; ++w) {
      double len = 0.0;
      for (const auto &pl : r.geometry->curves[w]) len += pl.length();
      fam.push_back({{"pieces", r.geometry->curves[w].size()}, {"length", len}});
    }
    j["level_curves"] = {{"gamma", r.geometry->gamma}, {"families", fam},
                         {"interface_nodes", r.geometry->interface_nodes}};
  }
  if (r.localization) {
    j["localization"] = {{"center", pt(r.localization->center)},
                         {"center_offset", r.localization->center_offset},
                         {"max_distance", r.localization->max_distance}};
  }
  if (r.width) {
    j["width"] = {{"samples", r.width->samples.size()}, {"max_r1", r.width->max_r1},
                  {"C0", r.width->c0_measured}};
  }
  if (r.boundary) {
    j["boundary_curve"] = {{"A", pt(r.boundary->a)}, {"B", pt(r.boundary->b)},
                           {"single_arc", r.boundary->single_arc},
                           {"length", ArclengthCurve(r.boundary->curve).length()}};
  }
  if (r.triple) {
    const auto &t = *r.triple;
    j["triple_point"] = {{"P", pt(t.p)}, {"Q", pt(t.q)}, {"R", pt(t.r)}, {"dist_PQ", t.dist_pq},
                         {"dist_PR", t.dist_pr}, {"residual_P", t.residual_p}, {"sign_changes", t.sign_changes},
                         {"negative_side", t.negative_side}, {"positive_side", t.positive_side}};
  }
  j["row_y0"] = r.row_y0 ? json(*r.row_y0) : json(nullptr);
  if (r.families) {
    const auto &f = *r.families;
    json pts = json::array(), qs = json::array(), rs = json::array();
    for (const auto &p : f.points) pts.push_back(pt(p));
    for (const auto &p : f.q) qs.push_back(pt(p));
    for (const auto &p : f.r) rs.push_back(pt(p));
    j["families"] = {{"k", f.k}, {"spacing", f.spacing}, {"points", pts}, {"labels", f.labels},
                     {"Z2", f.count2}, {"Z3", f.count3}, {"P", pt(f.p)}, {"Q", qs}, {"R", rs},
                     {"min_pair_distance", f.min_pair_distance}, {"min_chord", f.min_chord},
                     {"distance_bounds_ok", f.distance_bounds_ok}, {"separation_ok", f.separation_ok}};
  }
  if (r.l1) {
    j["l1"] = {{"at_origin", r.l1->at_origin}, {"best", r.l1->best}, {"center", pt(r.l1->center)},
               {"orientation", r.l1->orientation}};
  }
  return j;
}

std::string lambda_csv(const LambdaRows &rows) {
  std::string s = "y,chord,lambda1,lambda2,lambda3\n";
  for (std::size_t k = 0; k < rows.y.size(); ++k) {
    s += io::format_double(rows.y[k]) + "," + io::format_double(rows.chord[k]) + "," +
         io::format_double(rows.lambda1[k]) + "," + io::format_double(rows.lambda2[k]) + "," +
         io::format_double(rows.lambda3[k]) + "\n";
  }
  return s;
}

std::string curves_csv(const InterfaceGeometry &geo) {
  std::string s = "family,piece,closed,x,y\n";
  for (int w = 0; w < 3; ++w) {
    for (std::size_t p = 0; p < geo.curves[w].size(); ++p) {
      const auto &pl = geo.curves[w][p];
      for (const Vec2 &v : pl.points) {
        s += std::to_string(w + 1) + "," + std::to_string(p) + "," + (pl.closed ? "1" : "0") + "," +
             io::format_double(v.x) + "," + io::format_double(v.y) + "\n";
      }
    }
  }
  return s;
}

std::string width_csv(const WidthReport &w) {
  std::string s = "family,x,y,r1\n";
  for (const auto &ws : w.samples) {
    s += std::to_string(ws.family + 1) + "," + io::format_double(ws.point.x) + "," + io::format_double(ws.point.y) +
         "," + io::format_double(ws.r1) + "\n";
  }
  return s;
}

std::string certificate_csv(const LowerBoundCertificate &c) {
  std::string s = "term,value\n";
  const std::pair<const char *, double> rows[] = {
      {"alpha", c.alpha},       {"threshold", c.threshold},         {"y_star", c.y_star},
      {"K_measure", c.k_measure}, {"M_measure", c.m_measure},       {"beta", c.beta},
      {"interface_term", c.interface_term}, {"beta_term", c.beta_term}, {"top_term", c.top_term},
      {"value", c.value},       {"energy", c.energy}};
  for (const auto &[k, v] : rows) s += std::string(k) + "," + io::format_double(v) + "\n";
  return s;
}

}  // namespace triode
