#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "triode/diagnostics.hpp"
#include "triode/error.hpp"

namespace triode {

double Polyline::length() const {
  double s = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) s += dist(points[k - 1], points[k]);
  if (closed && points.size() > 1) s += dist(points.back(), points.front());
  return s;
}

namespace {

Nearest nearest_on_segment(const Vec2 &z, const Vec2 &p, const Vec2 &q) {
  const Vec2 d = q - p;
  const double len2 = norm2(d);
  const double s = len2 > 0.0 ? std::clamp(dot(z - p, d) / len2, 0.0, 1.0) : 0.0;
  const Vec2 c = p + s * d;
  return {c, dist(z, c)};
}

}  // namespace

std::optional<Nearest> nearest_on(const std::vector<Polyline> &family, const Vec2 &z) {
  std::optional<Nearest> best;
  for (const Polyline &pl : family) {
    const auto &p = pl.points;
    if (p.empty()) continue;
    if (p.size() == 1) {
      const Nearest n{p[0], dist(z, p[0])};
      if (!best || n.distance < best->distance) best = n;
      continue;
    }
    const std::size_t m = pl.closed ? p.size() : p.size() - 1;
    for (std::size_t k = 0; k < m; ++k) {
      const Nearest n = nearest_on_segment(z, p[k], p[(k + 1) % p.size()]);
      if (!best || n.distance < best->distance) best = n;
    }
  }
  return best;
}

double distance_to(const std::vector<Polyline> &family, const Vec2 &z) {
  const auto n = nearest_on(family, z);
  return n ? n->distance : std::numeric_limits<double>::infinity();
}

ArclengthCurve::ArclengthCurve(std::vector<Vec2> points) : p_(std::move(points)) {
  s_.reserve(p_.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p_.size(); ++k) {
    if (k > 0) acc += dist(p_[k - 1], p_[k]);
    s_.push_back(acc);
  }
}

Vec2 ArclengthCurve::at(double t) const {
  if (p_.empty()) throw Error(ErrorKind::InvalidInput, "empty curve");
  if (t <= 0.0) return p_.front();
  if (t >= length()) return p_.back();
  const auto it = std::upper_bound(s_.begin(), s_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - s_.begin());
  const double seg = s_[k] - s_[k - 1];
  const double f = seg > 0.0 ? (t - s_[k - 1]) / seg : 0.0;
  return p_[k - 1] + f * (p_[k] - p_[k - 1]);
}

namespace {

// Parameter interval of the segment p + t d (t in [0,1]) inside the closed
// unit disk; empty when lo > hi.
std::pair<double, double> disk_interval(const Vec2 &p, const Vec2 &q) {
  const Vec2 d = q - p;
  const double a = norm2(d), b = 2.0 * dot(p, d), c = norm2(p) - 1.0;
  if (a == 0.0) return c <= 0.0 ? std::pair{0.0, 1.0} : std::pair{1.0, 0.0};
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {1.0, 0.0};
  const double r = std::sqrt(disc);
  const double t0 = (-b - r) / (2.0 * a), t1 = (-b + r) / (2.0 * a);
  return {std::max(t0, 0.0), std::min(t1, 1.0)};
}

void push_unique(std::vector<Vec2> &out, const Vec2 &p) {
  if (out.empty() || dist(out.back(), p) > 1e-14) out.push_back(p);
}

std::vector<Polyline> clip_to_disk(const Polyline &pl) {
  std::vector<Polyline> out;
  const auto &p = pl.points;
  if (p.size() < 2) return out;
  const std::size_t m = pl.closed ? p.size() : p.size() - 1;
  bool all_inside = true;
  for (const Vec2 &v : p) all_inside = all_inside && norm2(v) <= 1.0;
  if (all_inside) return {pl};

  Polyline cur;
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 &a = p[k], &b = p[(k + 1) % p.size()];
    const auto [lo, hi] = disk_interval(a, b);
    if (lo > hi) {
      if (cur.points.size() >= 2) out.push_back(cur);
      cur.points.clear();
      continue;
    }
    const Vec2 s = a + lo * (b - a), e = a + hi * (b - a);
    if (lo > 0.0) {
      if (cur.points.size() >= 2) out.push_back(cur);
      cur.points.clear();
    }
    push_unique(cur.points, s);
    push_unique(cur.points, e);
    if (hi < 1.0) {
      if (cur.points.size() >= 2) out.push_back(cur);
      cur.points.clear();
    }
  }
  if (cur.points.size() >= 2) out.push_back(cur);
  // A closed loop cut by the circle: its first and last pieces meet at p[0].
  if (pl.closed && out.size() >= 2 && norm2(p[0]) < 1.0 && dist(out.back().points.back(), p[0]) < 1e-14 &&
      dist(out.front().points.front(), p[0]) < 1e-14) {
    Polyline merged = out.back();
    for (std::size_t k = 1; k < out.front().points.size(); ++k) merged.points.push_back(out.front().points[k]);
    out.front() = merged;
    out.pop_back();
  }
  return out;
}

struct Segment {
  std::uint64_t from_key, to_key;
  Vec2 from, to;
};

}  // namespace

std::vector<Polyline> contour(const Field &field, int well, double level,
                              const std::vector<std::uint8_t> *mask) {
  const DiskGrid &g = *field.grid;
  const int n = g.n();
  const Vec2 a = field.wells[well];
  std::vector<double> v(g.size());
  for (std::size_t id = 0; id < g.size(); ++id) {
    double f = norm(field.values[id] - a) - level;
    if (mask != nullptr && !(*mask)[id] && f < 0.0) f = level;
    if (f == 0.0) f = 1e-300;  // ties go outside
    v[id] = f;
  }
  auto crossing = [&](int i0, int j0, int i1, int j1) {
    const std::size_t p = g.index(i0, j0), q = g.index(i1, j1);
    const double t = v[p] / (v[p] - v[q]);
    return g.point(i0, j0) + t * (g.point(i1, j1) - g.point(i0, j0));
  };
  // Edge keys: 2*index(node) for the +x edge, 2*index(node)+1 for the +y edge.
  auto hkey = [&](int i, int j) { return 2 * static_cast<std::uint64_t>(g.index(i, j)); };
  auto vkey = [&](int i, int j) { return 2 * static_cast<std::uint64_t>(g.index(i, j)) + 1; };

  std::vector<Segment> segs;
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      // Corners counter-clockwise and the edge leaving each corner.
      const int ci[4] = {i, i + 1, i + 1, i}, cj[4] = {j, j, j + 1, j + 1};
      double val[4];
      bool in[4];
      int inside = 0;
      for (int c = 0; c < 4; ++c) {
        val[c] = v[g.index(ci[c], cj[c])];
        in[c] = val[c] < 0.0;
        inside += in[c];
      }
      if (inside == 0 || inside == 4) continue;
      std::uint64_t key[4];
      Vec2 pt[4];
      bool cut[4];
      // Edge e joins corner e and corner e+1; canonical node order (low, high).
      key[0] = hkey(i, j);
      pt[0] = crossing(i, j, i + 1, j);
      key[1] = vkey(i + 1, j);
      pt[1] = crossing(i + 1, j, i + 1, j + 1);
      key[2] = hkey(i, j + 1);
      pt[2] = crossing(i, j + 1, i + 1, j + 1);
      key[3] = vkey(i, j);
      pt[3] = crossing(i, j, i, j + 1);
      for (int e = 0; e < 4; ++e) cut[e] = in[e] != in[(e + 1) % 4];

      auto emit = [&](int e_from, int e_to) { segs.push_back({key[e_from], key[e_to], pt[e_from], pt[e_to]}); };
      // With the inside on the left, each segment runs from the edge where the
      // counter-clockwise boundary walk leaves the inside set to the edge where
      // it re-enters.
      if (inside == 2 && in[0] == in[2]) {
        const double centre = 0.25 * (val[0] + val[1] + val[2] + val[3]);
        const bool centre_in = centre < 0.0;
        // Cut off each corner whose state differs from the centre.
        for (int c = 0; c < 4; ++c) {
          if (in[c] == centre_in) continue;
          const int e_prev = (c + 3) % 4, e_next = c;
          if (in[c]) {
            emit(e_next, e_prev);
          } else {
            emit(e_prev, e_next);
          }
        }
        continue;
      }
      int e_in = -1, e_out = -1;
      for (int e = 0; e < 4; ++e) {
        if (!cut[e]) continue;
        if (in[e]) e_out = e; else e_in = e;
      }
      emit(e_out, e_in);
    }
  }

  std::unordered_map<std::uint64_t, std::size_t> by_start;
  by_start.reserve(segs.size() * 2);
  std::unordered_map<std::uint64_t, int> ends;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_start[segs[s].from_key] = s;
    ends[segs[s].to_key]++;
  }
  std::vector<std::uint8_t> used(segs.size(), 0);
  std::vector<Polyline> raw;
  auto walk = [&](std::size_t s0) {
    Polyline pl;
    pl.points.push_back(segs[s0].from);
    std::size_t s = s0;
    while (true) {
      used[s] = 1;
      pl.points.push_back(segs[s].to);
      auto it = by_start.find(segs[s].to_key);
      if (it == by_start.end()) break;
      if (it->second == s0) {
        pl.closed = true;
        pl.points.pop_back();
        break;
      }
      if (used[it->second]) break;
      s = it->second;
    }
    raw.push_back(std::move(pl));
  };
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s] && ends.find(segs[s].from_key) == ends.end()) walk(s);
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) walk(s);
  }

  std::vector<Polyline> out;
  for (const Polyline &pl : raw) {
    for (Polyline &piece : clip_to_disk(pl)) {
      if (piece.points.size() >= 2) out.push_back(std::move(piece));
    }
  }
  return out;
}

}  // namespace triode
