#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "support.hpp"
#include "triode/error.hpp"

using namespace triode;
using support::cubic;

namespace {

ConnectionProfile tanh_profile(int n, double L) {
  ConnectionProfile p;
  p.i = 0;
  p.j = 1;
  p.L = L;
  p.n = n;
  const WellSet a = WellSet::cube_roots();
  for (int k = 0; k < n; ++k) {
    const double s = 0.5 * (1.0 + std::tanh(p.eta(k)));
    p.values.push_back(a[0] + s * (a[1] - a[0]));
  }
  return p;
}

double sigma_at(double L, int n) {
  ConnectionOptions o;
  o.L = L;
  o.n = n;
  return minimize_action(cubic(), 0, 1, o).action;
}

}  // namespace

TEST_SUITE("connection") {
  TEST_CASE("the three actions agree and approach the calibration bound from above") {
    const auto &p = support::connections();
    const EqualActionReport r = check_equal_actions(p, 1e-6);
    CHECK(r.pass);
    CHECK(r.max_rel_deviation <= 1e-6);
    for (const ConnectionProfile &c : p) {
      CHECK(c.action > support::kBogomolnyi);
      CHECK(c.action - support::kBogomolnyi < 1e-3);
      CHECK(c.values.front() == cubic().wells()[c.i]);
      CHECK(c.values.back() == cubic().wells()[c.j]);
    }
    CHECK(p[0].i == 0);
    CHECK(p[0].j == 1);
    CHECK(p[1].i == 1);
    CHECK(p[1].j == 2);
    CHECK(p[2].i == 2);
    CHECK(p[2].j == 0);
  }

  TEST_CASE("minimization does not exceed the straight-segment action") {
    for (const ConnectionProfile &c : support::connections()) {
      const ConnectionProfile seg = segment_profile(cubic(), c.i, c.j, c.L, c.n);
      CHECK(action(seg, cubic()) >= c.action);
    }
  }

  TEST_CASE("constant profile has zero action") {
    const ConnectionProfile p = segment_profile(cubic(), 0, 0, 12.0, 256);
    CHECK(action(p, cubic()) == 0.0);
  }

  TEST_CASE("straight-segment action against a direct quadrature") {
    const ConnectionProfile p = segment_profile(cubic(), 0, 1, 12.0, 1024);
    double s = 0.0;
    const double h = p.spacing();
    for (int k = 0; k + 1 < p.n; ++k) {
      const Vec2 d = p.values[k + 1] - p.values[k];
      s += 0.5 * (d.x * d.x + d.y * d.y) / h + h * support::cubic_w(0.5 * (p.values[k] + p.values[k + 1]));
    }
    CHECK(std::isfinite(s));
    CHECK(s > 0.0);
    CHECK(action(p, cubic()) == doctest::Approx(s).epsilon(1e-12));
  }

  TEST_CASE("action of a fixed smooth profile converges at second order") {
    const double s1 = action(tanh_profile(257, 12.0), cubic());
    const double s2 = action(tanh_profile(513, 12.0), cubic());
    const double s3 = action(tanh_profile(1025, 12.0), cubic());
    const double ratio = (s1 - s2) / (s2 - s3);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("action gradient matches central differences") {
    ConnectionProfile p = tanh_profile(128, 6.0);
    const std::vector<Vec2> g = action_gradient(p, cubic());
    CHECK(g.front() == Vec2{0, 0});
    CHECK(g.back() == Vec2{0, 0});
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> pick(1, p.n - 2);
    const double d = 1e-6;
    for (int t = 0; t < 20; ++t) {
      const int k = pick(rng);
      for (int c = 0; c < 2; ++c) {
        ConnectionProfile a = p, b = p;
        (c ? a.values[k].y : a.values[k].x) += d;
        (c ? b.values[k].y : b.values[k].x) -= d;
        const double fd = (action(a, cubic()) - action(b, cubic())) / (2 * d);
        const double gk = c ? g[k].y : g[k].x;
        CHECK(std::abs(fd - gk) <= 1e-6 * std::max(1.0, std::abs(gk)));
      }
    }
  }

  TEST_CASE("reversal preserves the action") {
    const ConnectionProfile &p = support::connections()[0];
    const ConnectionProfile r = p.reversed();
    CHECK(r.i == p.j);
    CHECK(r.j == p.i);
    CHECK(action(r, cubic()) == doctest::Approx(p.action).epsilon(1e-14));
    CHECK(dist(r(0.3), p(-0.3)) < 1e-12);
  }

  TEST_CASE("interpolation extends by the end values") {
    const ConnectionProfile &p = support::connections()[0];
    CHECK(p(-100.0) == p.values.front());
    CHECK(p(100.0) == p.values.back());
    CHECK(dist(p(p.eta(10)), p.values[10]) < 1e-14);
  }

  TEST_CASE("sigma is stable under refinement and extrapolates to the golden value") {
    const std::array<double, 3> L{8.0, 12.0, 16.0};
    const std::array<int, 3> n{512, 1024, 2048};
    std::array<double, 3> h{}, s{};
    for (int k = 0; k < 3; ++k) {
      h[k] = 2.0 * L[k] / (n[k] - 1);
      s[k] = sigma_at(L[k], n[k]);
    }
    CHECK(std::abs(s[2] - s[1]) / s[1] <= 1e-4);
    CHECK(std::abs(s[1] - s[0]) / s[0] <= 1e-4);
    const double ext = extrapolate_sigma(h, s);
    CHECK(std::abs(ext - support::kBogomolnyi) < 1e-8);

    std::ifstream in(TRIODE_GOLDEN_DIR "/sigma_cubic.json");
    REQUIRE(in.good());
    const nlohmann::json golden = nlohmann::json::parse(in);
    CHECK(ext == doctest::Approx(golden["sigma_extrapolated"].get<double>()).epsilon(1e-9));
    CHECK(s[1] == doctest::Approx(golden["sigma_12_1024"].get<double>()).epsilon(1e-9));
  }

  TEST_CASE("extrapolation is exact on a quadratic-quartic model") {
    const std::array<double, 3> h{0.04, 0.02, 0.01};
    std::array<double, 3> s{};
    for (int k = 0; k < 3; ++k) s[k] = 1.5 + 0.7 * h[k] * h[k] - 3.0 * std::pow(h[k], 4);
    CHECK(extrapolate_sigma(h, s) == doctest::Approx(1.5).epsilon(1e-12));
  }

  TEST_CASE("decay rates are symmetric and match the linearization") {
    const PotentialConstants &k = support::constants();
    for (const ConnectionProfile &p : support::connections()) {
      const TailFits f = fit_decay(p, cubic(), k.delta_w);
      CHECK(f.left.k == doctest::Approx(f.right.k).epsilon(0.05));
      // Linearizing U'' = grad W(U) at a well gives the rate sqrt(lambda).
      const double rate = std::sqrt(k.c1);
      CHECK(f.left.k == doctest::Approx(rate).epsilon(0.2));
      CHECK(f.right.k == doctest::Approx(rate).epsilon(0.2));
      CHECK(f.left.residual < 1e-2);
      CHECK(f.right.residual < 1e-2);
      CHECK(f.left.points >= 8);
    }
  }

  TEST_CASE("a profile without tail raises insufficient-tail") {
    ConnectionProfile p = tanh_profile(64, 0.5);
    CHECK_THROWS_AS(fit_decay(p, cubic(), support::constants().delta_w), Error);
  }

  TEST_CASE("admissible perturbation keeps the actions equal") {
    Perturbation b;
    b.amplitude = 1.0;
    b.radius = 0.2;
    b.center = {-1.2, 0.0};
    const PotentialSpec spec = PotentialSpec::perturbed_cubic(b);
    REQUIRE(spec.perturbation_admissible());
    const EqualActionReport r = check_equal_actions(spec, 1e-4);
    CHECK(r.pass);
  }

  TEST_CASE("perturbation across a connection breaks the equal actions") {
    Perturbation b;
    b.amplitude = 2.0;
    b.radius = 0.3;
    b.center = {0.25, support::kSqrt3 / 4};
    const PotentialSpec spec = PotentialSpec::perturbed_cubic(b);
    const EqualActionReport r = check_equal_actions(spec, 1e-4);
    CHECK_FALSE(r.pass);
    CHECK(r.sigmas[0] > r.sigmas[1]);
  }

  TEST_CASE("the profile passes near the potential's interior critical point") {
    // The connection bends toward the origin; it cannot reach it because W(0) = 1.
    const double d = min_distance_to(support::connections()[0], {0.0, 0.0});
    CHECK(d > 0.0);
    CHECK(d < 0.5);
  }

  TEST_CASE("invalid requests") {
    CHECK_THROWS_AS(minimize_action(cubic(), 1, 1), Error);
    CHECK_THROWS_AS(segment_profile(cubic(), 0, 3, 12.0, 256), Error);
    CHECK_THROWS_AS(segment_profile(cubic(), 0, 1, 12.0, 8), Error);
  }
}
