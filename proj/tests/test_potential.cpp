#include <doctest.h>

#include <random>

#include "support.hpp"
#include "triode/error.hpp"

using namespace triode;
using support::cubic;

namespace {

Vec2 fd_grad(const PotentialSpec &spec, const Vec2 &u, double d = 1e-6) {
  return {(spec.eval(u + Vec2{d, 0}) - spec.eval(u - Vec2{d, 0})) / (2 * d),
          (spec.eval(u + Vec2{0, d}) - spec.eval(u - Vec2{0, d})) / (2 * d)};
}

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("cubic values at the wells and the origin") {
    const WellSet a = WellSet::cube_roots();
    CHECK(cubic().eval({1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(cubic().eval({0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(std::abs(cubic().eval({-0.5, support::kSqrt3 / 2})) < 1e-15);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(cubic().eval(a[i])) < 1e-15);
  }

  TEST_CASE("cubic matches an independent complex evaluation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    for (int k = 0; k < 500; ++k) {
      const Vec2 u{box(rng), box(rng)};
      CHECK(cubic().eval(u) == doctest::Approx(support::cubic_w(u)).epsilon(1e-13));
    }
  }

  TEST_CASE("gradient vanishes at wells and origin") {
    for (const Vec2 &u : {Vec2{1, 0}, Vec2{0, 0}}) {
      const Vec2 g = cubic().grad(u);
      CHECK(norm(g) < 1e-14);
    }
  }

  TEST_CASE("gradient matches central differences") {
    const Vec2 g = cubic().grad({2.0, 0.0});
    const Vec2 fd = fd_grad(cubic(), {2.0, 0.0});
    CHECK(norm(g - fd) / norm(g) < 1e-6);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> box(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
      const Vec2 u{box(rng), box(rng)};
      const Vec2 gu = cubic().grad(u);
      CHECK(norm(gu - fd_grad(cubic(), u)) / std::max(1.0, norm(gu)) < 1e-6);
    }
  }

  TEST_CASE("hessian matches differences of the gradient") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> box(-1.5, 1.5);
    const double d = 1e-6;
    for (int k = 0; k < 100; ++k) {
      const Vec2 u{box(rng), box(rng)};
      const Sym2 H = cubic().hess(u);
      const Vec2 cx = (1.0 / (2 * d)) * (cubic().grad(u + Vec2{d, 0}) - cubic().grad(u - Vec2{d, 0}));
      const Vec2 cy = (1.0 / (2 * d)) * (cubic().grad(u + Vec2{0, d}) - cubic().grad(u - Vec2{0, d}));
      const double scale = std::max(1.0, std::abs(H.xx) + std::abs(H.xy) + std::abs(H.yy));
      CHECK(std::abs(H.xx - cx.x) / scale < 1e-6);
      CHECK(std::abs(H.xy - cx.y) / scale < 1e-6);
      CHECK(std::abs(H.xy - cy.x) / scale < 1e-6);
      CHECK(std::abs(H.yy - cy.y) / scale < 1e-6);
    }
  }

  TEST_CASE("hessian eigenvalues at the wells and the origin") {
    // At a simple root W = |p|^2 has Hessian 2|p'(a)|^2 I = 18 I; at the origin
    // |z|^6 - 2 Re z^3 + 1 has no quadratic part.
    const WellSet a = WellSet::cube_roots();
    double lo0 = 0, hi0 = 0;
    cubic().hess(a[0]).eigenvalues(lo0, hi0);
    CHECK(lo0 > 0.0);
    CHECK(lo0 == doctest::Approx(18.0).epsilon(1e-12));
    CHECK(hi0 == doctest::Approx(18.0).epsilon(1e-12));
    for (int i = 1; i < 3; ++i) {
      double lo = 0, hi = 0;
      cubic().hess(a[i]).eigenvalues(lo, hi);
      CHECK(std::abs(lo - lo0) < 1e-10);
      CHECK(std::abs(hi - hi0) < 1e-10);
    }
    double lo = 1, hi = 1;
    cubic().hess({0, 0}).eigenvalues(lo, hi);
    CHECK(std::abs(lo) < 1e-14);
    CHECK(std::abs(hi) < 1e-14);
  }

  TEST_CASE("rotation by a cube root of unity is a symmetry") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> box(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
      const Vec2 u{box(rng), box(rng)};
      CHECK(cubic().eval(rotate(u, 2 * M_PI / 3)) == doctest::Approx(cubic().eval(u)).epsilon(1e-12));
    }
  }

  TEST_CASE("non-finite input is rejected") {
    CHECK_THROWS_AS(eval_w(cubic(), {NAN, 0.0}), Error);
    CHECK_THROWS_AS(grad_w(cubic(), {0.0, INFINITY}), Error);
  }

  TEST_CASE("perturbation only acts inside its support") {
    Perturbation b;
    b.amplitude = 2.0;
    b.radius = 0.2;
    b.center = {-1.2, 0.0};
    const PotentialSpec p = PotentialSpec::perturbed_cubic(b);
    CHECK(p.perturbation_admissible());
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> box(-2.0, 2.0);
    int outside = 0;
    for (int k = 0; k < 2000; ++k) {
      const Vec2 u{box(rng), box(rng)};
      if (dist(u, b.center) < b.radius) {
        CHECK(p.eval(u) >= cubic().eval(u) - 1e-12);
        continue;
      }
      ++outside;
      CHECK(p.eval(u) == cubic().eval(u));
      CHECK(p.grad(u) == cubic().grad(u));
    }
    CHECK(outside > 1500);
    CHECK(p.eval(b.center) > cubic().eval(b.center));
  }

  TEST_CASE("perturbation on a well-to-well segment is not admissible") {
    Perturbation b;
    b.amplitude = 1.0;
    b.center = {0.25, support::kSqrt3 / 4};
    CHECK_FALSE(PotentialSpec::perturbed_cubic(b).perturbation_admissible());
  }

  TEST_CASE("measured constants of the cubic potential") {
    const PotentialConstants &k = support::constants();
    CHECK(k.c1 <= k.c2);
    CHECK(k.c1 == doctest::Approx(18.0).epsilon(1e-9));
    CHECK(k.c2 == doctest::Approx(18.0).epsilon(1e-9));
    CHECK(k.c_w <= k.c1);
    CHECK(k.C_w >= k.c2);
    CHECK(k.delta_w > 0.0);
    CHECK(k.delta_w < 0.5 * WellSet::cube_roots().min_separation());

    // Independent sampling oracle on the annuli around each well.
    const WellSet a = WellSet::cube_roots();
    double lo = INFINITY, hi = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int r = 1; r <= 40; ++r) {
        const double rad = k.delta_w * r / 40.0;
        for (int t = 0; t < 180; ++t) {
          const Vec2 u = a[i] + rad * Vec2{std::cos(2 * M_PI * t / 180), std::sin(2 * M_PI * t / 180)};
          const double q = 2.0 * support::cubic_w(u) / (rad * rad);
          lo = std::min(lo, q);
          hi = std::max(hi, q);
        }
      }
    }
    CHECK(k.c_w == doctest::Approx(lo).epsilon(0.01));
    CHECK(k.C_w == doctest::Approx(hi).epsilon(0.01));

    // Coercivity beyond M.
    for (int t = 0; t < 360; ++t) {
      const Vec2 d{std::cos(2 * M_PI * t / 360), std::sin(2 * M_PI * t / 360)};
      for (double r : {k.M + 0.01, k.M + 0.5, 2 * k.M + 1.0}) CHECK(dot(cubic().grad(r * d), r * d) > 0.0);
    }
  }

  TEST_CASE("zero-amplitude perturbation leaves the constants unchanged") {
    Perturbation b;
    b.amplitude = 0.0;
    const PotentialConstants p = estimate_constants(PotentialSpec::perturbed_cubic(b));
    const PotentialConstants &k = support::constants();
    CHECK(std::abs(p.c_w - k.c_w) < 1e-12);
    CHECK(std::abs(p.C_w - k.C_w) < 1e-12);
    CHECK(std::abs(p.delta_w - k.delta_w) < 1e-12);
    CHECK(std::abs(p.c1 - k.c1) < 1e-12);
    CHECK(std::abs(p.c2 - k.c2) < 1e-12);
    CHECK(std::abs(p.M - k.M) < 1e-12);
  }

  TEST_CASE("user polynomial with the cube roots reproduces the cubic") {
    const PotentialSpec u = PotentialSpec::user_polynomial(WellSet::cube_roots());
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> box(-1.5, 1.5);
    for (int k = 0; k < 100; ++k) {
      const Vec2 z{box(rng), box(rng)};
      CHECK(u.eval(z) == doctest::Approx(cubic().eval(z)).epsilon(1e-12));
    }
  }

  TEST_CASE("coincident wells violate the hypotheses") {
    WellSet w = WellSet::cube_roots();
    w.a[2] = w.a[1];
    CHECK_THROWS_AS(validate_potential(PotentialSpec::user_polynomial(w)), Error);
    CHECK_THROWS_AS(estimate_constants(PotentialSpec::user_polynomial(w)), Error);
  }

  TEST_CASE("gamma cap") {
    const double s = support::sigma();
    const PotentialConstants &k = support::constants();
    const double expect = std::min(0.5 * support::kSqrt3, std::sqrt(s / (20.0 * k.C_w)));
    CHECK(gamma_cap(cubic(), k, s) == doctest::Approx(expect));
    CHECK(gamma_cap(cubic(), k, s) > 0.05);
  }

  TEST_CASE("potential kind names round trip") {
    for (PotentialKind k : {PotentialKind::Cubic, PotentialKind::PerturbedCubic, PotentialKind::UserPolynomial}) {
      CHECK(parse_potential_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_potential_kind("quartic"), Error);
  }
}
