#include <doctest.h>

#include "support.hpp"
#include "triode/error.hpp"
#include "triode/io.hpp"

using namespace triode;
using support::connections;
using support::cubic;

namespace {

SolveConfig at(double eps) {
  SolveConfig c;
  c.epsilon = eps;
  return c;
}

}  // namespace

TEST_SUITE("minimizer") {
  TEST_CASE("minimizer energy lies inside the bracket") {
    SolveConfig c = at(0.1);
    c.grid = 257;
    const Solution s = minimize(c, cubic(), connections());
    const double s3 = 3 * support::sigma();
    const Field t = build_test_function(s.field.grid, 0.1, 0.4, connections(), cubic().wells());
    CHECK(s.report.converged);
    CHECK(s.report.accepted_increases == 0);
    CHECK(s.report.energy <= energy(t, cubic()));
    CHECK(s.report.energy >= s3 - 1.0 * std::sqrt(0.1));
    CHECK(s.report.energy == doctest::Approx(energy(s.field, cubic())).epsilon(1e-14));
    CHECK(s.report.initial_energy == doctest::Approx(energy(t, cubic())).epsilon(1e-14));
    CHECK(s.report.grid == 257);
    CHECK(s.report.sup_u <= 2 * support::constants().M);
    CHECK(s.report.field_hash == io::hex64(io::field_hash(s.field)));
  }

  TEST_CASE("clamped nodes keep the boundary data") {
    const Field &f = support::minimizer(0.1).field;
    for (std::size_t id = 0; id < f.grid->size(); ++id) {
      if (!f.grid->interior(id)) {
        CHECK(f.values[id] == boundary_g_eps(polar_angle(f.grid->point(id)), 0.1, 0.4, cubic().wells()));
      }
    }
  }

  TEST_CASE("warm start from the minimizer is a fixed point") {
    const Solution &s = support::minimizer(0.1);
    SolveConfig c = at(0.1);
    c.init = Initializer::WarmStart;
    const Solution w = minimize(c, cubic(), connections(), &s.field);
    CHECK(w.report.iterations <= 10);
    CHECK(w.report.accepted_increases == 0);
    CHECK(std::abs(w.report.energy - s.report.energy) <= 1e-10 * s.report.energy);
  }

  TEST_CASE("rotated starts reach the same energy") {
    SolveConfig c = at(0.2);
    c.init = Initializer::RotatedTestFunction;
    c.rotation = 0;
    c.starts = 3;
    const Solution s = minimize(c, cubic(), connections());
    REQUIRE(s.report.starts.size() == 3);
    const double tol = 2.0 * quadrature_tolerance(*s.field.grid) * s.report.energy;
    for (const StartRecord &r : s.report.starts) {
      CHECK(r.converged);
      CHECK(std::abs(r.energy - s.report.energy) <= tol);
      CHECK(r.energy >= s.report.energy);
    }
    CHECK(s.report.basins_agree);
  }

  TEST_CASE("label rotation by three is the identity") {
    SolveConfig a = at(0.2), b = at(0.2);
    b.init = Initializer::RotatedTestFunction;
    b.rotation = 3;
    const Field fa = initial_field(a, cubic(), connections(), 0);
    const Field fb = initial_field(b, cubic(), connections(), 0);
    for (std::size_t id = 0; id < fa.values.size(); ++id) CHECK(dist(fa.values[id], fb.values[id]) < 1e-12);
  }

  TEST_CASE("a single rotation maps the wells cyclically") {
    SolveConfig c = at(0.2);
    c.init = Initializer::ConstantWell;
    c.well = 0;
    const Field f0 = initial_field(c, cubic(), connections(), 0);
    const Field f1 = initial_field(c, cubic(), connections(), 1);
    const std::size_t centre = f0.grid->index(40, 40);
    CHECK(f0.values[centre] == cubic().wells()[0]);
    CHECK(f1.values[centre] == cubic().wells()[1]);
  }

  TEST_CASE("solves are bitwise deterministic") {
    const Solution a = minimize(at(0.2), cubic(), connections());
    set_kernel_threads(2);
    const Solution b = minimize(at(0.2), cubic(), connections());
    set_kernel_threads(1);
    CHECK(a.report.field_hash == b.report.field_hash);
    CHECK(a.field.values == b.field.values);
  }

  TEST_CASE("random initializer follows the seed") {
    SolveConfig c = at(0.2);
    c.init = Initializer::Random;
    c.seed = 5;
    const Field a = initial_field(c, cubic(), connections(), 0);
    const Field b = initial_field(c, cubic(), connections(), 0);
    c.seed = 6;
    const Field d = initial_field(c, cubic(), connections(), 0);
    CHECK(a.values == b.values);
    CHECK(a.values != d.values);
    for (std::size_t id : a.grid->free_nodes()) CHECK(norm(a.values[id]) <= 1.0);
  }

  TEST_CASE("explicit descent decreases the energy monotonically") {
    SolveConfig c = at(0.2);
    c.rule = optim::StepRule::Descent;
    c.max_iter = 300;
    const Solution s = minimize(c, cubic(), connections());
    CHECK(s.report.accepted_increases == 0);
    CHECK(s.report.energy < s.report.initial_energy);
    CHECK(s.report.reason == "max-iterations");
    CHECK_FALSE(s.report.converged);
  }

  TEST_CASE("single-member sweep equals a plain solve") {
    const auto sweep = continuation_sweep({0.2}, at(0.2), cubic(), connections());
    const Solution plain = minimize(at(0.2), cubic(), connections());
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].report.field_hash == plain.report.field_hash);
  }

  TEST_CASE("continuation warm start halves the cold-start iterations") {
    const auto sweep = continuation_sweep({0.1, 0.05}, at(0.1), cubic(), connections());
    const Solution &cold = support::minimizer(0.05);
    CHECK(sweep[1].report.converged);
    CHECK(sweep[1].report.energy == doctest::Approx(cold.report.energy).epsilon(quadrature_tolerance(*cold.field.grid)));
    CHECK(sweep[1].report.iterations <= cold.report.iterations / 2);
  }

  TEST_CASE("continuation warm start beats uninformed starts") {
    const auto sweep = continuation_sweep({0.1, 0.05}, at(0.1), cubic(), connections());
    for (Initializer init : {Initializer::Random, Initializer::ConstantWell}) {
      SolveConfig c = at(0.05);
      c.init = init;
      const Solution s = minimize(c, cubic(), connections());
      CHECK(s.report.converged);
      CHECK(sweep[1].report.iterations <= s.report.iterations / 2);
    }
  }

  TEST_CASE("resampling onto the same grid is the identity") {
    const Field &f = support::minimizer(0.1).field;
    const Field r = resample(f, f.grid, f.epsilon);
    for (std::size_t id = 0; id < f.values.size(); ++id) CHECK(dist(r.values[id], f.values[id]) < 1e-14);
  }

  TEST_CASE("invalid configurations") {
    SolveConfig c = at(0.1);
    c.grid = 41;
    CHECK_THROWS_AS(minimize(c, cubic(), connections()), Error);
    c = at(1.5);
    CHECK_THROWS_AS(c.validate(), Error);
    c = at(0.1);
    c.starts = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = at(0.1);
    c.init = Initializer::WarmStart;
    CHECK_THROWS_AS(minimize(c, cubic(), connections()), Error);
    CHECK_THROWS_AS(continuation_sweep({}, at(0.1), cubic(), connections()), Error);
    CHECK_THROWS_AS(continuation_sweep({0.1, 0.2}, at(0.1), cubic(), connections()), Error);
    CHECK_THROWS_AS(parse_initializer("zero"), Error);
    CHECK_THROWS_AS(parse_step_rule("newton"), Error);
  }

  TEST_CASE("initializer and rule names round trip") {
    for (Initializer i : {Initializer::TestFunction, Initializer::ConstantWell, Initializer::Random,
                          Initializer::RotatedTestFunction, Initializer::WarmStart}) {
      CHECK(parse_initializer(to_string(i)) == i);
    }
    CHECK(parse_step_rule(to_string(optim::StepRule::Descent)) == optim::StepRule::Descent);
    CHECK(parse_step_rule(to_string(optim::StepRule::Lbfgs)) == optim::StepRule::Lbfgs);
  }
}
