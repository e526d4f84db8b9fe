#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "mirroropt/problems.hpp"
#include "mirroropt/rng.hpp"
#include "mirroropt/stepsizes.hpp"

using namespace mirroropt;

TEST_CASE("stepsize evaluation") {
  const Vec g2 = Vec::Constant(1, 2.0);
  const Vec g0 = Vec::Zero(1);

  SECTION("msps by direct substitution") {
    auto rule = StepsizeRule::msps(1.0);
    // f = x^2/2 at x = 2: value 2, inf 0, grad 2
    const StepContext ctx{2.0, 0.0, g2, 1.0, NormTag::l2(), 1};
    CHECK(stepsize(rule, ctx) == Catch::Approx(0.5));
  }
  SECTION("msps_max clamps") {
    auto rule = StepsizeRule::msps_max(1.0, 0.1);
    const StepContext ctx{2.0, 0.0, g2, 1.0, NormTag::l2(), 1};
    CHECK(stepsize(rule, ctx) == Catch::Approx(0.1));
  }
  SECTION("converged components get zero") {
    auto rule = StepsizeRule::msps(1.0);
    const StepContext ctx{0.0, 0.0, g0, 1.0, NormTag::l2(), 1};
    CHECK(stepsize(rule, ctx) == 0.0);
  }
  SECTION("zero gradient at a non-optimum is an error") {
    auto rule = StepsizeRule::msps(1.0);
    const StepContext ctx{1.0, 0.0, g0, 1.0, NormTag::l2(), 1};
    CHECK_THROWS_AS(stepsize(rule, ctx), ZeroGradientAtNonOptimum);
  }
  SECTION("constant ignores the context entirely") {
    auto rule = StepsizeRule::constant(0.7);
    const StepContext a{2.0, 0.0, g2, 1.0, NormTag::l2(), 1};
    const StepContext b{123.0, -5.0, g0, 0.5, NormTag::l1(), 9};
    CHECK(stepsize(rule, a) == 0.7);
    CHECK(stepsize(rule, b) == 0.7);
  }
  SECTION("mirror polyak uses the rule-held optimal value") {
    auto rule = StepsizeRule::mirror_polyak(0.0);
    const Vec g1 = Vec::Constant(1, 1.0);
    const StepContext ctx{0.5, 0.0, g1, 1.0, NormTag::l2(), 1};
    CHECK(stepsize(rule, ctx) == Catch::Approx(0.5));
  }
  SECTION("dual norm enters the denominator") {
    auto rule = StepsizeRule::msps(1.0);
    Vec g(2);
    g << 3.0, -1.0;  // ‖g‖_inf^2 = 9 under the l1 primal
    const StepContext ctx{4.5, 0.0, g, 1.0, NormTag::l1(), 1};
    CHECK(stepsize(rule, ctx) == Catch::Approx(0.5));
  }
}

TEST_CASE("smoothed msps_max replays the footnote bound") {
  auto rule = StepsizeRule::smoothed_msps_max(0.5, 0.8, 32, 256, 1.0);
  const double decay = std::pow(0.8, 32.0 / 256.0);
  SplitMix64 rng(71);
  double eta_prev = 1.0;
  for (long t = 1; t <= 200; ++t) {
    const double value = 0.1 + rng.uniform();
    Vec g = Vec::Constant(1, 0.2 + rng.uniform());
    const StepContext ctx{value, 0.0, g, 1.0, NormTag::l2(), t};
    const double eta = stepsize(rule, ctx);
    const double bound = decay * eta_prev;
    const double unclamped = value / (0.5 * g[0] * g[0]);
    REQUIRE(eta == Catch::Approx(std::min(unclamped, bound)).epsilon(1e-14));
    REQUIRE(eta <= bound + 1e-15);
    eta_prev = eta;  // the rule records the returned value as its state
  }
}

TEST_CASE("msps sandwich bounds over random quadratic ensembles") {
  SplitMix64 rng(73);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = 0.25 + 2.0 * rng.uniform();
    const double b = rng.normal();
    const auto p = quad1d_problem({{a, b, 0.0}}, FeasibleSet::reals(1));
    const double L = p.components[0].smoothness_L;  // = 2a
    const double mu = 2.0 * a;                      // strongly convex with mu = L here
    const double c = 0.5 + rng.uniform();
    const auto bounds = msps_bounds(c, 1.0, L, mu);
    auto rule = StepsizeRule::msps(c);
    for (int k = 0; k < 40; ++k) {
      const Vec x = Vec::Constant(1, 3.0 * rng.normal());
      const Vec g = p.components[0].grad(x);
      const double value = p.components[0].value(x);
      const double inf = p.components[0].inf_unconstrained;
      // near the vertex the gap is pure cancellation noise
      if (value - inf < 1e-3 * (1.0 + std::abs(value) + std::abs(inf))) continue;
      const StepContext ctx{value, inf, g, 1.0, NormTag::l2(), 1};
      const double eta = stepsize(rule, ctx);
      REQUIRE(eta >= bounds.lower - 1e-12);
      REQUIRE(eta <= bounds.upper + 1e-12);
    }
  }
}

TEST_CASE("msps_bounds substitution") {
  const auto b1 = msps_bounds(1.0, 1.0, 2.0, 1.0);
  CHECK(b1.lower == Catch::Approx(0.25));
  CHECK(b1.upper == Catch::Approx(0.5));
  const auto b2 = msps_bounds(0.5, 0.5, 4.0);
  CHECK(b2.lower == Catch::Approx(0.125));
  CHECK(std::isinf(b2.upper));
  const auto b3 = msps_bounds(1.0, 1.0, 3.0, 3.0);
  CHECK(b3.lower == b3.upper);
}

TEST_CASE("alpha is the min of the self-bounded step and the cap") {
  CHECK(alpha_constant(1, 1, 2, 10) == Catch::Approx(0.25));
  CHECK(alpha_constant(1, 1, 2, 0.1) == Catch::Approx(0.1));
  CHECK(alpha_constant(1, 1, 2, 0.25) == Catch::Approx(0.25));
}

TEST_CASE("pl_constants") {
  SECTION("worked example") {
    const auto pc = pl_constants(1.0, 1.0, 1.0, 1.0, 0.1);
    CHECK(pc.alpha == Catch::Approx(0.1));
    CHECK(pc.nu == Catch::Approx(0.85));
    CHECK(pc.valid);
  }
  SECTION("c below the threshold is invalid") {
    const auto pc = pl_constants(0.1, 1.0, 1.0, 1.0, 0.1);
    CHECK_FALSE(pc.valid);
  }
  SECTION("grid scan over eta_b replays the two-case cap") {
    SplitMix64 rng(79);
    for (int trial = 0; trial < 40; ++trial) {
      const double c = 0.2 + 2.0 * rng.uniform();
      const double L = 0.5 + 3.0 * rng.uniform();
      const double mu = 0.2 + rng.uniform();
      for (int k = 1; k <= 100; ++k) {
        const double eta_b = 0.02 * k;
        const auto pc = pl_constants(c, 1.0, L, mu, eta_b);
        const double alpha = std::min(1.0 / (2.0 * c * L), eta_b);
        const double slope = 1.0 / alpha - 2.0 * mu + L / (2.0 * c);
        const double nu = eta_b * slope;
        const double cap = std::max(slope > 0.0 ? 1.0 / slope : 1e300, 1.0 / (2.0 * c * L));
        const bool expect = c > L / (4.0 * mu) && eta_b < cap && nu > 0.0 && nu < 1.0;
        REQUIRE(pc.valid == expect);
        REQUIRE(pc.alpha == Catch::Approx(alpha));
        REQUIRE(pc.nu == Catch::Approx(nu));
      }
    }
  }
}
