#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "mirroropt/analysis.hpp"
#include "mirroropt/rng.hpp"

using namespace mirroropt;

TEST_CASE("bound curves by substitution") {
  SECTION("linear rate with a vanished neighborhood") {
    BoundSpec s;
    s.kind = BoundKind::RelStrongConst;
    s.mu = 1.0;
    s.eta = 0.5;  // mu * eta = 1/2
    s.B1 = 1.0;
    s.sigma_sq_X = 0.0;
    const auto c = bound_curve(s, {3});
    CHECK(c[0] == Catch::Approx(0.125));
  }
  SECTION("averaged divergence bound") {
    BoundSpec s;
    s.kind = BoundKind::RelSmoothConst;
    s.eta = 1.0;
    s.B1 = 1.0;
    s.sigma_sq_X = 0.0;
    CHECK(bound_curve(s, {10})[0] == Catch::Approx(0.1));
  }
  SECTION("capped polyak bound is exactly 1/t under interpolation") {
    BoundSpec s;
    s.kind = BoundKind::ConvexPolyakMax;
    s.alpha = 2.0;
    s.eta_b = 10.0;
    s.B1 = 3.0;
    s.sigma_sq = 0.0;
    const auto c = bound_curve(s, {1, 2, 4});
    CHECK(c[0] == Catch::Approx(3.0));
    CHECK(c[1] == Catch::Approx(1.5));
    CHECK(c[2] == Catch::Approx(0.75));
  }
  SECTION("strongly convex polyak bound") {
    BoundSpec s;
    s.kind = BoundKind::RelStrongPolyakMax;
    s.mu = 0.5;
    s.alpha = 1.0;
    s.eta_b = 1.0;
    s.B1 = 2.0;
    s.sigma_sq = 0.25;
    // (1 - 1/2)^2 * 2 + 1 * 0.25 / (1 * 0.5)
    CHECK(bound_curve(s, {2})[0] == Catch::Approx(1.0));
  }
  SECTION("non-smooth bound scales as 1/sqrt(t)") {
    BoundSpec s;
    s.kind = BoundKind::NonSmoothPolyak;
    s.G = 2.0;
    s.B1 = 0.5;
    s.mu_psi = 1.0;
    CHECK(bound_curve(s, {4})[0] == Catch::Approx(2.0 * std::sqrt(0.25)));
  }
  SECTION("pl bound") {
    BoundSpec s;
    s.kind = BoundKind::PLPrecond;
    s.nu = 0.85;
    s.f1_gap = 1.0;
    s.L = 1.0;
    s.sigma_sq = 0.0;
    s.eta_b = 0.1;
    s.c = 1.0;
    CHECK(bound_curve(s, {2})[0] == Catch::Approx(0.85 * 0.85));
  }
  SECTION("missing constants raise") {
    BoundSpec s;
    s.kind = BoundKind::RelStrongConst;
    s.eta = 0.5;
    CHECK_THROWS_AS(bound_curve(s, {1}), IncompleteSpec);
  }
}

TEST_CASE("rate fits") {
  SECTION("exact geometric input") {
    std::vector<long> t;
    std::vector<double> m;
    for (long k = 1; k <= 60; ++k) {
      t.push_back(k);
      m.push_back(std::pow(0.9, static_cast<double>(k)));
    }
    const auto fit = fit_linear_rate(t, m, 1, 60);
    CHECK(fit.decay_per_step == Catch::Approx(0.9).epsilon(1e-10));
    CHECK(fit.r2 >= 0.999);
  }
  SECTION("constant metric fits decay one") {
    const std::vector<long> t{1, 2, 3, 4};
    const std::vector<double> m{2.0, 2.0, 2.0, 2.0};
    const auto fit = fit_linear_rate(t, m, 1, 4);
    CHECK(fit.decay_per_step == Catch::Approx(1.0));
    CHECK(fit.r2 == 1.0);
  }
  SECTION("noisy geometric decay stays near the truth") {
    SplitMix64 rng(83);
    std::vector<long> t;
    std::vector<double> m;
    for (long k = 1; k <= 200; ++k) {
      t.push_back(k);
      m.push_back(std::pow(0.8, static_cast<double>(k)) * (1.0 + 0.01 * (rng.uniform() - 0.5)));
    }
    const auto fit = fit_linear_rate(t, m, 1, 200);
    CHECK(fit.decay_per_step >= 0.79);
    CHECK(fit.decay_per_step <= 0.81);
  }
  SECTION("polynomial decay exponents") {
    std::vector<long> t;
    std::vector<double> inv, half;
    for (long k = 1; k <= 100; ++k) {
      t.push_back(k);
      inv.push_back(5.0 / static_cast<double>(k));
      half.push_back(3.0 / std::sqrt(static_cast<double>(k)));
    }
    CHECK(fit_sublinear_rate(t, inv, 1, 100).exponent == Catch::Approx(-1.0).margin(1e-10));
    CHECK(fit_sublinear_rate(t, half, 1, 100).exponent == Catch::Approx(-0.5).margin(1e-10));
  }
  SECTION("nonpositive metrics are rejected") {
    const std::vector<long> t{1, 2, 3};
    const std::vector<double> m{1.0, 0.0, 2.0};
    CHECK_THROWS_AS(fit_linear_rate(t, m, 1, 3), NonPositiveMetric);
  }
}

TEST_CASE("precondition checks") {
  // two-component strongly convex quadratic ensemble on a box
  const auto p = quad1d_problem({{1.0, 0.2, 0.0}, {0.5, 0.6, 0.0}}, FeasibleSet::box(0.0, 1.0, 1));
  const auto map = MirrorMap::euclidean(1);
  const double L = 2.0;   // max 2|a|
  const double mu = 1.5;  // 2 * mean a

  SECTION("boundary stepsize is admitted") {
    BoundSpec s;
    s.kind = BoundKind::RelStrongConst;
    s.mu = mu;
    s.L = L;
    for (const auto& pr : check_preconditions(s, p, map, StepsizeRule::constant(1.0 / L)))
      CHECK(pr.holds);
  }
  SECTION("too-large stepsize fails the gate") {
    BoundSpec s;
    s.kind = BoundKind::RelStrongConst;
    s.mu = mu;
    s.L = L;
    const auto res = check_preconditions(s, p, map, StepsizeRule::constant(1.01 / L));
    CHECK_FALSE(all_hold(res));
  }
  SECTION("c threshold for the averaged-iterate guarantee") {
    BoundSpec s;
    s.kind = BoundKind::ConvexPolyakMax;
    s.L = L;
    CHECK(all_hold(check_preconditions(s, p, map, StepsizeRule::msps_max(1.0, 1.0))));
    CHECK_FALSE(all_hold(check_preconditions(s, p, map, StepsizeRule::msps_max(0.9, 1.0))));
  }
  SECTION("understated smoothness is falsified by sampling") {
    BoundSpec s;
    s.kind = BoundKind::RelSmoothConst;
    s.L = 0.2;  // true relative smoothness is 2
    const auto res = check_preconditions(s, p, map, StepsizeRule::constant(1.0 / 0.2));
    CHECK_FALSE(all_hold(res));
  }
  SECTION("markov components are unit-smooth relative to entropy") {
    Mat P(4, 4);
    P << 0.4, 0.3, 0.2, 0.1, 0.1, 0.6, 0.2, 0.1, 0.25, 0.25, 0.25, 0.25, 0.3, 0.1, 0.1, 0.5;
    const auto mp = markov_problem(P);
    BoundSpec s;
    s.kind = BoundKind::RelSmoothConst;
    s.L = 1.0;
    const auto res = check_preconditions(s, mp, MirrorMap::neg_entropy(4),
                                         StepsizeRule::constant(1.0), 12345, 2500);
    for (const auto& pr : res) CHECK(pr.holds);
  }
}

TEST_CASE("iterations-to-accuracy bookkeeping") {
  // one strongly convex quadratic: the crossing time is deterministic
  const auto p = quad1d_problem({{1, 0, 0}}, FeasibleSet::reals(1));
  RunConfig cfg{MirrorMap::euclidean(1), FeasibleSet::reals(1), StepsizeRule::constant(0.25), 200,
                0, Vec::Constant(1, 1.0)};
  cfg.xstar_for_metrics = p.known_xstar;
  // x_t = 0.5^(t-1), f = x^2: crossing eps = 1e-4 needs 0.25^(t-1) <= 1e-4, t = 8
  const long iters = iterations_to_accuracy(p, cfg, 1e-4, 2);
  CHECK(iters == 8);
  // unreachable accuracy within the budget reports -1
  RunConfig tiny = cfg;
  tiny.iterations = 3;
  CHECK(iterations_to_accuracy(p, tiny, 1e-12, 1) == -1);
}
