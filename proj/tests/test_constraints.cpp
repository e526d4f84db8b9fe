#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "mirroropt/constraints.hpp"
#include "mirroropt/geometry.hpp"
#include "mirroropt/rng.hpp"

using namespace mirroropt;

namespace {

Vec vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

// brute-force Euclidean projection onto the 2-simplex, for cross-checking
Vec grid_project_simplex2(const Vec& z) {
  Vec best(2);
  double bd = 1e300;
  for (int k = 0; k <= 2000000; ++k) {
    const double t = static_cast<double>(k) / 2000000.0;
    const Vec x = vec({t, 1.0 - t});
    const double d = (x - z).squaredNorm();
    if (d < bd) {
      bd = d;
      best = x;
    }
  }
  return best;
}

Vec random_feasible_point(const FeasibleSet& set, SplitMix64& rng) {
  const int d = set.dim();
  Vec x(d);
  switch (set.kind()) {
    case SetKind::Reals:
      for (int j = 0; j < d; ++j) x[j] = 2.0 * rng.normal();
      return x;
    case SetKind::NonNeg:
      for (int j = 0; j < d; ++j) x[j] = std::abs(rng.normal());
      return x;
    case SetKind::Box:
      for (int j = 0; j < d; ++j) x[j] = set.lo()[j] + rng.uniform() * (set.hi()[j] - set.lo()[j]);
      return x;
    case SetKind::Simplex: {
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        x[j] = -std::log(rng.uniform_pos());
        s += x[j];
      }
      return x / s;
    }
    default: return x;
  }
}

Vec random_interior_point(const MirrorMap& map, const FeasibleSet& set, SplitMix64& rng) {
  Vec x = random_feasible_point(set, rng);
  if (map.kind() == MapKind::NegEntropy) {
    x = x.cwiseMax(1e-6);
    x /= x.sum();
  }
  return x;
}

}  // namespace

TEST_CASE("euclidean projection") {
  CHECK(euclid_project(FeasibleSet::simplex(3), vec({0.2, 0.3, 0.5})) == vec({0.2, 0.3, 0.5}));
  CHECK(euclid_project(FeasibleSet::nonneg(2), vec({-1, 2})) == vec({0, 2}));
  CHECK((euclid_project(FeasibleSet::simplex(2), vec({1, 1})) - vec({0.5, 0.5}))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK_THROWS_AS(euclid_project(FeasibleSet::l1_ball(1.0, 2), vec({0, 0})), UnsupportedPair);

  SECTION("idempotent and matches the brute-force oracle on the 2-simplex") {
    SplitMix64 rng(3);
    for (int k = 0; k < 40; ++k) {
      const Vec z = vec({4.0 * rng.normal(), 4.0 * rng.normal()});
      const Vec p = euclid_project(FeasibleSet::simplex(2), z);
      const Vec q = grid_project_simplex2(z);
      REQUIRE((p - q).cwiseAbs().maxCoeff() < 2e-6);
      REQUIRE((euclid_project(FeasibleSet::simplex(2), p) - p).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("mirror step closed forms") {
  SECTION("zero gradient fixes the iterate") {
    const Vec x = vec({0.5, 0.5});
    CHECK(mirror_step(MirrorMap::euclidean(2), FeasibleSet::nonneg(2), x, Vec::Zero(2), 1.0) == x);
    const Vec s = mirror_step(MirrorMap::neg_entropy(2), FeasibleSet::simplex(2), x, Vec::Zero(2), 1.0);
    CHECK((s - x).cwiseAbs().maxCoeff() < 1e-15);
    const Vec pn = mirror_step(MirrorMap::pnorm(1.5, 2), FeasibleSet::reals(2), x, Vec::Zero(2), 1.0);
    CHECK((pn - x).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("clipping step") {
    const Vec out =
        mirror_step(MirrorMap::euclidean(2), FeasibleSet::nonneg(2), vec({1, 1}), vec({3, -1}), 1.0);
    CHECK((out - vec({0, 2})).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("multiplicative update, renormalized by hand") {
    const Vec out = mirror_step(MirrorMap::neg_entropy(2), FeasibleSet::simplex(2), vec({0.5, 0.5}),
                                vec({std::log(2.0), 0.0}), 1.0);
    CHECK(out[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(out[1] == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SECTION("unsupported pairs fail loudly") {
    CHECK_THROWS_AS(mirror_step(MirrorMap::pnorm(1.5, 2), FeasibleSet::simplex(2),
                                vec({0.5, 0.5}), vec({1, 0}), 1.0),
                    UnsupportedPair);
    CHECK_THROWS_AS(mirror_step(MirrorMap::neg_entropy(2), FeasibleSet::nonneg(2), vec({0.5, 0.5}),
                                vec({1, 0}), 1.0),
                    UnsupportedPair);
  }
  SECTION("log-space entropic update agrees with direct evaluation at the switch") {
    const Vec x = vec({0.3, 0.7});
    const Vec g = vec({29.9, -29.9});  // just under the switch with eta = 1
    const Vec a = mirror_step(MirrorMap::neg_entropy(2), FeasibleSet::simplex(2), x, g, 1.0);
    const Vec b = mirror_step(MirrorMap::neg_entropy(2), FeasibleSet::simplex(2), x, g, 1.005);
    CHECK(FeasibleSet::simplex(2).contains(a));
    CHECK(FeasibleSet::simplex(2).contains(b));
    CHECK(std::abs(a[1] - b[1]) < 1e-3);  // continuous across the branch
  }
  SECTION("huge stepsizes stay finite through the log-space branch") {
    const Vec x = vec({0.5, 0.5});
    const Vec out =
        mirror_step(MirrorMap::neg_entropy(2), FeasibleSet::simplex(2), x, vec({1e5, -1e5}), 1.0);
    CHECK(out.allFinite());
    CHECK(FeasibleSet::simplex(2).contains(out));
    CHECK(out.minCoeff() >= 1e-300);
  }
}

TEST_CASE("mirror step first-order optimality certificate") {
  SplitMix64 rng(23);
  struct Pair {
    MirrorMap map;
    FeasibleSet set;
  };
  const std::vector<Pair> pairs = {
      {MirrorMap::euclidean(3), FeasibleSet::reals(3)},
      {MirrorMap::euclidean(3), FeasibleSet::nonneg(3)},
      {MirrorMap::euclidean(3), FeasibleSet::box(-0.5, 1.5, 3)},
      {MirrorMap::euclidean(3), FeasibleSet::simplex(3)},
      {MirrorMap::neg_entropy(3), FeasibleSet::simplex(3)},
      {MirrorMap::pnorm(1.5, 3), FeasibleSet::reals(3)},
      {MirrorMap::mahalanobis(
           (Mat(3, 3) << 2, 0.3, 0, 0.3, 1, 0, 0, 0, 3).finished()),
       FeasibleSet::reals(3)},
  };
  for (const auto& [map, set] : pairs) {
    for (int k = 0; k < 25; ++k) {
      const Vec x = random_interior_point(map, set, rng);
      Vec g(3);
      for (int j = 0; j < 3; ++j) g[j] = rng.normal();
      const double eta = 0.01 + rng.uniform();
      const Vec z = mirror_step(map, set, x, g, eta);
      REQUIRE(set.contains(z));
      const Vec lhs = eta * g + map.grad_map(z) - map.grad_map(x);
      for (int u = 0; u < 100; ++u) {
        const Vec cand = random_feasible_point(set, rng);
        REQUIRE(lhs.dot(cand - z) >= -1e-7);
      }
    }
  }
}

TEST_CASE("euclidean mirror step equals projected gradient") {
  SplitMix64 rng(29);
  const std::vector<FeasibleSet> sets = {FeasibleSet::reals(3), FeasibleSet::nonneg(3),
                                         FeasibleSet::box(0.0, 1.0, 3), FeasibleSet::simplex(3)};
  const auto map = MirrorMap::euclidean(3);
  for (const auto& set : sets) {
    for (int k = 0; k < 50; ++k) {
      const Vec x = random_feasible_point(set, rng);
      Vec g(3);
      for (int j = 0; j < 3; ++j) g[j] = rng.normal();
      const double eta = 0.5 * rng.uniform() + 0.01;
      const Vec a = mirror_step(map, set, x, g, eta);
      const Vec b = euclid_project(set, x - eta * g);
      REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("l1 lifting") {
  SECTION("symmetric interior point for the origin") {
    const Vec w = l1_lift(1.0, vec({0, 0}));
    CHECK((w - Vec::Constant(4, 0.25)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("corners map to single columns") {
    const Vec w = l1_lift(2.0, vec({2, 0}));
    CHECK((w - vec({1, 0, 0, 0})).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("lift reproduces the point and fills the simplex") {
    const LiftMatrix lift(1.0, 2);
    const Vec w = l1_lift(1.0, vec({0.5, 0}));
    CHECK(std::abs(w.sum() - 1.0) < 1e-15);
    CHECK((lift.apply(w) - vec({0.5, 0})).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("first corner and uniform unlift") {
    const LiftMatrix lift(3.0, 3);
    Vec w = Vec::Zero(6);
    w[0] = 1.0;
    CHECK((l1_unlift(lift, w) - vec({3, 0, 0})).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(l1_unlift(lift, Vec::Constant(6, 1.0 / 6.0)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("round trip over random ball points") {
    SplitMix64 rng(31);
    const LiftMatrix lift(2.5, 4);
    for (int k = 0; k < 500; ++k) {
      Vec x(4);
      for (int j = 0; j < 4; ++j) x[j] = rng.normal();
      const double n1 = x.lpNorm<1>();
      if (n1 > 2.5) x *= 2.5 * rng.uniform() / n1;
      const Vec back = l1_unlift(lift, l1_lift(2.5, x));
      REQUIRE((back - x).cwiseAbs().maxCoeff() <= 1e-12);
      REQUIRE(lift.apply(l1_lift(2.5, x)).lpNorm<1>() <= 2.5 + 1e-12);
    }
  }
  SECTION("infeasible starts are rejected") {
    CHECK_THROWS_AS(l1_lift(1.0, vec({2, 0})), InfeasibleStart);
    CHECK_THROWS_AS(l1_unlift(LiftMatrix(1.0, 1), vec({0.7, 0.7})), DomainError);
  }
}
