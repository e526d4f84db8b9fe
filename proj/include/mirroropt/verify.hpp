#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirroropt/analysis.hpp"
#include "mirroropt/config.hpp"
#include "mirroropt/csv.hpp"
#include "mirroropt/experiment.hpp"
#include "mirroropt/solver.hpp"
#include "mirroropt/version.hpp"

namespace mirroropt {

struct CriterionResult {
  std::string id;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& msg) {
    if (!cond) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << msg;
    }
  }
  void note(const std::string& msg) {
    if (detail.tellp() > 0) detail << "; ";
    detail << msg;
  }
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// Every recorded mean must sit under its bound plus Monte Carlo slack.
inline void check_domination(Check& c, const MonteCarloSummary& s, const std::vector<double>& mean,
                             const std::vector<double>& se, const BoundSpec& spec, bool geometric,
                             const std::string& label) {
  std::vector<long> ts;
  for (long t : s.t) ts.push_back(geometric ? t - 1 : t);
  const auto curve = bound_curve(spec, ts);
  double worst = -std::numeric_limits<double>::infinity();
  long worst_t = 0;
  for (size_t k = 0; k < s.t.size(); ++k) {
    const double slack = curve[k] + 3.0 * se[k] + 1e-12 - mean[k];
    if (-slack > worst) {
      worst = -slack;
      worst_t = s.t[k];
    }
  }
  c.require(worst <= 0.0, label + " violated at t=" + std::to_string(worst_t) + " by " + fmt(worst));
  if (worst <= 0.0) c.note(label + " holds (min slack " + fmt(-worst) + " at t=" + std::to_string(worst_t) + ")");
}

inline void check_preconds(Check& c, const BoundSpec& spec, const FiniteSumProblem& p,
                           const MirrorMap& map, const StepsizeRule& rule) {
  for (const auto& pr : check_preconditions(spec, p, map, rule))
    c.require(pr.holds, "precondition failed: " + pr.name + " (" + pr.detail + ")");
}

// f(x) = ‖x - s‖_1 + (gamma/2) ‖x - s‖_2^2, subgradient sign(x-s) + gamma (x-s)
// with sign(0) = 0; convex, non-smooth, minimized at s with value 0.
inline FiniteSumProblem l1_plus_quadratic(const Vec& s, double gamma) {
  const int d = static_cast<int>(s.size());
  Component comp;
  comp.value = [s, gamma](const Vec& x) {
    return (x - s).lpNorm<1>() + 0.5 * gamma * (x - s).squaredNorm();
  };
  comp.grad = [s, gamma](const Vec& x) {
    Vec g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double dj = x[j] - s[j];
      g[j] = (dj > 0.0 ? 1.0 : (dj < 0.0 ? -1.0 : 0.0)) + gamma * dj;
    }
    return g;
  };
  comp.inf_unconstrained = 0.0;
  comp.inf_constrained = [](const FeasibleSet&) { return 0.0; };
  comp.smoothness_L = kInf;  // not smooth
  FiniteSumProblem p{{comp}, FeasibleSet::reals(d), NormTag::l2(), d, s, 0.0};
  return p;
}

// Interpolating simplex family with the unique solution at the first vertex:
// f_i(x) = (1/2) <g_i, x>^2 with g_i zero on the first coordinate and
// strictly positive elsewhere.
inline FiniteSumProblem corner_simplex_family(int d, std::uint64_t seed, int n_comp = 12) {
  SplitMix64 rng(seed);
  Mat G(n_comp, d);
  for (int i = 0; i < n_comp; ++i) {
    G(i, 0) = 0.0;
    for (int j = 1; j < d; ++j) G(i, j) = 0.5 + rng.uniform();
  }
  Vec e1 = Vec::Zero(d);
  e1[0] = 1.0;
  return linear_system_problem(G, Vec::Zero(n_comp), FeasibleSet::simplex(d), NormTag::l2(), e1);
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------
// Property criteria: fast exact and sampled identities.

inline std::vector<CriterionResult> verify_properties() {
  using verify_detail::Check;
  using verify_detail::Timer;
  std::vector<CriterionResult> out;

  auto run = [&](const std::string& id, const std::string& name, auto&& body) {
    Timer timer;
    Check c;
    body(c);
    const double sec = timer.seconds();
    c.require(sec < 10.0, "runtime " + verify_detail::fmt(sec) + "s exceeds 10s");
    out.push_back({id, name, c.ok, c.detail.str(), sec});
  };

  auto maps4 = [] {
    Mat M = Mat::Identity(3, 3);
    M(0, 0) = 2.0;
    M(0, 1) = M(1, 0) = 0.3;
    M(2, 2) = 0.7;
    return std::vector<MirrorMap>{MirrorMap::euclidean(3), MirrorMap::pnorm(1.5, 3),
                                  MirrorMap::neg_entropy(3), MirrorMap::mahalanobis(M)};
  };
  auto interior = [](const MirrorMap& map, SplitMix64& rng) {
    Vec x(map.dim());
    if (map.kind() == MapKind::NegEntropy) {
      for (int j = 0; j < map.dim(); ++j) x[j] = 0.05 + rng.uniform();
      x /= x.sum();
    } else {
      for (int j = 0; j < map.dim(); ++j) x[j] = 2.0 * rng.normal();
    }
    return x;
  };

  run("p1", "three-point identity (1e-9, all maps)", [&](Check& c) {
    SplitMix64 rng(211);
    double worst = 0.0;
    for (const auto& map : maps4()) {
      for (int k = 0; k < 400; ++k) {
        const Vec x = interior(map, rng), y = interior(map, rng), z = interior(map, rng);
        const double lhs = map.bregman(z, x) + map.bregman(x, y) - map.bregman(z, y);
        const double rhs = (map.grad_map(y) - map.grad_map(x)).dot(z - x);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    c.require(worst < 1e-9, "worst residual " + verify_detail::fmt(worst));
    c.note("worst residual " + verify_detail::fmt(worst));
  });

  run("p2", "quadratic-loss divergence symmetry (1e-10)", [&](Check& c) {
    SplitMix64 rng(223);
    Mat A(6, 3);
    Vec b(6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
      b[i] = rng.normal();
    }
    const auto p = linear_system_problem(A, b, FeasibleSet::reals(3));
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
      Vec x(3), y(3);
      for (int j = 0; j < 3; ++j) {
        x[j] = 3.0 * rng.normal();
        y[j] = 3.0 * rng.normal();
      }
      for (const auto& comp : p.components) {
        const double fwd = comp.value(x) - comp.value(y) - comp.grad(y).dot(x - y);
        const double bwd = comp.value(y) - comp.value(x) - comp.grad(x).dot(y - x);
        worst = std::max(worst, std::abs(fwd - bwd) / std::max(1.0, std::abs(fwd)));
      }
    }
    c.require(worst < 1e-10, "worst asymmetry " + verify_detail::fmt(worst));
  });

  run("p3", "self-bounding gradient inequality (1e-9, 1e4 samples)", [&](Check& c) {
    SplitMix64 rng(227);
    Mat A(5, 2);
    Vec b(5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 2; ++j) A(i, j) = rng.normal();
      b[i] = rng.normal();
    }
    const auto lin = linear_system_problem(A, b, FeasibleSet::reals(2));
    Dataset ds;
    ds.features = Mat(4, 2);
    ds.labels = Vec(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 2; ++j) ds.features(i, j) = rng.normal();
      ds.labels[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    const auto lgp = logistic_problem(ds, FeasibleSet::reals(2));
    double worst = -kInf;
    for (int k = 0; k < 10000; ++k) {
      Vec x(2);
      x[0] = 4.0 * rng.normal();
      x[1] = 4.0 * rng.normal();
      for (const auto* p : {&lin, &lgp})
        for (const auto& comp : p->components) {
          const double lhs = dual_norm_sq(p->norm, comp.grad(x)) / (2.0 * comp.smoothness_L);
          worst = std::max(worst, lhs - (comp.value(x) - comp.inf_unconstrained));
        }
    }
    c.require(worst <= 1e-9, "worst violation " + verify_detail::fmt(worst));
    c.note("worst slack " + verify_detail::fmt(worst));
  });

  run("p4", "capped-polyak sandwich bounds on quadratic ensembles", [&](Check& c) {
    SplitMix64 rng(229);
    for (int trial = 0; trial < 100; ++trial) {
      const double a = 0.25 + 2.0 * rng.uniform();
      const double bq = rng.normal();
      const auto p = quad1d_problem({{a, bq, 0.0}}, FeasibleSet::reals(1));
      const double L = p.components[0].smoothness_L;
      const double cc = 0.5 + rng.uniform();
      const auto bounds = msps_bounds(cc, 1.0, L, 2.0 * a);
      auto rule = StepsizeRule::msps(cc);
      for (int k = 0; k < 30; ++k) {
        const Vec x = Vec::Constant(1, 3.0 * rng.normal());
        const double value = p.components[0].value(x);
        const double inf = p.components[0].inf_unconstrained;
        if (value - inf < 1e-3 * (1.0 + std::abs(value) + std::abs(inf))) continue;
        const Vec g = p.components[0].grad(x);
        const StepContext ctx{value, inf, g, 1.0, NormTag::l2(), 1};
        const double eta = stepsize(rule, ctx);
        c.require(eta >= bounds.lower - 1e-12, "below lower bound");
        c.require(eta <= bounds.upper + 1e-12, "above upper bound");
      }
    }
  });

  run("p5", "constrained neighborhood never exceeds the classic one (500 ensembles)",
      [&](Check& c) {
        SplitMix64 rng(233);
        for (int trial = 0; trial < 500; ++trial) {
          std::vector<QuadCoeffs> qs;
          const int n = 2 + static_cast<int>(rng.below(4));
          double asum = 0.0;
          for (int i = 0; i < n; ++i) {
            QuadCoeffs q{0.2 + 2.0 * rng.uniform(), 2.0 * rng.normal(), rng.normal()};
            asum += q.a;
            qs.push_back(q);
          }
          if (asum <= 0.0) continue;
          const auto p = quad1d_problem(qs, FeasibleSet::box(-1.0, 1.0, 1));
          const double s2 = sigma_sq(p);
          const double s2x = sigma_sq_constrained(p);
          c.require(s2x >= 0.0 && s2x <= s2 + 1e-12, "ordering violated");
        }
      });

  run("p6", "gradient map inversion (1e-9)", [&](Check& c) {
    SplitMix64 rng(239);
    double worst = 0.0;
    for (const auto& map : maps4()) {
      for (int k = 0; k < 400; ++k) {
        const Vec x = interior(map, rng);
        const Vec back = map.inverse_grad_map(map.grad_map(x));
        worst = std::max(worst,
                         (back - x).cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff()));
      }
    }
    c.require(worst < 1e-9, "worst relative error " + verify_detail::fmt(worst));
  });

  run("p7", "mirror step optimality certificate (slack 1e-7)", [&](Check& c) {
    SplitMix64 rng(241);
    Mat M(3, 3);
    M << 2, 0.3, 0, 0.3, 1, 0, 0, 0, 3;
    struct PairMS {
      MirrorMap map;
      FeasibleSet set;
    };
    const std::vector<PairMS> pairs = {
        {MirrorMap::euclidean(3), FeasibleSet::reals(3)},
        {MirrorMap::euclidean(3), FeasibleSet::nonneg(3)},
        {MirrorMap::euclidean(3), FeasibleSet::box(-0.5, 1.5, 3)},
        {MirrorMap::euclidean(3), FeasibleSet::simplex(3)},
        {MirrorMap::neg_entropy(3), FeasibleSet::simplex(3)},
        {MirrorMap::pnorm(1.5, 3), FeasibleSet::reals(3)},
        {MirrorMap::mahalanobis(M), FeasibleSet::reals(3)},
    };
    double worst = kInf;
    for (const auto& [map, set] : pairs) {
      for (int k = 0; k < 30; ++k) {
        Vec x = detail::sample_feasible(set, rng);
        if (map.kind() == MapKind::NegEntropy) {
          x = x.cwiseMax(1e-6);
          x /= x.sum();
        }
        Vec g(3);
        for (int j = 0; j < 3; ++j) g[j] = rng.normal();
        const double eta = 0.01 + rng.uniform();
        const Vec z = mirror_step(map, set, x, g, eta);
        c.require(set.contains(z), "step left the feasible set");
        const Vec lhs = eta * g + map.grad_map(z) - map.grad_map(x);
        for (int u = 0; u < 100; ++u) {
          const Vec cand = detail::sample_feasible(set, rng);
          worst = std::min(worst, lhs.dot(cand - z));
        }
      }
    }
    c.require(worst >= -1e-7, "worst certificate " + verify_detail::fmt(worst));
    c.note("worst certificate " + verify_detail::fmt(worst));
  });

  run("p8", "l1 lift round trip (1e-12)", [&](Check& c) {
    SplitMix64 rng(251);
    const LiftMatrix lift(1.7, 5);
    for (int k = 0; k < 1000; ++k) {
      Vec x(5);
      for (int j = 0; j < 5; ++j) x[j] = rng.normal();
      const double n1 = x.lpNorm<1>();
      if (n1 > 1.7) x *= 1.7 * rng.uniform() / n1;
      const Vec back = l1_unlift(lift, l1_lift(1.7, x));
      c.require((back - x).cwiseAbs().maxCoeff() <= 1e-12, "round trip drift");
    }
  });

  run("p9", "gradients match finite differences (1e-5 relative)", [&](Check& c) {
    SplitMix64 rng(257);
    const auto quad = quad1d_problem({{1.5, -0.7, 0.2}, {0.4, 1.1, -0.3}}, FeasibleSet::reals(1));
    Dataset ds;
    ds.features = Mat(3, 3);
    ds.labels = Vec(3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) ds.features(i, j) = rng.normal();
      ds.labels[i] = i % 2 == 0 ? 1.0 : -1.0;
    }
    const auto lgp = logistic_problem(ds, FeasibleSet::reals(3));
    const double h = 1e-6;
    for (const FiniteSumProblem* p : {&quad, &lgp}) {
      for (int k = 0; k < 60; ++k) {
        Vec x(p->dim);
        for (int j = 0; j < p->dim; ++j) x[j] = rng.normal();
        for (const auto& comp : p->components) {
          const Vec g = comp.grad(x);
          for (int j = 0; j < p->dim; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const double fd = (comp.value(xp) - comp.value(xm)) / (2.0 * h);
            c.require(std::abs(fd - g[j]) <= 1e-5 * std::max(1.0, std::abs(g[j])),
                      "finite-difference mismatch");
          }
        }
      }
    }
  });

  return out;
}

// ---------------------------------------------------------------------------
// Guarantee criteria: bound domination and rate measurements.

// Linear rate of SPGD with eta = 1/L on a box-constrained quadratic ensemble
// mixing strongly convex and non-convex members under constrained
// interpolation.
inline CriterionResult verify_linear_rate_const_step() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  const std::vector<QuadCoeffs> coeffs = {{1.0, 0.05, 0.0}, {0.6, 0.08, 0.0}, {0.7, 0.06, 0.0},
                                          {0.8, 0.10, 0.0}, {-0.2, 0.45, 0.0}, {0.5, 0.07, 0.0}};
  const auto problem = quad1d_problem(coeffs, FeasibleSet::box(0.0, 1.0, 1));
  c.require(sigma_sq_constrained(problem) <= 1e-15, "instance is not constrained-interpolating");
  c.require(sigma_sq(problem) > 1.0, "classic neighborhood should be large");

  double abar = 0.0, amax = 0.0;
  for (const auto& q : coeffs) {
    abar += q.a;
    amax = std::max(amax, std::abs(q.a));
  }
  abar /= static_cast<double>(coeffs.size());
  const double L = 2.0 * amax;  // relative smoothness of every member
  const double mu = 2.0 * abar;
  const double eta = 1.0 / L;

  const auto map = MirrorMap::euclidean(1);
  const auto rule = StepsizeRule::constant(eta);
  BoundSpec spec;
  spec.kind = BoundKind::RelStrongConst;
  spec.mu = mu;
  spec.L = L;
  spec.eta = eta;
  spec.B1 = map.bregman(*problem.known_xstar, Vec::Constant(1, 1.0));
  spec.sigma_sq_X = 0.0;
  verify_detail::check_preconds(c, spec, problem, map, rule);

  RunConfig cfg{map, problem.set, rule, 200, 20240, Vec::Constant(1, 1.0)};
  cfg.xstar_for_metrics = problem.known_xstar;
  const auto summary = monte_carlo(problem, cfg, 10000);
  verify_detail::check_domination(c, summary, summary.bpsi_mean, summary.bpsi_se, spec, true,
                                  "divergence bound");

  const auto fit = fit_linear_rate(summary, "bpsi", 1, 26);
  const double rate = 1.0 - mu * eta;
  c.require(fit.decay_per_step <= rate + 0.02,
            "fitted decay " + verify_detail::fmt(fit.decay_per_step) + " exceeds " +
                verify_detail::fmt(rate + 0.02));
  c.note("decay " + verify_detail::fmt(fit.decay_per_step) + " vs rate " + verify_detail::fmt(rate));

  const double sec = timer.seconds();
  c.require(sec < 60.0, "runtime above 60s");
  return {"c01", "linear rate, constant step, mixed convexity on a box", c.ok, c.detail.str(), sec};
}

// Averaged-divergence rate of the entropic update on the stationary
// distribution problem, at unit stepsize.
inline CriterionResult verify_markov_entropic_rate() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  const Mat P = detail::random_stochastic_matrix(5, 11);
  const auto problem = markov_problem(P);
  c.require(sigma_sq_constrained(problem) <= 1e-15, "markov instance must interpolate");

  const auto map = MirrorMap::neg_entropy(5);
  const auto rule = StepsizeRule::constant(1.0);
  const Vec x1 = Vec::Constant(5, 0.2);
  const Vec xs = *problem.known_xstar;

  BoundSpec spec;
  spec.kind = BoundKind::RelSmoothConst;
  spec.L = 1.0;
  spec.eta = 1.0;
  spec.B1 = map.bregman(xs, x1);
  spec.sigma_sq_X = 0.0;
  verify_detail::check_preconds(c, spec, problem, map, rule);

  RunConfig cfg{map, problem.set, rule, 2000, 31337, x1};
  cfg.xstar_for_metrics = xs;
  cfg.track_running_bf = true;
  const auto summary = monte_carlo(problem, cfg, 2000);
  verify_detail::check_domination(c, summary, summary.bf_avg_mean, summary.bf_avg_se, spec, false,
                                  "averaged divergence bound");

  double residual = 0.0;
  for (const auto& x : summary.final_xs) residual += (P.transpose() * x - x).lpNorm<1>();
  residual /= static_cast<double>(summary.final_xs.size());
  c.require(residual <= 1e-2, "mean stationarity residual " + verify_detail::fmt(residual));
  c.note("mean final residual " + verify_detail::fmt(residual));

  const auto fit = fit_sublinear_rate(summary, "favg_gap", 50, 2001);
  c.require(fit.exponent <= -0.8,
            "averaged-gap exponent " + verify_detail::fmt(fit.exponent) + " above -0.8");
  c.note("averaged-gap exponent " + verify_detail::fmt(fit.exponent));

  const double sec = timer.seconds();
  c.require(sec < 120.0, "runtime above 120s");
  return {"c02", "entropic update on a random chain: averaged divergence rate", c.ok,
          c.detail.str(), sec};
}

// Linear rate of the capped stochastic Polyak stepsize (c = 1/2) on a
// strongly convex interpolating least-squares system, plus exact convergence
// of the uncapped rule.
inline CriterionResult verify_strong_polyak_max() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  const auto [A, x0] = detail::random_interpolating_system(8, 5, 5);
  Vec b(8);
  for (int i = 0; i < 8; ++i) b[i] = Vec(A.row(i).transpose()).dot(x0);
  const auto problem = linear_system_problem(A, b, FeasibleSet::reals(5), NormTag::l2(), x0);
  c.require(sigma_sq(problem) <= 1e-28, "system must interpolate exactly");

  const double L_max = problem.max_smoothness();
  Eigen::SelfAdjointEigenSolver<Mat> es(A.transpose() * A / 8.0);
  const double mu = es.eigenvalues().minCoeff();
  c.require(mu > 0.0, "system must be strongly convex");

  const auto map = MirrorMap::euclidean(5);
  const double eta_b = 1.0 / L_max;
  const auto rule = StepsizeRule::msps_max(0.5, eta_b);
  const double alpha = alpha_constant(0.5, 1.0, L_max, eta_b);

  BoundSpec spec;
  spec.kind = BoundKind::RelStrongPolyakMax;
  spec.mu = mu;
  spec.L = L_max;
  spec.alpha = alpha;
  spec.eta_b = eta_b;
  spec.B1 = map.bregman(x0, Vec::Zero(5));
  spec.sigma_sq = 0.0;
  verify_detail::check_preconds(c, spec, problem, map, rule);

  RunConfig cfg{map, problem.set, rule, 600, 977, Vec::Zero(5)};
  cfg.xstar_for_metrics = x0;
  const auto summary = monte_carlo(problem, cfg, 2000);
  verify_detail::check_domination(c, summary, summary.bpsi_mean, summary.bpsi_se, spec, true,
                                  "divergence bound");

  // without the cap, interpolation gives exact convergence
  RunConfig un{map, problem.set, StepsizeRule::msps(0.5), 5000, 978, Vec::Zero(5)};
  un.xstar_for_metrics = x0;
  un.record_every = 5000;
  const Trajectory traj = run_smd(problem, un);
  const double final_gap = traj.records.back().f_gap;
  c.require(final_gap <= 1e-8, "uncapped run final gap " + verify_detail::fmt(final_gap));
  c.note("uncapped final gap " + verify_detail::fmt(final_gap));

  return {"c03", "capped stochastic Polyak (c=1/2) on a strongly convex system", c.ok,
          c.detail.str(), timer.seconds()};
}

// Averaged-iterate rate of the capped stochastic Polyak stepsize (c = 1) on
// separable kernel-free logistic regression.
inline CriterionResult verify_convex_polyak_max_logistic() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  const Dataset ds = synth_margin_dataset(1000, 20, 0.05, 7);
  auto problem = logistic_problem(ds, FeasibleSet::reals(20));
  const double L_max = problem.max_smoothness();  // measured from the data

  // surrogate reference point from a long full-gradient Polyak solve; the
  // losses themselves have infimum 0
  RunConfig ref{MirrorMap::euclidean(20), FeasibleSet::reals(20), StepsizeRule::mirror_polyak(0.0),
                8000, 1, Vec::Zero(20)};
  ref.record_every = 8000;
  const Trajectory rtraj = run_deterministic_md(problem, ref);
  const Vec xs = rtraj.final_x;
  problem.known_xstar = xs;
  problem.known_fstar = 0.0;  // losses are driven to their common infimum
  const double f_ref = problem.value(xs);
  c.note("surrogate reference value " + verify_detail::fmt(f_ref));

  const auto map = MirrorMap::euclidean(20);
  const double eta_b = 1.0;
  const auto rule = StepsizeRule::msps_max(1.0, eta_b);
  const double alpha = alpha_constant(1.0, 1.0, L_max, eta_b);

  BoundSpec spec;
  spec.kind = BoundKind::ConvexPolyakMax;
  spec.L = L_max;
  spec.alpha = alpha;
  spec.eta_b = eta_b;
  spec.B1 = map.bregman(xs, Vec::Zero(20));
  spec.sigma_sq = 0.0;  // interpolating by the margin construction
  verify_detail::check_preconds(c, spec, problem, map, rule);

  RunConfig cfg{map, problem.set, rule, 2000, 4242, Vec::Zero(20)};
  cfg.xstar_for_metrics = xs;
  cfg.record_every = 10;
  const auto summary = monte_carlo(problem, cfg, 200);
  verify_detail::check_domination(c, summary, summary.favg_gap_mean, summary.favg_gap_se, spec,
                                  false, "averaged-gap bound");

  const auto fit = fit_sublinear_rate(summary, "favg_gap", 100, 2001);
  c.require(fit.exponent <= -0.8,
            "averaged-gap exponent " + verify_detail::fmt(fit.exponent) + " above -0.8");
  c.note("averaged-gap exponent " + verify_detail::fmt(fit.exponent));

  return {"c04", "capped stochastic Polyak (c=1) on separable logistic regression", c.ok,
          c.detail.str(), timer.seconds()};
}

// Deterministic Polyak stepsize on a non-smooth objective: per-step Bregman
// monotonicity and the 1/sqrt(t) averaged-iterate bound, pointwise.
inline CriterionResult verify_nonsmooth_polyak() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  Vec s(4);
  s << 0.3, -0.2, 0.5, -0.4;
  const auto problem = verify_detail::l1_plus_quadratic(s, 1.0);

  for (const auto& map : {MirrorMap::euclidean(4), MirrorMap::pnorm(1.5, 4)}) {
    RunConfig cfg{map, FeasibleSet::reals(4), StepsizeRule::mirror_polyak(0.0), 10000, 0,
                  Vec::Ones(4)};
    cfg.xstar_for_metrics = s;
    const Trajectory traj = run_deterministic_md(problem, cfg);

    double worst_mono = -kInf;
    for (size_t k = 1; k < traj.records.size(); ++k)
      worst_mono = std::max(worst_mono, traj.records[k].bpsi - traj.records[k - 1].bpsi);
    c.require(worst_mono <= 1e-10,
              map.describe() + ": monotonicity violated by " + verify_detail::fmt(worst_mono));

    BoundSpec spec;
    spec.kind = BoundKind::NonSmoothPolyak;
    spec.G = traj.max_dual_grad_norm;
    spec.B1 = map.bregman(s, Vec::Ones(4));
    spec.mu_psi = map.mu_psi();
    verify_detail::check_preconds(c, spec, problem, map, StepsizeRule::mirror_polyak(0.0));

    std::vector<long> ts;
    for (const auto& rec : traj.records) ts.push_back(rec.t);
    const auto curve = bound_curve(spec, ts);
    double worst = -kInf;
    for (size_t k = 0; k < traj.records.size(); ++k)
      worst = std::max(worst, traj.records[k].f_avg_gap - curve[k] - 1e-9);
    c.require(worst <= 0.0,
              map.describe() + ": averaged bound violated by " + verify_detail::fmt(worst));
    c.note(map.describe() + " ok (G=" + verify_detail::fmt(spec.G) + ")");
  }

  return {"c05", "non-smooth deterministic Polyak: monotone divergence and 1/sqrt(t) average",
          c.ok, c.detail.str(), timer.seconds()};
}

// Preconditioned stochastic Polyak under the PL condition on a quadratic
// with diagonal preconditioner.
inline CriterionResult verify_pl_preconditioned() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  SplitMix64 rng(301);
  const int d = 6, n = 16;
  Mat A(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) A(i, j) = 0.05 * rng.normal();
    A(i, i % d) += 1.0 + 0.3 * rng.uniform();
  }
  const Mat Q = A.transpose() * A / static_cast<double>(n);
  const Mat M = Q.diagonal().asDiagonal();

  auto mdata = std::make_shared<const MahalanobisData>(M);
  const auto norm = NormTag::mahalanobis(mdata);
  const auto problem =
      linear_system_problem(A, Vec::Zero(n), FeasibleSet::reals(d), norm, Vec::Zero(d));
  c.require(sigma_sq(problem) == 0.0, "zero right-hand side must interpolate");

  const double L_max = problem.max_smoothness();
  const Mat Dih = M.diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(Dih * Q * Dih);
  const double mu_pl = es.eigenvalues().minCoeff();
  c.require(mu_pl > 0.0, "PL constant must be positive");

  const double cc = std::max(1.0, 1.5 * L_max / (4.0 * mu_pl));
  const double eta_b = 0.9 / (2.0 * cc * L_max);
  const auto pc = pl_constants(cc, 1.0, L_max, mu_pl, eta_b);
  c.require(pc.valid, "constants fall outside the admissible region");
  c.require(pc.nu > 0.0 && pc.nu < 1.0, "nu outside (0,1)");
  c.note("nu = " + verify_detail::fmt(pc.nu) + ", c = " + verify_detail::fmt(cc));

  const auto map = MirrorMap::mahalanobis(M);
  const auto rule = StepsizeRule::msps_max(cc, eta_b);
  const Vec x1 = Vec::Ones(d);

  BoundSpec spec;
  spec.kind = BoundKind::PLPrecond;
  spec.mu = mu_pl;
  spec.L = L_max;
  spec.L_max = L_max;
  spec.c = cc;
  spec.eta_b = eta_b;
  spec.nu = pc.nu;
  spec.sigma_sq = 0.0;
  spec.f1_gap = problem.value(x1);
  verify_detail::check_preconds(c, spec, problem, map, rule);

  RunConfig cfg{map, problem.set, rule, 600, 515, x1};
  cfg.xstar_for_metrics = problem.known_xstar;
  const auto summary = monte_carlo(problem, cfg, 2000);
  verify_detail::check_domination(c, summary, summary.f_gap_mean, summary.f_gap_se, spec, true,
                                  "PL gap bound");

  return {"c06", "preconditioned stochastic Polyak under the PL condition", c.ok, c.detail.str(),
          timer.seconds()};
}

// Boundary instances where the constrained neighborhood vanishes while the
// classic ones do not, with exact convergence.
inline CriterionResult verify_neighborhood_discrimination() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  {  // nonnegative orthant instance
    const auto p = quad1d_problem(discriminating_nonneg_coeffs(), FeasibleSet::nonneg(1));
    const double s2 = sigma_sq(p);
    const double s2x = sigma_sq_constrained(p);
    const double g2 = mean_grad_norm_sq_at(p, *p.known_xstar);
    c.require(s2x <= 1e-12, "constrained neighborhood should vanish");
    c.require(std::isfinite(s2) && s2 > 0.1, "classic neighborhood should be positive");
    c.require(g2 > 0.1, "gradient variance at the optimum should be positive");
    c.note("nonneg: sigma_sq=" + verify_detail::fmt(s2) + ", grad^2=" + verify_detail::fmt(g2));

    const double L = 2.0 * 2.0;  // max 2|a|
    RunConfig cfg{MirrorMap::euclidean(1), p.set, StepsizeRule::constant(1.0 / L), 300, 51,
                  Vec::Ones(1)};
    cfg.xstar_for_metrics = p.known_xstar;
    cfg.record_every = 300;
    const Trajectory traj = run_smd(p, cfg);
    c.require(traj.records.back().f_gap <= 1e-8,
              "nonneg instance gap " + verify_detail::fmt(traj.records.back().f_gap));
    const auto rep = interpolation_check(p, *p.known_xstar, 1e-8);
    c.require(rep.sigma_x_zero && rep.xstar_in_all_component_minima,
              "interpolation equivalence flags disagree");
  }

  {  // box instance with a non-convex member
    const auto p = quad1d_problem(discriminating_box_coeffs(), FeasibleSet::box(0.0, 1.0, 1));
    c.require(sigma_sq(p) == kInf, "classic neighborhood should be infinite");
    c.require(sigma_sq_constrained(p) <= 1e-12, "constrained neighborhood should vanish");

    const double L = 2.0 * 1.5;
    RunConfig cfg{MirrorMap::euclidean(1), p.set, StepsizeRule::constant(1.0 / L), 400, 53,
                  Vec::Constant(1, 0.9)};
    cfg.xstar_for_metrics = p.known_xstar;
    cfg.record_every = 400;
    const Trajectory traj = run_smd(p, cfg);
    c.require(traj.records.back().f_gap <= 1e-8,
              "box instance gap " + verify_detail::fmt(traj.records.back().f_gap));
    c.note("box: sigma_sq=inf, sigma_sq_X=0, converged");
  }

  return {"c08", "constrained neighborhood separates from the classic ones", c.ok, c.detail.str(),
          timer.seconds()};
}

// Entropic vs Euclidean geometry on interpolating simplex problems of
// growing dimension: the iteration-count ratio should grow with d.
inline CriterionResult verify_dimension_scaling() {
  verify_detail::Timer timer;
  verify_detail::Check c;

  const std::vector<int> dims = {8, 16, 32, 64, 128, 256};
  const auto rows = dimension_scaling(
      dims, [](int d) { return verify_detail::corner_simplex_family(d, 900 + d); }, 1e-5, 400000,
      606, 3);

  std::ostringstream table;
  int nondecreasing = 0;
  for (size_t k = 0; k < rows.size(); ++k) {
    c.require(rows[k].iters_eg > 0, "entropic run exhausted its budget at d=" +
                                        std::to_string(rows[k].d));
    c.require(rows[k].iters_spgd > 0,
              "euclidean run exhausted its budget at d=" + std::to_string(rows[k].d));
    table << (k ? " " : "") << rows[k].d << ":" << verify_detail::fmt(rows[k].ratio);
    if (k > 0 && rows[k].ratio >= rows[k - 1].ratio * (1.0 - 1e-9)) ++nondecreasing;
  }
  c.require(nondecreasing >= 4, "ratio nondecreasing in only " + std::to_string(nondecreasing) +
                                    " of 5 doublings");
  c.note("ratios " + table.str());

  return {"c09", "iteration-count ratio grows with dimension on the simplex", c.ok, c.detail.str(),
          timer.seconds()};
}

// Byte-identical CSV outputs for identical config and seed.
inline CriterionResult verify_determinism(const std::string& out_dir) {
  verify_detail::Timer timer;
  verify_detail::Check c;
  namespace fs = std::filesystem;

  ExperimentConfig cfg = parse_config(
      "[problem]\nkind = markov\nmarkov_m = 5\nmarkov_seed = 11\n[map]\nkind = "
      "negentropy\n[set]\nkind = simplex\n[rules]\nrule = constant 1.0\nrule = msps 1.0\n"
      "[run]\niterations = 500\nreplicates = 100\nrecord_every = 1\nseed = 42\n");
  const std::string d1 = out_dir + "/determinism_a";
  const std::string d2 = out_dir + "/determinism_b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  run_experiment(cfg, d1, true);
  run_experiment(cfg, d2, true);

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(d1)) {
    const std::string name = entry.path().filename().string();
    const std::string a = slurp(d1 + "/" + name);
    const std::string b = slurp(d2 + "/" + name);
    c.require(!a.empty(), name + " empty");
    c.require(a == b, name + " differs between runs");
    ++compared;
  }
  c.require(compared >= 3, "expected at least two CSVs and a manifest");
  c.note(std::to_string(compared) + " files byte-identical");

  return {"c10", "identical config and seed give byte-identical outputs", c.ok, c.detail.str(),
          timer.seconds()};
}

// Decay-curve data for the boxed quadratic ensemble, in plot-ready CSV form.
inline CriterionResult verify_figure_data(const std::string& out_dir) {
  verify_detail::Timer timer;
  verify_detail::Check c;
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // refuse to overwrite results produced by a different library version
  const std::string mpath = out_dir + "/figure_manifest.json";
  if (fs::exists(mpath)) {
    std::ifstream min(mpath);
    nlohmann::json m;
    min >> m;
    if (m.value("version", "") != std::string(kVersion)) {
      c.require(false, "stale manifest in " + out_dir + " (version " + m.value("version", "?") +
                           "); remove it or pick a fresh directory");
      return {"fig", "decay-curve data emission", c.ok, c.detail.str(), timer.seconds()};
    }
  }

  ExperimentConfig cfg = parse_config(
      "[problem]\nkind = quad1d\ncoeffs = 1,0.05,0 ; 0.6,0.08,0 ; 0.7,0.06,0 ; 0.8,0.1,0 ; "
      "-0.2,0.45,0 ; 0.5,0.07,0\n[set]\nkind = box\nlo = 0\nhi = 1\n[rules]\nrule = constant "
      "0.5\n[run]\niterations = 200\nreplicates = 2000\nrecord_every = 1\nseed = 20240\nx_init = "
      "1.0\n");
  run_experiment(cfg, out_dir, true);
  c.require(fs::exists(out_dir + "/constant_0.5.csv"), "trajectory CSV missing");
  c.require(fs::exists(out_dir + "/bounds_constant_0.5_rel_strong_const.csv"), "bound CSV missing");

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config_digest"] = cfg.digest();
  std::ofstream mout(mpath);
  mout << manifest.dump(2) << "\n";
  c.note("decay curves written to " + out_dir);

  return {"fig", "decay-curve data emission", c.ok, c.detail.str(), timer.seconds()};
}

inline std::vector<CriterionResult> verify_theorems() {
  return {verify_linear_rate_const_step(), verify_markov_entropic_rate(), verify_strong_polyak_max(),
          verify_convex_polyak_max_logistic(), verify_nonsmooth_polyak(),
          verify_pl_preconditioned()};
}

inline std::vector<CriterionResult> verify_figures(const std::string& out_dir) {
  return {verify_neighborhood_discrimination(), verify_dimension_scaling(),
          verify_determinism(out_dir), verify_figure_data(out_dir)};
}

// cmd_verify: run a suite, print one pass/fail line per criterion, exit 0
// iff everything passed.
inline int run_verify(const std::string& suite, const std::string& out_dir, bool quiet = false) {
  std::vector<CriterionResult> results;
  if (suite == "properties" || suite == "all") {
    const auto r = verify_properties();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "theorems" || suite == "all") {
    const auto r = verify_theorems();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "figures" || suite == "all") {
    const auto r = verify_figures(out_dir);
    results.insert(results.end(), r.begin(), r.end());
  }
  if (results.empty()) {
    std::cerr << "unknown suite '" << suite << "' (use properties, theorems, figures, or all)\n";
    return 2;
  }

  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    std::cout << "[" << r.id << "] " << (r.pass ? "PASS" : "FAIL") << " " << r.name;
    if (!quiet && !r.detail.empty()) std::cout << " -- " << r.detail;
    std::cout << " (" << verify_detail::fmt(r.seconds) << "s)\n";
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace mirroropt
