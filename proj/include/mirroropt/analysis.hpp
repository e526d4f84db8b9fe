#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mirroropt/errors.hpp"
#include "mirroropt/problems.hpp"
#include "mirroropt/solver.hpp"
#include "mirroropt/stepsizes.hpp"

namespace mirroropt {

// The convergence guarantees this library can evaluate alongside a run.
//   RelStrongConst   : E B_psi(x*;x_{t+1}) <= (1-mu eta)^t B1 + sigma_X^2/mu
//   RelSmoothConst   : E (1/t) sum_s B_f(x*;x_s) <= B1/(eta t) + sigma_X^2
//   RelStrongPolyakMax: E B_psi(x*;x_{t+1}) <= (1-mu alpha)^t B1 + eta_b sigma^2/(alpha mu)
//   ConvexPolyakMax  : E f(xbar_t) - f* <= 2 B1/(alpha t) + 2 eta_b sigma^2/alpha
//   ConvexConstSmooth: E f(xbar_t) - f* <= 2 B1/(eta t) + 2 sigma^2
//   NonSmoothPolyak  : f(xbar_t) - f* <= G sqrt(2 B1 / (mu_psi t))
//   PLPrecond        : E f(x_{t+1}) - f* <= nu^t (f(x_1)-f*) + L sigma^2 eta_b / (2(1-nu) c)
enum class BoundKind {
  RelStrongConst,
  RelSmoothConst,
  RelStrongPolyakMax,
  ConvexPolyakMax,
  ConvexConstSmooth,
  NonSmoothPolyak,
  PLPrecond,
};

inline constexpr double kUnsetConst = std::numeric_limits<double>::quiet_NaN();

struct BoundSpec {
  BoundKind kind = BoundKind::RelStrongConst;
  double mu = kUnsetConst;        // relative strong convexity / PL constant
  double L = kUnsetConst;         // (relative) smoothness
  double L_max = kUnsetConst;
  double mu_psi = kUnsetConst;
  double c = kUnsetConst;
  double eta = kUnsetConst;
  double eta_b = kUnsetConst;
  double alpha = kUnsetConst;
  double nu = kUnsetConst;
  double G = kUnsetConst;
  double sigma_sq = kUnsetConst;
  double sigma_sq_X = kUnsetConst;
  double B1 = kUnsetConst;      // B_psi(x_*; x_1)
  double f1_gap = kUnsetConst;  // f(x_1) - f(x_*)
};

namespace detail {

inline void require_consts(const BoundSpec& s, std::initializer_list<const double*> vals,
                           const char* kind) {
  for (const double* v : vals)
    if (std::isnan(*v)) throw IncompleteSpec(std::string("bound_curve: missing constant for ") + kind);
}

}  // namespace detail

// Right-hand side of the guarantee at each t. t counts steps for the
// geometric bounds (t=0 is the initial point) and averaged iterates for the
// sublinear ones (t >= 1).
inline std::vector<double> bound_curve(const BoundSpec& s, const std::vector<long>& t_values) {
  std::vector<double> out;
  out.reserve(t_values.size());
  switch (s.kind) {
    case BoundKind::RelStrongConst:
      detail::require_consts(s, {&s.mu, &s.eta, &s.B1, &s.sigma_sq_X}, "RelStrongConst");
      for (long t : t_values)
        out.push_back(std::pow(1.0 - s.mu * s.eta, static_cast<double>(t)) * s.B1 +
                      s.sigma_sq_X / s.mu);
      return out;
    case BoundKind::RelSmoothConst:
      detail::require_consts(s, {&s.eta, &s.B1, &s.sigma_sq_X}, "RelSmoothConst");
      for (long t : t_values)
        out.push_back(s.B1 / (s.eta * static_cast<double>(t)) + s.sigma_sq_X);
      return out;
    case BoundKind::RelStrongPolyakMax:
      detail::require_consts(s, {&s.mu, &s.alpha, &s.eta_b, &s.B1, &s.sigma_sq}, "RelStrongPolyakMax");
      for (long t : t_values)
        out.push_back(std::pow(1.0 - s.mu * s.alpha, static_cast<double>(t)) * s.B1 +
                      s.eta_b * s.sigma_sq / (s.alpha * s.mu));
      return out;
    case BoundKind::ConvexPolyakMax:
      detail::require_consts(s, {&s.alpha, &s.eta_b, &s.B1, &s.sigma_sq}, "ConvexPolyakMax");
      for (long t : t_values)
        out.push_back(2.0 * s.B1 / (s.alpha * static_cast<double>(t)) +
                      2.0 * s.eta_b * s.sigma_sq / s.alpha);
      return out;
    case BoundKind::ConvexConstSmooth:
      detail::require_consts(s, {&s.eta, &s.B1, &s.sigma_sq}, "ConvexConstSmooth");
      for (long t : t_values)
        out.push_back(2.0 * s.B1 / (s.eta * static_cast<double>(t)) + 2.0 * s.sigma_sq);
      return out;
    case BoundKind::NonSmoothPolyak:
      detail::require_consts(s, {&s.G, &s.B1, &s.mu_psi}, "NonSmoothPolyak");
      for (long t : t_values)
        out.push_back(s.G * std::sqrt(2.0 * s.B1 / (s.mu_psi * static_cast<double>(t))));
      return out;
    case BoundKind::PLPrecond:
      detail::require_consts(s, {&s.nu, &s.f1_gap, &s.L, &s.sigma_sq, &s.eta_b, &s.c}, "PLPrecond");
      for (long t : t_values)
        out.push_back(std::pow(s.nu, static_cast<double>(t)) * s.f1_gap +
                      s.L * s.sigma_sq * s.eta_b / (2.0 * (1.0 - s.nu) * s.c));
      return out;
  }
  throw IncompleteSpec("bound_curve: unknown kind");
}

struct PreconditionResult {
  std::string name;
  bool holds = false;
  std::string detail;
};

namespace detail {

inline Vec sample_feasible(const FeasibleSet& set, SplitMix64& rng) {
  const int d = set.dim();
  switch (set.kind()) {
    case SetKind::Reals: {
      Vec x(d);
      for (int j = 0; j < d; ++j) x[j] = 2.0 * rng.normal();
      return x;
    }
    case SetKind::NonNeg: {
      Vec x(d);
      for (int j = 0; j < d; ++j) x[j] = std::abs(2.0 * rng.normal());
      return x;
    }
    default: return random_feasible(set, rng, std::nullopt);
  }
}

// map-interior feasible point (strictly positive for neg-entropy)
inline Vec sample_interior(const FeasibleSet& set, const MirrorMap& map, SplitMix64& rng) {
  Vec x = sample_feasible(set, rng);
  if (map.kind() == MapKind::NegEntropy) {
    x = x.cwiseMax(1e-9);
    if (set.kind() == SetKind::Simplex) x /= x.sum();
  }
  return x;
}

}  // namespace detail

// Machine-checkable hypotheses of a guarantee against a concrete problem,
// map, and rule. Sampled curvature checks are falsification tests: they can
// reject a constant, not certify it.
inline std::vector<PreconditionResult> check_preconditions(const BoundSpec& spec,
                                                           const FiniteSumProblem& problem,
                                                           const MirrorMap& map,
                                                           const StepsizeRule& rule,
                                                           std::uint64_t seed = 12345,
                                                           int samples = 200) {
  std::vector<PreconditionResult> out;
  SplitMix64 rng(seed);
  auto push = [&](std::string name, bool holds, std::string det) {
    out.push_back({std::move(name), holds, std::move(det)});
  };
  const double tol = 1e-9;

  auto sampled_rel_smooth = [&](double L) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      const Vec x = detail::sample_interior(problem.set, map, rng);
      const Vec y = detail::sample_interior(problem.set, map, rng);
      const double bp = map.bregman(x, y);
      for (const auto& comp : problem.components) {
        const double bf = comp.value(x) - comp.value(y) - comp.grad(y).dot(x - y);
        worst = std::max(worst, bf - L * bp);
      }
    }
    return worst;
  };
  auto sampled_rel_strong = [&](double mu) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      const Vec x = detail::sample_interior(problem.set, map, rng);
      const Vec y = detail::sample_interior(problem.set, map, rng);
      worst = std::max(worst, mu * map.bregman(x, y) - problem.bregman_f(x, y));
    }
    return worst;
  };
  auto sampled_smooth_norm = [&](double L) {
    const NormTag primal = map.primal_norm();
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      const Vec x = detail::sample_interior(problem.set, map, rng);
      const Vec y = detail::sample_interior(problem.set, map, rng);
      const double nsq = primal.norm_sq(x - y);
      for (const auto& comp : problem.components) {
        const double bf = comp.value(x) - comp.value(y) - comp.grad(y).dot(x - y);
        worst = std::max(worst, bf - 0.5 * L * nsq);
      }
    }
    return worst;
  };
  auto sampled_convex = [&]() {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      const Vec x = detail::sample_interior(problem.set, map, rng);
      const Vec y = detail::sample_interior(problem.set, map, rng);
      for (const auto& comp : problem.components)
        worst = std::min(worst, comp.value(x) - comp.value(y) - comp.grad(y).dot(x - y));
    }
    return worst;
  };

  switch (spec.kind) {
    case BoundKind::RelStrongConst: {
      push("eta <= 1/L", rule.kind == RuleKind::Constant && rule.eta <= 1.0 / spec.L + 1e-12,
           "eta=" + std::to_string(rule.eta) + " 1/L=" + std::to_string(1.0 / spec.L));
      const double sm = sampled_rel_smooth(spec.L);
      push("components L-smooth relative to psi", sm <= tol, "worst slack " + std::to_string(sm));
      push("mu > 0", spec.mu > 0.0, "mu=" + std::to_string(spec.mu));
      const double st = sampled_rel_strong(spec.mu);
      push("f mu-strongly convex relative to psi", st <= tol, "worst slack " + std::to_string(st));
      break;
    }
    case BoundKind::RelSmoothConst: {
      push("eta <= 1/L", rule.kind == RuleKind::Constant && rule.eta <= 1.0 / spec.L + 1e-12,
           "eta=" + std::to_string(rule.eta));
      const double sm = sampled_rel_smooth(spec.L);
      push("components L-smooth relative to psi", sm <= tol, "worst slack " + std::to_string(sm));
      break;
    }
    case BoundKind::RelStrongPolyakMax: {
      push("c >= 1/2", rule.c >= 0.5 - 1e-15, "c=" + std::to_string(rule.c));
      push("psi strongly convex", map.mu_psi() > 0.0, "mu_psi=" + std::to_string(map.mu_psi()));
      const double sm = sampled_smooth_norm(spec.L);
      push("components L-smooth", sm <= tol, "worst slack " + std::to_string(sm));
      const double cv = sampled_convex();
      push("components convex", cv >= -tol, "worst B_f " + std::to_string(cv));
      const double st = sampled_rel_strong(spec.mu);
      push("f mu-strongly convex relative to psi", st <= tol, "worst slack " + std::to_string(st));
      break;
    }
    case BoundKind::ConvexPolyakMax: {
      push("c >= 1", rule.c >= 1.0 - 1e-15, "c=" + std::to_string(rule.c));
      push("psi strongly convex", map.mu_psi() > 0.0, "mu_psi=" + std::to_string(map.mu_psi()));
      const double sm = sampled_smooth_norm(spec.L);
      push("components L-smooth", sm <= tol, "worst slack " + std::to_string(sm));
      const double cv = sampled_convex();
      push("components convex", cv >= -tol, "worst B_f " + std::to_string(cv));
      break;
    }
    case BoundKind::ConvexConstSmooth: {
      push("eta <= mu_psi/(2L)",
           rule.kind == RuleKind::Constant && rule.eta <= spec.mu_psi / (2.0 * spec.L) + 1e-12,
           "eta=" + std::to_string(rule.eta));
      const double sm = sampled_smooth_norm(spec.L);
      push("components L-smooth", sm <= tol, "worst slack " + std::to_string(sm));
      break;
    }
    case BoundKind::NonSmoothPolyak: {
      push("G finite", std::isfinite(spec.G) && spec.G > 0.0, "G=" + std::to_string(spec.G));
      push("psi strongly convex", map.mu_psi() > 0.0, "mu_psi=" + std::to_string(map.mu_psi()));
      const double cv = sampled_convex();
      push("f convex", cv >= -tol, "worst B_f " + std::to_string(cv));
      break;
    }
    case BoundKind::PLPrecond: {
      const PlConstants pc = pl_constants(spec.c, 1.0, spec.L_max, spec.mu, spec.eta_b);
      push("c > L_max/(4 mu)", spec.c > spec.L_max / (4.0 * spec.mu), "c=" + std::to_string(spec.c));
      push("nu in (0,1)", pc.nu > 0.0 && pc.nu < 1.0, "nu=" + std::to_string(pc.nu));
      push("eta_b below cap", pc.valid, "alpha=" + std::to_string(pc.alpha));
      break;
    }
  }
  return out;
}

inline bool all_hold(const std::vector<PreconditionResult>& prs) {
  for (const auto& p : prs)
    if (!p.holds) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Empirical rate fits over a recorded window.

struct LinearRateFit {
  double decay_per_step = 1.0;
  double r2 = 0.0;
};

struct SublinearRateFit {
  double exponent = 0.0;
  double r2 = 0.0;
};

namespace detail {

struct LsFit {
  double slope, intercept, r2;
};

inline LsFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LsFit f{};
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  if (syy <= 0.0) {
    f.r2 = 1.0;  // constant series is fitted exactly
  } else {
    double ssres = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (f.intercept + f.slope * xs[i]);
      ssres += e * e;
    }
    f.r2 = 1.0 - ssres / syy;
  }
  return f;
}

inline void window_series(const std::vector<long>& t, const std::vector<double>& m, long t0, long t1,
                          std::vector<double>& xs, std::vector<double>& ys, bool log_t) {
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    if (!(m[i] > 0.0)) throw NonPositiveMetric("metric must be positive over the fit window (t=" +
                                               std::to_string(t[i]) + ")");
    xs.push_back(log_t ? std::log(static_cast<double>(t[i])) : static_cast<double>(t[i]));
    ys.push_back(std::log(m[i]));
  }
  if (xs.size() < 2) throw DomainError("rate fit needs at least two points in the window");
}

}  // namespace detail

// Least-squares slope of log(metric) against t; decay_per_step = exp(slope).
inline LinearRateFit fit_linear_rate(const std::vector<long>& t, const std::vector<double>& metric,
                                     long t0, long t1) {
  std::vector<double> xs, ys;
  detail::window_series(t, metric, t0, t1, xs, ys, false);
  const auto f = detail::least_squares(xs, ys);
  return {std::exp(f.slope), f.r2};
}

// Least-squares slope of log(metric) against log(t).
inline SublinearRateFit fit_sublinear_rate(const std::vector<long>& t,
                                           const std::vector<double>& metric, long t0, long t1) {
  std::vector<double> xs, ys;
  detail::window_series(t, metric, t0, t1, xs, ys, true);
  const auto f = detail::least_squares(xs, ys);
  return {f.slope, f.r2};
}

// Named metric accessor for fits over Monte Carlo summaries.
inline const std::vector<double>& metric_series(const MonteCarloSummary& s, const std::string& name) {
  if (name == "f_gap") return s.f_gap_mean;
  if (name == "bpsi") return s.bpsi_mean;
  if (name == "bf") return s.bf_mean;
  if (name == "favg_gap") return s.favg_gap_mean;
  if (name == "fbest_gap") return s.fbest_gap_mean;
  if (name == "bf_avg") return s.bf_avg_mean;
  if (name == "eta") return s.eta_mean;
  throw DomainError("unknown metric '" + name + "'");
}

inline LinearRateFit fit_linear_rate(const MonteCarloSummary& s, const std::string& metric, long t0,
                                     long t1) {
  return fit_linear_rate(s.t, metric_series(s, metric), t0, t1);
}

inline SublinearRateFit fit_sublinear_rate(const MonteCarloSummary& s, const std::string& metric,
                                           long t0, long t1) {
  return fit_sublinear_rate(s.t, metric_series(s, metric), t0, t1);
}

// ---------------------------------------------------------------------------
// Iterations-to-accuracy comparison between the entropy and Euclidean
// geometries on simplex problems of growing dimension.

struct ScalingRow {
  int d = 0;
  long iters_eg = -1;    // -1 when the budget was exhausted
  long iters_spgd = -1;
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

// First recorded iterate whose best-so-far gap drops to eps, averaged over
// replicates.
inline long iterations_to_accuracy(const FiniteSumProblem& problem, const RunConfig& cfg,
                                   double eps, int replicates) {
  double acc = 0.0;
  for (int r = 0; r < replicates; ++r) {
    RunConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const Trajectory traj = run_smd(problem, c);
    long hit = -1;
    for (const auto& rec : traj.records)
      if (rec.f_best_gap <= eps) {
        hit = rec.t;
        break;
      }
    if (hit < 0) return -1;
    acc += static_cast<double>(hit);
  }
  return static_cast<long>(acc / static_cast<double>(replicates) + 0.5);
}

inline std::vector<ScalingRow> dimension_scaling(
    const std::vector<int>& dims, const std::function<FiniteSumProblem(int)>& family, double eps,
    long budget, std::uint64_t seed, int replicates = 3) {
  std::vector<ScalingRow> rows;
  for (int d : dims) {
    const FiniteSumProblem problem = family(d);
    ScalingRow row;
    row.d = d;

    Vec x1(d);
    for (int j = 0; j < d; ++j) x1[j] = 1.0;
    x1[d - 1] = static_cast<double>(d);
    x1 /= x1.sum();

    RunConfig eg{MirrorMap::neg_entropy(d), FeasibleSet::simplex(d),
                 StepsizeRule::msps_max(1.0, 1e6), budget, seed, x1};
    eg.record_every = 4;
    eg.xstar_for_metrics = problem.known_xstar;
    row.iters_eg = iterations_to_accuracy(problem, eg, eps, replicates);

    RunConfig pg{MirrorMap::euclidean(d), FeasibleSet::simplex(d),
                 StepsizeRule::msps_max(1.0, 1e6), budget, seed, x1};
    pg.record_every = 4;
    pg.xstar_for_metrics = problem.known_xstar;
    row.iters_spgd = iterations_to_accuracy(problem, pg, eps, replicates);

    if (row.iters_eg > 0 && row.iters_spgd > 0)
      row.ratio = static_cast<double>(row.iters_spgd) / static_cast<double>(row.iters_eg);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mirroropt
