#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <vector>

#include "mirroropt/constraints.hpp"
#include "mirroropt/datasets.hpp"
#include "mirroropt/errors.hpp"
#include "mirroropt/geometry.hpp"
#include "mirroropt/rng.hpp"

namespace mirroropt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Component {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  double inf_unconstrained = -kInf;                       // f_i^* over all of R^d
  std::function<double(const FeasibleSet&)> inf_constrained;  // f_i^*(X)
  double smoothness_L = 0.0;  // with respect to the problem norm
};

struct FiniteSumProblem {
  std::vector<Component> components;
  FeasibleSet set;
  NormTag norm;
  int dim = 0;
  std::optional<Vec> known_xstar;
  std::optional<double> known_fstar;

  int n() const { return static_cast<int>(components.size()); }

  double value(const Vec& x) const {
    double acc = 0.0;
    for (const auto& c : components) acc += c.value(x);
    return acc / static_cast<double>(components.size());
  }

  Vec grad(const Vec& x) const {
    Vec acc = Vec::Zero(x.size());
    for (const auto& c : components) acc += c.grad(x);
    return acc / static_cast<double>(components.size());
  }

  // B_f(x;y) = f(x) - f(y) - <grad f(y), x - y>
  double bregman_f(const Vec& x, const Vec& y) const {
    return value(x) - value(y) - grad(y).dot(x - y);
  }

  double max_smoothness() const {
    double L = 0.0;
    for (const auto& c : components) L = std::max(L, c.smoothness_L);
    return L;
  }

  const Vec& xstar() const {
    if (!known_xstar) throw MissingOptimum("problem has no known minimizer");
    return *known_xstar;
  }

  double fstar() const { return known_fstar ? *known_fstar : value(xstar()); }
};

// ---------------------------------------------------------------------------
// One-dimensional quadratic ensembles f_i(x) = a x^2 + b x + c.

struct QuadCoeffs {
  double a, b, c;
};

namespace detail {

inline double quad_value(const QuadCoeffs& q, double x) { return (q.a * x + q.b) * x + q.c; }

inline double quad_inf_unconstrained(const QuadCoeffs& q) {
  if (q.a > 0.0) return q.c - q.b * q.b / (4.0 * q.a);
  if (q.a == 0.0) return q.b == 0.0 ? q.c : -kInf;
  return -kInf;
}

// infimum of a x^2 + b x + c over [lo, hi]; endpoints may be infinite
inline double quad_inf_on_interval(const QuadCoeffs& q, double lo, double hi) {
  if (q.a > 0.0) {
    const double v = std::min(std::max(-q.b / (2.0 * q.a), lo), hi);
    return quad_value(q, v);
  }
  if (q.a < 0.0) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return -kInf;
    return std::min(quad_value(q, lo), quad_value(q, hi));
  }
  if (q.b > 0.0) return std::isfinite(lo) ? quad_value(q, lo) : -kInf;
  if (q.b < 0.0) return std::isfinite(hi) ? quad_value(q, hi) : -kInf;
  return q.c;
}

inline std::pair<double, double> set_interval_1d(const FeasibleSet& set) {
  switch (set.kind()) {
    case SetKind::Reals: return {-kInf, kInf};
    case SetKind::NonNeg: return {0.0, kInf};
    case SetKind::Box: return {set.lo()[0], set.hi()[0]};
    default: throw UnsupportedPair("quad1d supports reals, nonneg, and box sets");
  }
}

}  // namespace detail

inline FiniteSumProblem quad1d_problem(const std::vector<QuadCoeffs>& coeffs, const FeasibleSet& set,
                                       bool require_strongly_convex = false) {
  if (set.dim() != 1) throw DimensionMismatch("quad1d_problem is one-dimensional");
  if (coeffs.empty()) throw DomainError("quad1d_problem needs at least one component");
  const auto [lo, hi] = detail::set_interval_1d(set);

  double abar = 0.0, bbar = 0.0, cbar = 0.0;
  for (const auto& q : coeffs) {
    abar += q.a;
    bbar += q.b;
    cbar += q.c;
  }
  const double n = static_cast<double>(coeffs.size());
  abar /= n;
  bbar /= n;
  cbar /= n;
  if (require_strongly_convex && !(abar > 0.0))
    throw DomainError("averaged quadratic is not strongly convex");

  FiniteSumProblem p{{}, set, NormTag::l2(), 1, std::nullopt, std::nullopt};
  for (const auto& q : coeffs) {
    Component c;
    c.value = [q](const Vec& x) { return detail::quad_value(q, x[0]); };
    c.grad = [q](const Vec& x) { return Vec::Constant(1, 2.0 * q.a * x[0] + q.b); };
    c.inf_unconstrained = detail::quad_inf_unconstrained(q);
    c.inf_constrained = [q](const FeasibleSet& s) {
      const auto [l, h] = detail::set_interval_1d(s);
      return detail::quad_inf_on_interval(q, l, h);
    };
    c.smoothness_L = 2.0 * std::abs(q.a);
    p.components.push_back(std::move(c));
  }

  // exact minimizer of the averaged quadratic over the interval, when it exists
  const QuadCoeffs mean{abar, bbar, cbar};
  std::optional<double> xs;
  if (abar > 0.0) {
    xs = std::min(std::max(-bbar / (2.0 * abar), lo), hi);
  } else if (std::isfinite(lo) && std::isfinite(hi)) {
    xs = detail::quad_value(mean, lo) <= detail::quad_value(mean, hi) ? lo : hi;
  } else if (abar == 0.0) {
    if (bbar > 0.0 && std::isfinite(lo)) xs = lo;
    if (bbar < 0.0 && std::isfinite(hi)) xs = hi;
    if (bbar == 0.0) xs = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
  }
  if (xs && std::isfinite(*xs)) {
    p.known_xstar = Vec::Constant(1, *xs);
    p.known_fstar = detail::quad_value(mean, *xs);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Linear systems f_i(x) = (1/2)(<A_i., x> - b_i)^2.

namespace detail {

// range of <a, x> over the set, as a closed interval
inline std::pair<double, double> linear_range(const Vec& a, const FeasibleSet& set) {
  switch (set.kind()) {
    case SetKind::Reals: {
      if (a.isZero(0.0)) return {0.0, 0.0};
      return {-kInf, kInf};
    }
    case SetKind::NonNeg: {
      double lo = 0.0, hi = 0.0;
      if ((a.array() < 0.0).any()) lo = -kInf;
      if ((a.array() > 0.0).any()) hi = kInf;
      return {lo, hi};
    }
    case SetKind::Box: {
      double lo = 0.0, hi = 0.0;
      for (Eigen::Index j = 0; j < a.size(); ++j) {
        lo += std::min(a[j] * set.lo()[j], a[j] * set.hi()[j]);
        hi += std::max(a[j] * set.lo()[j], a[j] * set.hi()[j]);
      }
      return {lo, hi};
    }
    case SetKind::Simplex: return {a.minCoeff(), a.maxCoeff()};
    case SetKind::L1Ball: {
      const double m = set.lambda() * a.cwiseAbs().maxCoeff();
      return {-m, m};
    }
  }
  return {-kInf, kInf};
}

}  // namespace detail

inline FiniteSumProblem linear_system_problem(const Mat& A, const Vec& b, const FeasibleSet& set,
                                              NormTag norm = NormTag::l2(),
                                              std::optional<Vec> xstar = std::nullopt) {
  if (A.rows() != b.size()) throw DimensionMismatch("linear system: A and b disagree on rows");
  if (A.cols() != set.dim()) throw DimensionMismatch("linear system: A and set disagree on dimension");

  FiniteSumProblem p{{}, set, norm, static_cast<int>(A.cols()), std::nullopt, std::nullopt};
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const Vec row = A.row(i).transpose();
    const double bi = b[i];
    Component c;
    c.value = [row, bi](const Vec& x) {
      const double r = row.dot(x) - bi;
      return 0.5 * r * r;
    };
    c.grad = [row, bi](const Vec& x) { return Vec((row.dot(x) - bi) * row); };
    c.inf_unconstrained = row.isZero(0.0) ? 0.5 * bi * bi : 0.0;
    c.inf_constrained = [row, bi](const FeasibleSet& s) {
      const auto [lo, hi] = detail::linear_range(row, s);
      if (bi >= lo && bi <= hi) return 0.0;
      const double r = bi < lo ? lo - bi : hi - bi;
      return 0.5 * r * r;
    };
    c.smoothness_L = dual_norm_sq(norm, row);
    p.components.push_back(std::move(c));
  }
  if (xstar) {
    if (xstar->size() != p.dim) throw DimensionMismatch("linear system: xstar dimension");
    p.known_xstar = std::move(xstar);
    p.known_fstar = p.value(*p.known_xstar);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Stationary distribution of a Markov chain: (P^T - I) x = 0 on the simplex.

inline FiniteSumProblem markov_problem(const Mat& P) {
  const Eigen::Index m = P.rows();
  if (P.cols() != m) throw NotStochastic("transition matrix must be square");
  for (Eigen::Index i = 0; i < m; ++i) {
    if ((P.row(i).array() < -1e-12).any()) throw NotStochastic("negative transition probability");
    if (std::abs(P.row(i).sum() - 1.0) > 1e-9) throw NotStochastic("row sums must equal 1");
  }

  const Mat G = P.transpose() - Mat::Identity(m, m);
  auto p = linear_system_problem(G, Vec::Zero(m), FeasibleSet::simplex(static_cast<int>(m)),
                                 NormTag::l1());
  for (Eigen::Index i = 0; i < m; ++i) {
    const double linf = G.row(i).cwiseAbs().maxCoeff();
    const double L = linf * linf;
    if (L > 1.0 + 1e-12)
      std::cerr << "warning: markov component " << i << " exceeds the unit smoothness bound ("
                << L << ")\n";
    p.components[static_cast<size_t>(i)].smoothness_L = std::max(1.0, L);
  }

  // stationary distribution via least squares on [G; 1^T] x = [0; 1]
  Mat Aug(m + 1, m);
  Aug.topRows(m) = G;
  Aug.row(m).setOnes();
  Vec rhs = Vec::Zero(m + 1);
  rhs[m] = 1.0;
  Vec xs = Aug.colPivHouseholderQr().solve(rhs);
  xs = xs.cwiseMax(0.0);
  xs /= xs.sum();
  p.known_xstar = xs;
  p.known_fstar = 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// Logistic losses f_i(x) = log(1 + exp(-y_i <w_i, x>)), with the f_i^* = 0
// convention.

namespace detail {

inline double softplus(double u) {  // log(1 + e^u), overflow-safe
  if (u > 30.0) return u;
  return std::log1p(std::exp(u));
}

inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace detail

inline double component_inf_oracle(const Component& component, const FeasibleSet& set,
                                   int resolution,
                                   std::optional<std::pair<Vec, Vec>> bounding_box);

inline FiniteSumProblem logistic_problem(const Dataset& data, const FeasibleSet& set,
                                         NormTag norm = NormTag::l2()) {
  const int n = data.n();
  const int d = data.d();
  if (set.dim() != d) throw DimensionMismatch("logistic: set and features disagree on dimension");
  for (int i = 0; i < n; ++i)
    if (data.labels[i] != 1.0 && data.labels[i] != -1.0)
      throw BadLabels("logistic labels must be -1 or +1");

  FiniteSumProblem p{{}, set, norm, d, std::nullopt, std::nullopt};
  for (int i = 0; i < n; ++i) {
    const Vec w = data.features.row(i).transpose();
    const double y = data.labels[i];
    Component c;
    c.value = [w, y](const Vec& x) { return detail::softplus(-y * w.dot(x)); };
    c.grad = [w, y](const Vec& x) {
      const double z = y * w.dot(x);
      return Vec(-y * detail::sigmoid(-z) * w);
    };
    c.inf_unconstrained = 0.0;
    const Vec yw = y * w;
    const auto val = c.value;
    const auto grd = c.grad;
    c.inf_constrained = [val, grd, yw](const FeasibleSet& s) -> double {
      switch (s.kind()) {
        case SetKind::Reals: return 0.0;
        case SetKind::NonNeg: return (yw.array() > 0.0).any() ? 0.0 : std::log(2.0);
        default: {
          Component probe;
          probe.value = val;
          probe.grad = grd;
          return component_inf_oracle(probe, s, 20001, std::nullopt);
        }
      }
    };
    c.smoothness_L = 0.25 * dual_norm_sq(norm, w);
    p.components.push_back(std::move(c));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Brute-force constrained infimum: sample `resolution` feasible points, then
// refine from the best one. The result is an upper bound on the true infimum.

namespace detail {

inline double golden_section_1d(const std::function<double(double)>& f, double lo, double hi,
                                int iters = 200) {
  const double gr = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters && b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::min({f(a), f(b), fc, fd});
}

inline Vec random_feasible(const FeasibleSet& set, SplitMix64& rng,
                           const std::optional<std::pair<Vec, Vec>>& bbox) {
  const int d = set.dim();
  Vec x(d);
  switch (set.kind()) {
    case SetKind::Box:
      for (int j = 0; j < d; ++j) x[j] = set.lo()[j] + rng.uniform() * (set.hi()[j] - set.lo()[j]);
      return x;
    case SetKind::Simplex: {
      // exponential spacings give the uniform (Dirichlet(1)) distribution
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        x[j] = -std::log(rng.uniform_pos());
        s += x[j];
      }
      return x / s;
    }
    case SetKind::L1Ball: {
      Vec w(2 * d);
      double s = 0.0;
      for (int j = 0; j < 2 * d; ++j) {
        w[j] = -std::log(rng.uniform_pos());
        s += w[j];
      }
      w /= s;
      return LiftMatrix(set.lambda(), d).apply(w);
    }
    default: {
      if (!bbox) throw UnboundedSet("component_inf_oracle requires a bounded set or a bounding box");
      for (int j = 0; j < d; ++j)
        x[j] = bbox->first[j] + rng.uniform() * (bbox->second[j] - bbox->first[j]);
      return euclid_project(set, x);
    }
  }
}

}  // namespace detail

inline double component_inf_oracle(const Component& component, const FeasibleSet& set,
                                   int resolution,
                                   std::optional<std::pair<Vec, Vec>> bounding_box = std::nullopt) {
  if (resolution < 2) throw DomainError("component_inf_oracle needs resolution >= 2");
  const int d = set.dim();
  if (!set.bounded() && !bounding_box)
    throw UnboundedSet("component_inf_oracle requires a bounded set or a bounding box");

  if (d == 1 && set.kind() == SetKind::Box) {
    const double lo = set.lo()[0], hi = set.hi()[0];
    auto f1 = [&](double t) { return component.value(Vec::Constant(1, t)); };
    double best = kInf;
    double best_t = lo;
    for (int k = 0; k < resolution; ++k) {
      const double t = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
      const double v = f1(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    const double h = (hi - lo) / static_cast<double>(resolution - 1);
    return std::min(best, detail::golden_section_1d(f1, std::max(lo, best_t - h),
                                                    std::min(hi, best_t + h)));
  }

  SplitMix64 rng(0xC0FFEEull + static_cast<std::uint64_t>(resolution));
  Vec best_x;
  double best = kInf;
  for (int k = 0; k < resolution; ++k) {
    const Vec x = detail::random_feasible(set, rng, bounding_box);
    const double v = component.value(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  if (set.kind() == SetKind::Simplex) {  // vertices and centroid are easy misses
    for (int j = 0; j < d; ++j) {
      Vec e = Vec::Zero(d);
      e[j] = 1.0;
      const double v = component.value(e);
      if (v < best) {
        best = v;
        best_x = e;
      }
    }
  }

  // projected-gradient refinement with halving steps from the best sample
  if (component.grad) {
    Vec x = best_x;
    double step = 1.0;
    for (int it = 0; it < 400; ++it) {
      const Vec g = component.grad(x);
      Vec cand;
      if (set.kind() == SetKind::L1Ball) {
        const LiftMatrix lift(set.lambda(), d);
        const Vec w = l1_lift(set.lambda(), x);
        cand = lift.apply(euclid_project(FeasibleSet::simplex(2 * d), w - step * lift.apply_transpose(g)));
      } else {
        cand = euclid_project(set, x - step * g);
      }
      const double v = component.value(cand);
      if (v < best) {
        best = v;
        x = cand;
      } else {
        step *= 0.5;
        if (step < 1e-12) break;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Neighborhood quantities.

// sigma^2 = f(x_*) - E_i[f_i^*]; +inf as soon as one component is unbounded
// below.
inline double sigma_sq(const FiniteSumProblem& problem,
                       std::optional<Vec> xstar_override = std::nullopt) {
  const Vec xs = xstar_override ? *xstar_override : problem.xstar();
  double mean_inf = 0.0;
  for (const auto& c : problem.components) {
    if (c.inf_unconstrained == -kInf) return kInf;
    mean_inf += c.inf_unconstrained;
  }
  mean_inf /= static_cast<double>(problem.n());
  const double v = problem.value(xs) - mean_inf;
  if (v < -1e-6) throw DomainError("sigma_sq: supplied point is not a minimizer");
  return std::max(v, 0.0);
}

// sigma_X^2 = f(x_*) - E_i[inf_{x in X} f_i(x)] <= sigma^2.
inline double sigma_sq_constrained(const FiniteSumProblem& problem,
                                   std::optional<Vec> xstar_override = std::nullopt) {
  const Vec xs = xstar_override ? *xstar_override : problem.xstar();
  double mean_inf = 0.0;
  for (const auto& c : problem.components) {
    if (!c.inf_constrained) throw MissingOptimum("component lacks a constrained infimum");
    mean_inf += c.inf_constrained(problem.set);
  }
  mean_inf /= static_cast<double>(problem.n());
  const double v = problem.value(xs) - mean_inf;
  if (v < -1e-6) throw DomainError("sigma_sq_constrained: supplied point is not a minimizer");
  return std::max(v, 0.0);
}

// E_i ‖grad f_i(x_*)‖_2^2, the variance-style neighborhood of gradient-based
// conditions.
inline double mean_grad_norm_sq_at(const FiniteSumProblem& problem, const Vec& x) {
  double acc = 0.0;
  for (const auto& c : problem.components) acc += c.grad(x).squaredNorm();
  return acc / static_cast<double>(problem.n());
}

struct InterpolationReport {
  bool sigma_x_zero = false;
  bool xstar_in_all_component_minima = false;
  double sigma_sq_x = 0.0;
  double max_component_gap = 0.0;
};

// Both sides of the equivalence "sigma_X^2 = 0 iff x_* minimizes every f_i
// over X", decided numerically at tolerance tol.
inline InterpolationReport interpolation_check(const FiniteSumProblem& problem, const Vec& xstar,
                                               double tol) {
  if (!problem.set.contains(xstar)) throw DomainError("interpolation_check: xstar must be feasible");
  InterpolationReport rep;
  double max_gap = 0.0;
  for (const auto& c : problem.components) {
    const double gap = c.value(xstar) - c.inf_constrained(problem.set);
    max_gap = std::max(max_gap, gap);
  }
  rep.max_component_gap = max_gap;
  rep.xstar_in_all_component_minima = max_gap <= tol;
  rep.sigma_sq_x = sigma_sq_constrained(problem, xstar);
  rep.sigma_x_zero = rep.sigma_sq_x <= static_cast<double>(problem.n()) * tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Reduce an l1-ball constraint to the 2d-simplex: minimize f(Lambda w) over w.

inline FiniteSumProblem lift_problem(const FiniteSumProblem& problem, double lambda) {
  if (problem.set.kind() != SetKind::L1Ball)
    throw UnsupportedPair("lift_problem expects an l1-ball constrained problem");
  const int d = problem.dim;
  const LiftMatrix lift(lambda, d);

  FiniteSumProblem lifted{{}, FeasibleSet::simplex(2 * d), NormTag::l1(), 2 * d, std::nullopt,
                          problem.known_fstar};
  for (const auto& c : problem.components) {
    Component lc;
    lc.value = [c, lift](const Vec& w) { return c.value(lift.apply(w)); };
    lc.grad = [c, lift](const Vec& w) { return lift.apply_transpose(c.grad(lift.apply(w))); };
    lc.inf_unconstrained = c.inf_unconstrained;
    const FeasibleSet ball = problem.set;
    lc.inf_constrained = [c, ball](const FeasibleSet& s) {
      if (s.kind() != SetKind::Simplex) throw UnsupportedPair("lifted components live on the simplex");
      return c.inf_constrained(ball);
    };
    // each column of Lambda has l2 norm lambda, so an L-smooth component
    // (l2) becomes lambda^2 L smooth with respect to ‖·‖_1
    lc.smoothness_L = lambda * lambda * c.smoothness_L;
    lifted.components.push_back(std::move(lc));
  }
  if (problem.known_xstar) lifted.known_xstar = l1_lift(lambda, *problem.known_xstar);
  return lifted;
}

}  // namespace mirroropt
