#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mirroropt/errors.hpp"
#include "mirroropt/geometry.hpp"

namespace mirroropt {

enum class SetKind { Reals, NonNeg, Box, Simplex, L1Ball };

class FeasibleSet {
 public:
  static FeasibleSet reals(int d) { return FeasibleSet(SetKind::Reals, d); }
  static FeasibleSet nonneg(int d) { return FeasibleSet(SetKind::NonNeg, d); }

  static FeasibleSet box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw DimensionMismatch("box bounds disagree in length");
    if (((hi - lo).array() < 0.0).any()) throw DomainError("box requires lo <= hi componentwise");
    FeasibleSet s(SetKind::Box, static_cast<int>(lo.size()));
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
  }

  static FeasibleSet box(double lo, double hi, int d) {
    return box(Vec::Constant(d, lo), Vec::Constant(d, hi));
  }

  static FeasibleSet simplex(int d) { return FeasibleSet(SetKind::Simplex, d); }

  static FeasibleSet l1_ball(double lambda, int d) {
    if (!(lambda > 0.0)) throw DomainError("l1 ball radius must be positive");
    FeasibleSet s(SetKind::L1Ball, d);
    s.lambda_ = lambda;
    return s;
  }

  SetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  bool contains(const Vec& x, double tol = 1e-9) const {
    if (x.size() != dim_) return false;
    switch (kind_) {
      case SetKind::Reals: return x.allFinite();
      case SetKind::NonNeg: return (x.array() >= -tol).all();
      case SetKind::Box:
        return (x.array() >= lo_.array() - tol).all() && (x.array() <= hi_.array() + tol).all();
      case SetKind::Simplex:
        return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
      case SetKind::L1Ball: return x.lpNorm<1>() <= lambda_ + tol;
    }
    return false;
  }

  bool bounded() const {
    return kind_ == SetKind::Box || kind_ == SetKind::Simplex || kind_ == SetKind::L1Ball;
  }

  std::string describe() const {
    switch (kind_) {
      case SetKind::Reals: return "reals";
      case SetKind::NonNeg: return "nonneg";
      case SetKind::Box: return "box";
      case SetKind::Simplex: return "simplex";
      case SetKind::L1Ball: return "l1ball(" + std::to_string(lambda_) + ")";
    }
    return "?";
  }

 private:
  FeasibleSet(SetKind kind, int d) : kind_(kind), dim_(d) {
    if (d <= 0) throw DomainError("feasible set dimension must be positive");
  }

  SetKind kind_;
  int dim_;
  double lambda_ = 0.0;
  Vec lo_, hi_;
};

// Euclidean projection onto the probability simplex, O(d log d)
// sort-and-threshold.
inline Vec project_simplex(const Vec& z) {
  const Eigen::Index d = z.size();
  std::vector<double> u(z.data(), z.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  Vec out(d);
  for (Eigen::Index i = 0; i < d; ++i) out[i] = std::max(z[i] - tau, 0.0);
  return out;
}

inline Vec euclid_project(const FeasibleSet& set, const Vec& x) {
  if (x.size() != set.dim()) throw DimensionMismatch("euclid_project: dimension mismatch");
  switch (set.kind()) {
    case SetKind::Reals: return x;
    case SetKind::NonNeg: return x.cwiseMax(0.0);
    case SetKind::Box: return x.cwiseMax(set.lo()).cwiseMin(set.hi());
    case SetKind::Simplex: return project_simplex(x);
    case SetKind::L1Ball:
      throw UnsupportedPair("euclid_project does not support l1 balls; use the simplex lifting");
  }
  return x;
}

// One mirror descent step: argmin_{z in set} <g,z> + (1/eta) B_psi(z;x),
// in closed form for every supported (map, set) pair.
inline Vec mirror_step(const MirrorMap& map, const FeasibleSet& set, const Vec& x, const Vec& g,
                       double eta) {
  if (x.size() != map.dim() || g.size() != map.dim() || set.dim() != map.dim())
    throw DimensionMismatch("mirror_step: dimension mismatch");
  if (!(eta >= 0.0)) throw DomainError("mirror_step: stepsize must be nonnegative");
  if (!map.interior(x)) throw DomainError("mirror_step: x must be interior to the map domain");
  if (!set.contains(x)) throw DomainError("mirror_step: x must be feasible");

  switch (map.kind()) {
    case MapKind::Euclidean:
      if (set.kind() == SetKind::L1Ball) break;
      return euclid_project(set, x - eta * g);

    case MapKind::NegEntropy: {
      if (set.kind() != SetKind::Simplex) break;
      const Vec step = eta * g;
      Vec y(x.size());
      if (step.cwiseAbs().maxCoeff() > 30.0) {
        // log-space to avoid overflow in exp for large stepsizes
        Vec logy(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) logy[i] = std::log(x[i]) - step[i];
        const double m = logy.maxCoeff();
        for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = std::exp(logy[i] - m);
      } else {
        for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = x[i] * std::exp(-step[i]);
      }
      y /= y.sum();
      return y.cwiseMax(kPosFloor);
    }

    case MapKind::PNorm: {
      if (set.kind() != SetKind::Reals) break;
      const double q = map.p() / (map.p() - 1.0);
      return pnorm_link(pnorm_link(x, map.p()) - eta * g, q);
    }

    case MapKind::Mahalanobis: {
      if (set.kind() != SetKind::Reals) break;
      return x - eta * map.mdata()->llt.solve(g);
    }
  }
  throw UnsupportedPair("mirror_step: unsupported (map, set) pair: (" + map.describe() + ", " +
                        set.describe() + ")");
}

// Lambda in R^{d x 2d} with interleaved columns (+lambda e_j, -lambda e_j);
// maps the 2d-simplex onto the l1 ball of radius lambda.
struct LiftMatrix {
  double lambda;
  int d;

  LiftMatrix(double lam, int dim) : lambda(lam), d(dim) {
    if (!(lambda > 0.0) || d <= 0) throw DomainError("lift matrix requires lambda > 0 and d > 0");
  }

  Vec apply(const Vec& w) const {
    if (w.size() != 2 * d) throw DimensionMismatch("lift apply: expected 2d coordinates");
    Vec x(d);
    for (int j = 0; j < d; ++j) x[j] = lambda * (w[2 * j] - w[2 * j + 1]);
    return x;
  }

  Vec apply_transpose(const Vec& v) const {
    if (v.size() != d) throw DimensionMismatch("lift transpose: expected d coordinates");
    Vec w(2 * d);
    for (int j = 0; j < d; ++j) {
      w[2 * j] = lambda * v[j];
      w[2 * j + 1] = -lambda * v[j];
    }
    return w;
  }
};

// Lift a point of the l1 ball to the 2d-simplex; leftover mass is spread
// uniformly so the result is strictly interior whenever ‖x0‖_1 < lambda.
inline Vec l1_lift(double lambda, const Vec& x0) {
  if (!(lambda > 0.0)) throw DomainError("l1_lift: lambda must be positive");
  const double norm1 = x0.lpNorm<1>();
  if (norm1 > lambda + 1e-9) throw InfeasibleStart("l1_lift: ‖x0‖_1 exceeds lambda");
  const int d = static_cast<int>(x0.size());
  Vec w = Vec::Zero(2 * d);
  for (int j = 0; j < d; ++j) {
    w[2 * j] = std::max(x0[j], 0.0) / lambda;
    w[2 * j + 1] = std::max(-x0[j], 0.0) / lambda;
  }
  const double residual = 1.0 - w.sum();
  if (residual > 0.0) w.array() += residual / static_cast<double>(2 * d);
  return w;
}

inline Vec l1_unlift(const LiftMatrix& lift, const Vec& w) {
  if (!FeasibleSet::simplex(2 * lift.d).contains(w))
    throw DomainError("l1_unlift: w must lie in the 2d-simplex");
  return lift.apply(w);
}

}  // namespace mirroropt
