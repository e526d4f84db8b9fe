#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "mirroropt/errors.hpp"

namespace mirroropt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPosFloor = 1e-300;  // simplex iterates never drop below this

// Shared between a Mahalanobis mirror map and its norm tags; the Cholesky
// factor is computed once and reused for every M^{-1} application.
struct MahalanobisData {
  Mat M;
  Eigen::LLT<Mat> llt;

  explicit MahalanobisData(Mat m) : M(std::move(m)) {
    if (M.rows() != M.cols()) throw DimensionMismatch("Mahalanobis matrix must be square");
    const double scale = M.cwiseAbs().maxCoeff();
    if (!((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * (scale > 0 ? scale : 1.0)))
      throw DomainError("Mahalanobis matrix must be symmetric");
    llt.compute(M);
    if (llt.info() != Eigen::Success)
      throw DomainError("Mahalanobis matrix must be positive definite");
  }
};

// ‖x‖_p with rescaling so large exponents cannot overflow.
inline double lp_norm(const Vec& x, double p) {
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / m, p);
  return m * std::pow(acc, 1.0 / p);
}

enum class NormKind { L2, Lp, L1, LInf, Mahalanobis, MahalanobisInverse };

class NormTag {
 public:
  static NormTag l2() { return NormTag(NormKind::L2, 2.0, nullptr); }
  static NormTag lp(double p) {
    if (!(p >= 1.0)) throw DomainError("Lp norm requires p >= 1");
    return NormTag(NormKind::Lp, p, nullptr);
  }
  static NormTag l1() { return NormTag(NormKind::L1, 1.0, nullptr); }
  static NormTag linf() { return NormTag(NormKind::LInf, 0.0, nullptr); }
  static NormTag mahalanobis(std::shared_ptr<const MahalanobisData> m) {
    return NormTag(NormKind::Mahalanobis, 0.0, std::move(m));
  }
  static NormTag mahalanobis_inverse(std::shared_ptr<const MahalanobisData> m) {
    return NormTag(NormKind::MahalanobisInverse, 0.0, std::move(m));
  }

  NormKind kind() const { return kind_; }
  double p() const { return p_; }
  const std::shared_ptr<const MahalanobisData>& mdata() const { return mdata_; }

  // dual(L2)=L2, dual(Lp)=Lq with 1/p+1/q=1, dual(L1)=LInf, dual(LInf)=L1,
  // dual(‖·‖_M)=‖·‖_{M^{-1}}.
  NormTag dual() const {
    switch (kind_) {
      case NormKind::L2: return l2();
      case NormKind::Lp: {
        if (p_ == 1.0) return linf();
        return lp(p_ / (p_ - 1.0));
      }
      case NormKind::L1: return linf();
      case NormKind::LInf: return l1();
      case NormKind::Mahalanobis: return mahalanobis_inverse(mdata_);
      case NormKind::MahalanobisInverse: return mahalanobis(mdata_);
    }
    throw DomainError("unreachable norm kind");
  }

  double norm(const Vec& v) const { return std::sqrt(norm_sq(v)); }

  double norm_sq(const Vec& v) const {
    switch (kind_) {
      case NormKind::L2: return v.squaredNorm();
      case NormKind::Lp: {
        const double n = lp_norm(v, p_);
        return n * n;
      }
      case NormKind::L1: {
        const double n = v.lpNorm<1>();
        return n * n;
      }
      case NormKind::LInf: {
        const double n = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
        return n * n;
      }
      case NormKind::Mahalanobis: return v.dot(mdata_->M * v);
      case NormKind::MahalanobisInverse: return v.dot(mdata_->llt.solve(v));
    }
    throw DomainError("unreachable norm kind");
  }

  std::string describe() const {
    switch (kind_) {
      case NormKind::L2: return "l2";
      case NormKind::Lp: return "lp(" + std::to_string(p_) + ")";
      case NormKind::L1: return "l1";
      case NormKind::LInf: return "linf";
      case NormKind::Mahalanobis: return "mahalanobis";
      case NormKind::MahalanobisInverse: return "mahalanobis_inverse";
    }
    return "?";
  }

 private:
  NormTag(NormKind kind, double p, std::shared_ptr<const MahalanobisData> m)
      : kind_(kind), p_(p), mdata_(std::move(m)) {}

  NormKind kind_;
  double p_;
  std::shared_ptr<const MahalanobisData> mdata_;
};

// ‖g‖²_* under the dual of `primal`; gradients are always measured this way.
inline double dual_norm_sq(const NormTag& primal, const Vec& g) {
  return primal.dual().norm_sq(g);
}

enum class MapKind { Euclidean, PNorm, NegEntropy, Mahalanobis };

// p-norm link function: phi^p_i(x) = ‖x‖_p^{2-p} sign(x_i)|x_i|^{p-1},
// with phi^p(0) := 0 by continuity. Its inverse is phi^q, 1/p + 1/q = 1.
inline Vec pnorm_link(const Vec& x, double p) {
  const double np = lp_norm(x, p);
  Vec out = Vec::Zero(x.size());
  if (np == 0.0) return out;
  const double scale = std::pow(np, 2.0 - p);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    out[i] = a == 0.0 ? 0.0 : scale * (x[i] > 0 ? 1.0 : -1.0) * std::pow(a, p - 1.0);
  }
  return out;
}

class MirrorMap {
 public:
  static MirrorMap euclidean(int dim) { return MirrorMap(MapKind::Euclidean, dim, 2.0, nullptr); }

  static MirrorMap pnorm(double p, int dim) {
    if (!(p > 1.0 && p <= 2.0)) throw DomainError("pnorm map requires 1 < p <= 2");
    return MirrorMap(MapKind::PNorm, dim, p, nullptr);
  }

  static MirrorMap neg_entropy(int dim) { return MirrorMap(MapKind::NegEntropy, dim, 0.0, nullptr); }

  static MirrorMap mahalanobis(Mat m) {
    auto data = std::make_shared<const MahalanobisData>(std::move(m));
    const int dim = static_cast<int>(data->M.rows());
    return MirrorMap(MapKind::Mahalanobis, dim, 0.0, std::move(data));
  }

  MapKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double p() const { return p_; }
  const std::shared_ptr<const MahalanobisData>& mdata() const { return mdata_; }

  // Strong convexity constant of psi with respect to its primal norm
  // (neg-entropy: with respect to ‖·‖_1 on the simplex).
  double mu_psi() const {
    switch (kind_) {
      case MapKind::Euclidean: return 1.0;
      case MapKind::PNorm: return p_ - 1.0;
      case MapKind::NegEntropy: return 1.0;
      case MapKind::Mahalanobis: return 1.0;
    }
    return 1.0;
  }

  NormTag primal_norm() const {
    switch (kind_) {
      case MapKind::Euclidean: return NormTag::l2();
      case MapKind::PNorm: return NormTag::lp(p_);
      case MapKind::NegEntropy: return NormTag::l1();
      case MapKind::Mahalanobis: return NormTag::mahalanobis(mdata_);
    }
    return NormTag::l2();
  }

  double psi(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case MapKind::Euclidean: return 0.5 * x.squaredNorm();
      case MapKind::PNorm: {
        const double n = lp_norm(x, p_);
        return 0.5 * n * n;
      }
      case MapKind::NegEntropy: {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          if (x[i] < 0.0) throw DomainError("neg-entropy psi requires nonnegative coordinates");
          if (x[i] > 0.0) acc += x[i] * std::log(x[i]);  // 0 log 0 = 0
        }
        return acc;
      }
      case MapKind::Mahalanobis: return 0.5 * x.dot(mdata_->M * x);
    }
    return 0.0;
  }

  Vec grad_map(const Vec& x) const {
    check_dim(x);
    switch (kind_) {
      case MapKind::Euclidean: return x;
      case MapKind::PNorm: return pnorm_link(x, p_);
      case MapKind::NegEntropy: {
        Vec out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          if (!(x[i] > 0.0)) throw DomainError("neg-entropy gradient requires strictly positive coordinates");
          out[i] = 1.0 + std::log(x[i]);
        }
        return out;
      }
      case MapKind::Mahalanobis: return mdata_->M * x;
    }
    return x;
  }

  Vec inverse_grad_map(const Vec& z) const {
    check_dim(z);
    switch (kind_) {
      case MapKind::Euclidean: return z;
      case MapKind::PNorm: return pnorm_link(z, p_ / (p_ - 1.0));
      case MapKind::NegEntropy: {
        Vec out(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = std::exp(z[i] - 1.0);
        return out;
      }
      case MapKind::Mahalanobis: return mdata_->llt.solve(z);
    }
    return z;
  }

  // B_psi(x;y) = psi(x) - psi(y) - <grad psi(y), x - y>. Quadratic maps use
  // the cancellation-free closed form, neg-entropy the generalized KL.
  double bregman(const Vec& x, const Vec& y) const {
    check_dim(x);
    check_dim(y);
    switch (kind_) {
      case MapKind::Euclidean: return 0.5 * (x - y).squaredNorm();
      case MapKind::PNorm: return psi(x) - psi(y) - pnorm_link(y, p_).dot(x - y);
      case MapKind::NegEntropy: {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          if (!(y[i] > 0.0)) throw DomainError("neg-entropy bregman requires interior second argument");
          if (x[i] < 0.0) throw DomainError("neg-entropy bregman requires nonnegative first argument");
          if (x[i] == 0.0) {
            acc += y[i];
          } else {
            acc += x[i] * (std::log(x[i]) - std::log(y[i])) - x[i] + y[i];
          }
        }
        return acc;
      }
      case MapKind::Mahalanobis: {
        const Vec d = x - y;
        return 0.5 * d.dot(mdata_->M * d);
      }
    }
    return 0.0;
  }

  // True when x is a valid center for bregman/grad_map.
  bool interior(const Vec& x) const {
    if (x.size() != dim_) return false;
    if (kind_ == MapKind::NegEntropy) return (x.array() > 0.0).all();
    return x.allFinite();
  }

  std::string describe() const {
    switch (kind_) {
      case MapKind::Euclidean: return "euclidean";
      case MapKind::PNorm: return "pnorm(" + std::to_string(p_) + ")";
      case MapKind::NegEntropy: return "negentropy";
      case MapKind::Mahalanobis: return "mahalanobis";
    }
    return "?";
  }

 private:
  MirrorMap(MapKind kind, int dim, double p, std::shared_ptr<const MahalanobisData> m)
      : kind_(kind), dim_(dim), p_(p), mdata_(std::move(m)) {
    if (dim_ <= 0) throw DomainError("mirror map dimension must be positive");
  }

  void check_dim(const Vec& v) const {
    if (v.size() != dim_) throw DimensionMismatch("vector does not match mirror map dimension");
  }

  MapKind kind_;
  int dim_;
  double p_;
  std::shared_ptr<const MahalanobisData> mdata_;
};

}  // namespace mirroropt
