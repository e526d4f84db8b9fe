#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mirroropt/errors.hpp"
#include "mirroropt/geometry.hpp"

namespace mirroropt {

enum class RuleKind { Constant, MirrorPolyak, MSPS, MSPSMax, SmoothedMSPSMax };

// Stepsize family. Only SmoothedMSPSMax carries run state (eta_prev); the
// solver copies the rule per run so rules can be shared freely.
struct StepsizeRule {
  RuleKind kind = RuleKind::Constant;
  double eta = 1.0;      // Constant
  double fstar = 0.0;    // MirrorPolyak: known optimal value of the full objective
  double c = 1.0;        // Polyak-family scaling
  double eta_b = std::numeric_limits<double>::infinity();  // MSPSMax cap
  double tau = 1.0;      // SmoothedMSPSMax decay, in (0,1]
  int batch_b = 1;       // smoothing exponent is tau^(batch_b/n)
  int n = 1;
  double eta_init = 1.0;
  double eta_prev = 1.0;  // mutable smoothing state, owned by one run

  static StepsizeRule constant(double eta) {
    if (!(eta > 0.0)) throw DomainError("constant stepsize must be positive");
    StepsizeRule r;
    r.kind = RuleKind::Constant;
    r.eta = eta;
    return r;
  }

  static StepsizeRule mirror_polyak(double fstar) {
    StepsizeRule r;
    r.kind = RuleKind::MirrorPolyak;
    r.fstar = fstar;
    return r;
  }

  static StepsizeRule msps(double c) {
    if (!(c > 0.0)) throw DomainError("msps requires c > 0");
    StepsizeRule r;
    r.kind = RuleKind::MSPS;
    r.c = c;
    return r;
  }

  static StepsizeRule msps_max(double c, double eta_b) {
    if (!(c > 0.0) || !(eta_b > 0.0)) throw DomainError("msps_max requires c > 0 and eta_b > 0");
    StepsizeRule r;
    r.kind = RuleKind::MSPSMax;
    r.c = c;
    r.eta_b = eta_b;
    return r;
  }

  static StepsizeRule smoothed_msps_max(double c, double tau, int batch_b, int n,
                                        double eta_init = 1.0) {
    if (!(c > 0.0)) throw DomainError("smoothed msps_max requires c > 0");
    if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("smoothing tau must lie in (0,1]");
    if (batch_b < 1 || n < 1) throw DomainError("smoothing batch and n must be positive");
    if (!(eta_init > 0.0)) throw DomainError("smoothing eta_init must be positive");
    StepsizeRule r;
    r.kind = RuleKind::SmoothedMSPSMax;
    r.c = c;
    r.tau = tau;
    r.batch_b = batch_b;
    r.n = n;
    r.eta_init = eta_init;
    r.eta_prev = eta_init;
    return r;
  }

  std::string describe() const {
    switch (kind) {
      case RuleKind::Constant: return "constant(" + std::to_string(eta) + ")";
      case RuleKind::MirrorPolyak: return "polyak";
      case RuleKind::MSPS: return "msps(c=" + std::to_string(c) + ")";
      case RuleKind::MSPSMax:
        return "msps_max(c=" + std::to_string(c) + ",eta_b=" + std::to_string(eta_b) + ")";
      case RuleKind::SmoothedMSPSMax: return "smoothed_msps_max(c=" + std::to_string(c) + ")";
    }
    return "?";
  }
};

// Everything a stepsize rule may look at for one step: sampled component
// value f_i(x_t), its infimum f_i^*, the sampled gradient, and the geometry.
struct StepContext {
  double loss_value = 0.0;
  double loss_inf = 0.0;
  const Vec& grad;
  double mu_psi = 1.0;
  NormTag dual_norm_tag;  // primal tag; gradients are measured in its dual
  long t = 0;
};

// eta_t. Polyak family: mu_psi (f_i(x_t) - f_i^*) / (c ‖grad f_i(x_t)‖_*^2),
// capped by eta_b for the max variants. Returns 0 at a converged component.
inline double stepsize(StepsizeRule& rule, const StepContext& ctx) {
  if (rule.kind == RuleKind::Constant) return rule.eta;

  const double reference = rule.kind == RuleKind::MirrorPolyak ? rule.fstar : ctx.loss_inf;
  const double gap = std::max(ctx.loss_value - reference, 0.0);
  const double gsq = dual_norm_sq(ctx.dual_norm_tag, ctx.grad);
  if (std::sqrt(gsq) <= 1e-300) {
    if (gap > 1e-12)
      throw ZeroGradientAtNonOptimum("zero gradient with positive gap at step " +
                                     std::to_string(ctx.t));
    return 0.0;
  }

  switch (rule.kind) {
    case RuleKind::MirrorPolyak: return ctx.mu_psi * gap / gsq;
    case RuleKind::MSPS: return ctx.mu_psi * gap / (rule.c * gsq);
    case RuleKind::MSPSMax: return std::min(ctx.mu_psi * gap / (rule.c * gsq), rule.eta_b);
    case RuleKind::SmoothedMSPSMax: {
      const double bound =
          std::pow(rule.tau, static_cast<double>(rule.batch_b) / static_cast<double>(rule.n)) *
          rule.eta_prev;
      const double v = std::min(ctx.mu_psi * gap / (rule.c * gsq), bound);
      rule.eta_prev = v;
      return v;
    }
    default: return rule.eta;
  }
}

struct MspsBounds {
  double lower;
  double upper;  // +inf when no strong convexity constant is supplied
};

// Sandwich bounds mu_psi/(2cL) <= eta_t <= mu_psi/(2c mu) for L-smooth
// (and mu-strongly convex) components.
inline MspsBounds msps_bounds(double c, double mu_psi, double L,
                              std::optional<double> mu = std::nullopt) {
  if (!(c > 0.0 && mu_psi > 0.0 && L > 0.0)) throw DomainError("msps_bounds requires positive c, mu_psi, L");
  if (mu && !(*mu > 0.0 && *mu <= L)) throw DomainError("msps_bounds requires 0 < mu <= L");
  MspsBounds b;
  b.lower = mu_psi / (2.0 * c * L);
  b.upper = mu ? mu_psi / (2.0 * c * *mu) : std::numeric_limits<double>::infinity();
  return b;
}

// alpha = min{mu_psi/(2cL), eta_b}, the effective rate constant of the
// capped Polyak stepsize.
inline double alpha_constant(double c, double mu_psi, double L, double eta_b) {
  if (!(c > 0.0 && mu_psi > 0.0 && L > 0.0 && eta_b > 0.0))
    throw DomainError("alpha_constant requires positive arguments");
  return std::min(mu_psi / (2.0 * c * L), eta_b);
}

struct PlConstants {
  double alpha = 0.0;
  double nu = 0.0;
  bool valid = false;
};

// Constants for preconditioned SGD under the PL condition:
// alpha = min{1/(2 c L_max), eta_b}, nu = eta_b (1/alpha - 2 mu + L_max/(2c)).
// valid requires c > L_max/(4 mu), eta_b below the two-case cap, nu in (0,1).
inline PlConstants pl_constants(double c, double mu_psi, double L_max, double mu_pl, double eta_b) {
  if (!(c > 0.0 && mu_psi > 0.0 && L_max > 0.0 && mu_pl > 0.0 && eta_b > 0.0))
    throw DomainError("pl_constants requires positive arguments");
  PlConstants out;
  out.alpha = std::min(mu_psi / (2.0 * c * L_max), eta_b);
  const double slope = 1.0 / out.alpha - 2.0 * mu_pl + L_max / (2.0 * c);
  out.nu = eta_b * slope;
  const double cap = std::max(slope > 0.0 ? 1.0 / slope : std::numeric_limits<double>::infinity(),
                              1.0 / (2.0 * c * L_max));
  out.valid = (c > L_max / (4.0 * mu_pl)) && (eta_b < cap) && (out.nu > 0.0) && (out.nu < 1.0);
  return out;
}

}  // namespace mirroropt
