#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mirroropt/constraints.hpp"
#include "mirroropt/digest.hpp"
#include "mirroropt/errors.hpp"
#include "mirroropt/geometry.hpp"
#include "mirroropt/problems.hpp"
#include "mirroropt/rng.hpp"
#include "mirroropt/stepsizes.hpp"

namespace mirroropt {

// Seen by the optional per-step observer; used by the invariant tests.
struct StepInfo {
  long t = 0;           // index of the iterate the step leaves from (1-based)
  int component = -1;   // sampled index, -1 for full-gradient runs
  double eta = 0.0;
  const Vec& x_before;
  const Vec& grad;
  const Vec& x_after;
};

struct RunConfig {
  MirrorMap map;
  FeasibleSet set;
  StepsizeRule rule;
  long iterations = 100;       // number of mirror descent steps
  std::uint64_t seed = 0;
  Vec x_init;
  long record_every = 1;
  std::optional<Vec> xstar_for_metrics;
  bool track_running_bf = false;  // per-step B_f running average (full gradient each step)
  std::function<void(const StepInfo&)> observer;
};

// Metrics of one recorded iterate. t counts iterates, t=1 is the initial
// point. Averages (f_avg_gap, bf_avg) run over iterates 1..t; f_best_gap is
// the minimum over recorded iterates. Without a reference x_*, the gap
// fields hold raw values and the trajectory is flagged.
struct IterateRecord {
  long t = 0;
  double eta = 0.0;
  double f_gap = 0.0;
  double bpsi = 0.0;
  double bf = 0.0;
  double f_avg_gap = 0.0;
  double f_best_gap = 0.0;
  double bf_avg = 0.0;
};

struct Trajectory {
  std::vector<IterateRecord> records;
  Vec final_x;
  std::string config_digest;
  bool has_xstar = false;
  bool diverged = false;
  long diverged_at = -1;
  double max_dual_grad_norm = 0.0;
};

namespace detail {

inline std::string run_digest(const RunConfig& cfg) {
  Fnv1a h;
  h.add_str(cfg.map.describe());
  h.add_str(cfg.set.describe());
  h.add_str(cfg.rule.describe());
  h.add_double(cfg.rule.eta);
  h.add_double(cfg.rule.c);
  h.add_double(cfg.rule.eta_b);
  h.add_double(cfg.rule.fstar);
  h.add_u64(static_cast<std::uint64_t>(cfg.iterations));
  h.add_u64(cfg.seed);
  h.add_u64(static_cast<std::uint64_t>(cfg.record_every));
  for (Eigen::Index i = 0; i < cfg.x_init.size(); ++i) h.add_double(cfg.x_init[i]);
  return h.hex();
}

inline bool diverged_coord(const Vec& x) {
  return !x.allFinite() || x.cwiseAbs().maxCoeff() > 1e150;
}

// Core loop shared by the stochastic and deterministic drivers.
inline Trajectory run_loop(const FiniteSumProblem& problem, const RunConfig& cfg, bool stochastic) {
  if (cfg.iterations < 1) throw DomainError("run: iterations must be >= 1");
  if (cfg.record_every < 1) throw DomainError("run: record_every must be >= 1");
  if (!cfg.set.contains(cfg.x_init)) throw DomainError("run: x_init must be feasible");
  if (!cfg.map.interior(cfg.x_init)) throw DomainError("run: x_init must be interior to the map");

  const bool polyak_family = cfg.rule.kind != RuleKind::Constant;
  if (stochastic && polyak_family && cfg.rule.kind != RuleKind::MirrorPolyak) {
    for (const auto& c : problem.components)
      if (!std::isfinite(c.inf_unconstrained))
        throw DomainError("run: Polyak-family rules need finite component infima");
  }

  const bool has_xstar = cfg.xstar_for_metrics.has_value();
  Vec xstar;
  double fstar = 0.0;
  if (has_xstar) {
    xstar = *cfg.xstar_for_metrics;
    fstar = problem.known_fstar ? *problem.known_fstar : problem.value(xstar);
  }

  Trajectory traj;
  traj.has_xstar = has_xstar;
  traj.config_digest = run_digest(cfg);

  StepsizeRule rule = cfg.rule;  // own the smoothing state for this run
  SplitMix64 rng(cfg.seed);
  const NormTag primal = cfg.map.primal_norm();
  const double mu_psi = cfg.map.mu_psi();
  const auto ncomp = static_cast<std::uint64_t>(problem.n());

  Vec x = cfg.x_init;
  Vec sum_x = x;
  double bf_sum = 0.0;
  if (cfg.track_running_bf && has_xstar) bf_sum = problem.bregman_f(xstar, x);
  double best_gap = std::numeric_limits<double>::infinity();

  auto record = [&](long t, double eta) {
    IterateRecord r;
    r.t = t;
    r.eta = eta;
    const double fx = problem.value(x);
    r.f_gap = has_xstar ? fx - fstar : fx;
    best_gap = std::min(best_gap, r.f_gap);
    r.f_best_gap = best_gap;
    const Vec xbar = sum_x / static_cast<double>(t);
    r.f_avg_gap = has_xstar ? problem.value(xbar) - fstar : problem.value(xbar);
    if (has_xstar) {
      r.bpsi = cfg.map.bregman(xstar, x);
      r.bf = problem.bregman_f(xstar, x);
      r.bf_avg = cfg.track_running_bf ? bf_sum / static_cast<double>(t) : 0.0;
    }
    traj.records.push_back(r);
  };

  const auto due = [&](long t) { return (t - 1) % cfg.record_every == 0; };

  double last_eta = 0.0;
  for (long t = 1; t <= cfg.iterations; ++t) {
    int idx = -1;
    double loss_value, loss_inf;
    Vec g;
    if (stochastic) {
      idx = static_cast<int>(rng.below(ncomp));
      const auto& comp = problem.components[static_cast<size_t>(idx)];
      loss_value = comp.value(x);
      loss_inf = comp.inf_unconstrained;
      g = comp.grad(x);
    } else {
      loss_value = problem.value(x);
      loss_inf = problem.known_fstar.value_or(rule.fstar);
      g = problem.grad(x);
    }

    const double gnorm = std::sqrt(dual_norm_sq(primal, g));
    traj.max_dual_grad_norm = std::max(traj.max_dual_grad_norm, gnorm);

    const StepContext ctx{loss_value, loss_inf, g, mu_psi, primal, t};
    const double eta = stepsize(rule, ctx);
    last_eta = eta;

    if (due(t)) record(t, eta);

    const Vec x_next = mirror_step(cfg.map, cfg.set, x, g, eta);
    if (cfg.observer) cfg.observer(StepInfo{t, idx, eta, x, g, x_next});
    if (diverged_coord(x_next)) {
      traj.diverged = true;
      traj.diverged_at = t;
      traj.final_x = x;
      return traj;
    }
    x = x_next;
    sum_x += x;
    if (cfg.track_running_bf && has_xstar) bf_sum += problem.bregman_f(xstar, x);
  }
  record(cfg.iterations + 1, last_eta);
  traj.final_x = x;
  return traj;
}

}  // namespace detail

// Stochastic mirror descent: i.i.d. uniform component sampling, one mirror
// step per iteration.
inline Trajectory run_smd(const FiniteSumProblem& problem, const RunConfig& cfg) {
  return detail::run_loop(problem, cfg, true);
}

// Full-gradient mirror descent; pairs with the MirrorPolyak rule, which
// needs the optimal value of the full objective.
inline Trajectory run_deterministic_md(const FiniteSumProblem& problem, const RunConfig& cfg) {
  return detail::run_loop(problem, cfg, false);
}

// Means and standard errors over replicate runs, on a shared record grid.
struct MonteCarloSummary {
  std::vector<long> t;
  std::vector<double> eta_mean;
  std::vector<double> f_gap_mean, f_gap_se;
  std::vector<double> bpsi_mean, bpsi_se;
  std::vector<double> bf_mean, bf_se;
  std::vector<double> favg_gap_mean, favg_gap_se;
  std::vector<double> fbest_gap_mean;
  std::vector<double> bf_avg_mean, bf_avg_se;
  std::vector<Vec> final_xs;  // one per completed replicate, in replicate order
  int replicates = 0;
  int diverged = 0;
  bool has_xstar = false;
};

namespace detail {

struct Welford {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  void push(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double se() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace detail

// Replicate r runs with seed cfg.seed + r; aggregation is in replicate order,
// so the summary is a pure function of (problem, cfg, replicates). Fails if
// more than 1% of replicates diverge.
inline MonteCarloSummary monte_carlo(const FiniteSumProblem& problem, const RunConfig& cfg,
                                     int replicates) {
  if (replicates < 1) throw DomainError("monte_carlo: replicates must be >= 1");

  std::vector<detail::Welford> eta, fgap, bpsi, bf, favg, fbest, bfavg;
  MonteCarloSummary out;
  out.replicates = replicates;

  for (int r = 0; r < replicates; ++r) {
    RunConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(r);
    const Trajectory traj = run_smd(problem, c);
    if (traj.diverged) {
      ++out.diverged;
      continue;
    }
    if (out.t.empty()) {
      out.has_xstar = traj.has_xstar;
      for (const auto& rec : traj.records) out.t.push_back(rec.t);
      const size_t m = traj.records.size();
      eta.resize(m);
      fgap.resize(m);
      bpsi.resize(m);
      bf.resize(m);
      favg.resize(m);
      fbest.resize(m);
      bfavg.resize(m);
    }
    for (size_t k = 0; k < traj.records.size(); ++k) {
      const auto& rec = traj.records[k];
      eta[k].push(rec.eta);
      fgap[k].push(rec.f_gap);
      bpsi[k].push(rec.bpsi);
      bf[k].push(rec.bf);
      favg[k].push(rec.f_avg_gap);
      fbest[k].push(rec.f_best_gap);
      bfavg[k].push(rec.bf_avg);
    }
    out.final_xs.push_back(traj.final_x);
  }

  if (out.diverged > 0 && static_cast<double>(out.diverged) > 0.01 * replicates)
    throw NumericalDivergence(std::to_string(out.diverged) + " of " + std::to_string(replicates) +
                              " replicates diverged");
  if (out.t.empty()) throw NumericalDivergence("all replicates diverged");

  const size_t m = out.t.size();
  for (size_t k = 0; k < m; ++k) {
    out.eta_mean.push_back(eta[k].mean);
    out.f_gap_mean.push_back(fgap[k].mean);
    out.f_gap_se.push_back(fgap[k].se());
    out.bpsi_mean.push_back(bpsi[k].mean);
    out.bpsi_se.push_back(bpsi[k].se());
    out.bf_mean.push_back(bf[k].mean);
    out.bf_se.push_back(bf[k].se());
    out.favg_gap_mean.push_back(favg[k].mean);
    out.favg_gap_se.push_back(favg[k].se());
    out.fbest_gap_mean.push_back(fbest[k].mean);
    out.bf_avg_mean.push_back(bfavg[k].mean);
    out.bf_avg_se.push_back(bfavg[k].se());
  }
  return out;
}

}  // namespace mirroropt
