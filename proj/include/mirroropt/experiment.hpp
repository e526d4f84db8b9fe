#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirroropt/analysis.hpp"
#include "mirroropt/config.hpp"
#include "mirroropt/csv.hpp"
#include "mirroropt/solver.hpp"
#include "mirroropt/version.hpp"

namespace mirroropt {

// A built problem plus the exact curvature constants the config kind makes
// available; bound emission only uses constants that are exact.
struct BuiltProblem {
  FiniteSumProblem problem;
  std::string kind;
  double rel_mu = std::numeric_limits<double>::quiet_NaN();  // relative strong convexity
  double rel_L = std::numeric_limits<double>::quiet_NaN();   // relative smoothness
  bool lifted = false;
  double lift_lambda = 0.0;
};

namespace detail {

inline Mat random_stochastic_matrix(int m, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Mat P(m, m);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      P(i, j) = 0.1 + rng.uniform();
      s += P(i, j);
    }
    P.row(i) /= s;
  }
  return P;
}

inline std::pair<Mat, Vec> random_interpolating_system(int rows, int cols, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Mat A(rows, cols);
  Vec x0(cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
  for (int j = 0; j < cols; ++j) x0[j] = rng.normal();
  return {A, x0};
}

inline Dataset dataset_from_spec(const std::string& spec) {
  if (spec.rfind("synth:", 0) == 0) {
    const auto parts = split(spec.substr(6), ',');
    if (parts.size() != 4) throw ParseError("dataset synth spec needs n,d,margin,seed");
    return synth_margin_dataset(static_cast<int>(parse_long(parts[0], 0)),
                                static_cast<int>(parse_long(parts[1], 0)),
                                parse_double(parts[2], 0),
                                static_cast<std::uint64_t>(parse_long(parts[3], 0)));
  }
  return read_libsvm(spec);
}

}  // namespace detail

inline FeasibleSet build_set(const ExperimentConfig& cfg, int dim) {
  if (cfg.set_kind == "reals") return FeasibleSet::reals(dim);
  if (cfg.set_kind == "nonneg") return FeasibleSet::nonneg(dim);
  if (cfg.set_kind == "box") return FeasibleSet::box(cfg.lo, cfg.hi, dim);
  if (cfg.set_kind == "simplex") return FeasibleSet::simplex(dim);
  if (cfg.set_kind == "l1ball") return FeasibleSet::l1_ball(cfg.lambda, dim);
  throw ParseError("unknown set kind '" + cfg.set_kind + "'");
}

inline MirrorMap build_map(const ExperimentConfig& cfg, int dim) {
  if (cfg.map_kind == "euclidean") return MirrorMap::euclidean(dim);
  if (cfg.map_kind == "pnorm") return MirrorMap::pnorm(cfg.p, dim);
  if (cfg.map_kind == "negentropy") return MirrorMap::neg_entropy(dim);
  throw ParseError("unknown map kind '" + cfg.map_kind + "'");
}

// Fixed quadratic ensembles whose constrained infima all sit at the same
// boundary point, separating the constrained neighborhood from the classic
// ones.
inline std::vector<QuadCoeffs> discriminating_nonneg_coeffs() {
  return {{1.0, 2.0, 0.0}, {2.0, 1.0, 0.0}, {0.5, 3.0, 0.0}};
}

inline std::vector<QuadCoeffs> discriminating_box_coeffs() {
  return {{1.5, 0.2, 0.0}, {-0.5, 1.2, 0.0}, {1.0, 0.1, 0.0}};
}

inline BuiltProblem build_problem(const ExperimentConfig& cfg) {
  BuiltProblem out{quad1d_problem({{1, 0, 0}}, FeasibleSet::reals(1)), cfg.problem_kind};

  if (cfg.problem_kind == "quad1d" || cfg.problem_kind == "companion_nonneg" ||
      cfg.problem_kind == "companion_box") {
    std::vector<QuadCoeffs> coeffs = cfg.coeffs;
    FeasibleSet set = build_set(cfg, 1);
    if (cfg.problem_kind == "companion_nonneg") {
      coeffs = discriminating_nonneg_coeffs();
      set = FeasibleSet::nonneg(1);
    } else if (cfg.problem_kind == "companion_box") {
      coeffs = discriminating_box_coeffs();
      set = FeasibleSet::box(0.0, 1.0, 1);
    }
    if (coeffs.empty()) throw ParseError("quad1d needs coeffs");
    out.problem = quad1d_problem(coeffs, set);
    double abar = 0.0, amax = 0.0;
    for (const auto& q : coeffs) {
      abar += q.a;
      amax = std::max(amax, std::abs(q.a));
    }
    abar /= static_cast<double>(coeffs.size());
    if (abar > 0.0) out.rel_mu = 2.0 * abar;
    out.rel_L = 2.0 * amax;
    return out;
  }

  if (cfg.problem_kind == "linear_system") {
    const auto [A, x0] = detail::random_interpolating_system(cfg.rows, cfg.cols, cfg.system_seed);
    Vec b(cfg.rows);
    for (int i = 0; i < cfg.rows; ++i) b[i] = Vec(A.row(i).transpose()).dot(x0);
    out.problem = linear_system_problem(A, b, build_set(cfg, cfg.cols), NormTag::l2(), x0);
    Eigen::SelfAdjointEigenSolver<Mat> es(A.transpose() * A / static_cast<double>(cfg.rows));
    out.rel_mu = es.eigenvalues().minCoeff();
    out.rel_L = out.problem.max_smoothness();
    return out;
  }

  if (cfg.problem_kind == "markov") {
    out.problem = markov_problem(detail::random_stochastic_matrix(cfg.markov_m, cfg.markov_seed));
    out.rel_L = 1.0;  // unit-smooth relative to entropy on the simplex
    return out;
  }

  if (cfg.problem_kind == "logistic") {
    if (cfg.dataset.empty()) throw ParseError("logistic needs a dataset");
    Dataset ds = detail::dataset_from_spec(cfg.dataset);
    if (cfg.rbf_bandwidth) ds = rbf_features(ds, *cfg.rbf_bandwidth);
    const int d = ds.d();
    FeasibleSet set = build_set(cfg, d);
    auto p = logistic_problem(ds, set);
    if (set.kind() == SetKind::L1Ball && cfg.map_kind == "negentropy") {
      out.problem = lift_problem(p, cfg.lambda);
      out.lifted = true;
      out.lift_lambda = cfg.lambda;
    } else {
      out.problem = std::move(p);
    }
    return out;
  }

  throw ParseError("unknown problem kind '" + cfg.problem_kind + "'");
}

inline Vec build_x_init(const ExperimentConfig& cfg, const FeasibleSet& set) {
  const int d = set.dim();
  if (cfg.x_init != "auto") {
    const auto parts = detail::split(cfg.x_init, ',');
    Vec x(static_cast<Eigen::Index>(parts.size()));
    for (size_t i = 0; i < parts.size(); ++i) x[static_cast<Eigen::Index>(i)] = detail::parse_double(parts[i], 0);
    if (x.size() != d) throw ParseError("x_init has wrong dimension");
    return x;
  }
  switch (set.kind()) {
    case SetKind::Simplex: return Vec::Constant(d, 1.0 / d);
    case SetKind::Box: return 0.5 * (set.lo() + set.hi());
    case SetKind::NonNeg: return Vec::Ones(d);
    case SetKind::Reals: return Vec::Zero(d);
    case SetKind::L1Ball: return Vec::Zero(d);
  }
  return Vec::Zero(d);
}

inline StepsizeRule build_rule(const RuleSpec& spec, const BuiltProblem& built) {
  if (spec.kind == "constant") return StepsizeRule::constant(spec.params[0]);
  if (spec.kind == "msps") return StepsizeRule::msps(spec.params[0]);
  if (spec.kind == "msps_max") return StepsizeRule::msps_max(spec.params[0], spec.params[1]);
  if (spec.kind == "smoothed_msps_max")
    return StepsizeRule::smoothed_msps_max(spec.params[0], spec.params[1],
                                           static_cast<int>(spec.params[2]),
                                           static_cast<int>(spec.params[3]), spec.params[4]);
  if (spec.kind == "polyak") {
    if (!built.problem.known_fstar)
      throw MissingOptimum("polyak rule needs a problem with a known optimal value");
    return StepsizeRule::mirror_polyak(*built.problem.known_fstar);
  }
  throw ParseError("unknown rule kind '" + spec.kind + "'");
}

// sweep_constant lo hi count expands to a log-spaced grid of constant rules
inline std::vector<std::pair<std::string, StepsizeRule>> expand_rules(const ExperimentConfig& cfg,
                                                                      const BuiltProblem& built) {
  std::vector<std::pair<std::string, StepsizeRule>> out;
  auto rule_name = [](const std::string& kind, const std::vector<double>& params) {
    std::string name = kind;
    for (double v : params) {
      std::ostringstream os;
      os << "_" << v;
      name += os.str();
    }
    return name;
  };
  for (const auto& spec : cfg.rules) {
    if (spec.kind == "sweep_constant") {
      const double lo = spec.params[0], hi = spec.params[1];
      const int count = static_cast<int>(spec.params[2]);
      if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw ParseError("bad sweep_constant grid");
      for (int k = 0; k < count; ++k) {
        const double eta =
            std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (count - 1));
        out.emplace_back(rule_name("constant", {eta}), StepsizeRule::constant(eta));
      }
    } else {
      out.emplace_back(rule_name(spec.kind, spec.params), build_rule(spec, built));
    }
  }
  return out;
}

// Bound curves with exact constants for this (problem, map, rule) triple.
struct EmittedBound {
  std::string name;
  BoundSpec spec;
  bool geometric;  // bound argument counts steps rather than averaged iterates
};

inline std::vector<EmittedBound> applicable_bounds(const BuiltProblem& built, const MirrorMap& map,
                                                   const StepsizeRule& rule, double B1) {
  std::vector<EmittedBound> out;
  const bool euclid = map.kind() == MapKind::Euclidean;
  const bool entropy = map.kind() == MapKind::NegEntropy;

  if (rule.kind == RuleKind::Constant) {
    if (euclid && std::isfinite(built.rel_mu) && built.rel_mu > 0.0 && std::isfinite(built.rel_L) &&
        rule.eta <= 1.0 / built.rel_L + 1e-12) {
      BoundSpec s;
      s.kind = BoundKind::RelStrongConst;
      s.mu = built.rel_mu;
      s.L = built.rel_L;
      s.eta = rule.eta;
      s.B1 = B1;
      s.sigma_sq_X = sigma_sq_constrained(built.problem);
      out.push_back({"rel_strong_const", s, true});
    }
    if (entropy && std::isfinite(built.rel_L) && rule.eta <= 1.0 / built.rel_L + 1e-12) {
      BoundSpec s;
      s.kind = BoundKind::RelSmoothConst;
      s.L = built.rel_L;
      s.eta = rule.eta;
      s.B1 = B1;
      s.sigma_sq_X = sigma_sq_constrained(built.problem);
      out.push_back({"rel_smooth_const", s, false});
    }
  }
  if (rule.kind == RuleKind::MSPSMax && euclid && std::isfinite(built.rel_mu) &&
      built.rel_mu > 0.0 && rule.c >= 0.5) {
    const double L = built.problem.max_smoothness();
    const double s2 = sigma_sq(built.problem);
    if (std::isfinite(s2)) {
      BoundSpec s;
      s.kind = BoundKind::RelStrongPolyakMax;
      s.mu = built.rel_mu;
      s.L = L;
      s.alpha = alpha_constant(rule.c, map.mu_psi(), L, rule.eta_b);
      s.eta_b = rule.eta_b;
      s.B1 = B1;
      s.sigma_sq = s2;
      out.push_back({"rel_strong_polyak_max", s, true});
    }
  }
  return out;
}

struct RunReport {
  std::string manifest_path;
  int rules_run = 0;
  int rules_diverged = 0;
};

// cmd_run: one CSV per rule, bound curves where exact constants exist, and
// a manifest tying outputs to the config digest, seed, and library version.
inline RunReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                bool quiet = false) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const BuiltProblem built = build_problem(cfg);
  const FiniteSumProblem& problem = built.problem;
  const MirrorMap map = build_map(cfg, problem.dim);
  const FeasibleSet& set = problem.set;  // possibly the lifted simplex
  Vec x1 = build_x_init(cfg, set);
  if (built.lifted && cfg.x_init != "auto") x1 = l1_lift(built.lift_lambda, x1);
  if (built.lifted && cfg.x_init == "auto") x1 = Vec::Constant(set.dim(), 1.0 / set.dim());

  nlohmann::json manifest;
  manifest["config_digest"] = cfg.digest();
  manifest["seed"] = cfg.seed;
  manifest["version"] = kVersion;
  manifest["problem"] = cfg.problem_kind;
  manifest["rules"] = nlohmann::json::array();
  manifest["bounds"] = nlohmann::json::array();
  if (!problem.known_xstar) manifest["note"] = "no reference minimizer; gap columns hold raw values";

  RunReport report;
  for (const auto& [name, rule] : expand_rules(cfg, built)) {
    RunConfig rc{map, set, rule, cfg.iterations, cfg.seed, x1};
    rc.record_every = cfg.record_every;
    rc.xstar_for_metrics = problem.known_xstar;

    nlohmann::json entry;
    entry["name"] = name;
    ++report.rules_run;
    try {
      const MonteCarloSummary s = monte_carlo(problem, rc, cfg.replicates);
      const std::string file = name + ".csv";
      CsvWriter csv(out_dir + "/" + file,
                    {"t", "eta_mean", "f_gap_mean", "f_gap_se", "bpsi_mean", "bpsi_se", "bf_mean",
                     "bf_se", "favg_gap_mean", "favg_gap_se", "fbest_gap_mean"});
      for (size_t k = 0; k < s.t.size(); ++k)
        csv.row({static_cast<double>(s.t[k]), s.eta_mean[k], s.f_gap_mean[k], s.f_gap_se[k],
                 s.bpsi_mean[k], s.bpsi_se[k], s.bf_mean[k], s.bf_se[k], s.favg_gap_mean[k],
                 s.favg_gap_se[k], s.fbest_gap_mean[k]});
      entry["file"] = file;
      entry["status"] = "ok";
      entry["diverged_replicates"] = s.diverged;

      if (problem.known_xstar) {
        const double B1 = map.bregman(*problem.known_xstar, x1);
        for (const auto& b : applicable_bounds(built, map, rule, B1)) {
          const std::string bfile = "bounds_" + name + "_" + b.name + ".csv";
          CsvWriter bcsv(out_dir + "/" + bfile, {"t", "bound"});
          std::vector<long> ts;
          for (long t : s.t) ts.push_back(b.geometric ? t - 1 : t);
          const auto curve = bound_curve(b.spec, ts);
          for (size_t k = 0; k < s.t.size(); ++k)
            bcsv.row({static_cast<double>(s.t[k]), curve[k]});
          manifest["bounds"].push_back({{"rule", name}, {"file", bfile}, {"kind", b.name}});
        }
      }
    } catch (const NumericalDivergence& e) {
      entry["status"] = "diverged";
      entry["detail"] = e.what();
      ++report.rules_diverged;
      if (!quiet) std::cerr << "rule " << name << " diverged: " << e.what() << "\n";
    }
    manifest["rules"].push_back(entry);
  }

  const std::string mpath = out_dir + "/manifest.json";
  std::ofstream mout(mpath);
  mout << manifest.dump(2) << "\n";
  report.manifest_path = mpath;
  if (!quiet)
    std::cout << "wrote " << report.rules_run << " rule(s) to " << out_dir << " ("
              << report.rules_diverged << " diverged)\n";
  return report;
}

// cmd_sigma: the neighborhood quantities and the interpolation report.
inline int sigma_report(const ExperimentConfig& cfg, std::ostream& os) {
  const BuiltProblem built = build_problem(cfg);
  const FiniteSumProblem& p = built.problem;
  if (!p.known_xstar) {
    os << "error: this problem exposes no reference minimizer; supply one via a problem kind "
          "with a deterministic solve (quad1d, linear_system, markov)\n";
    return 1;
  }
  const Vec& xs = *p.known_xstar;
  const double s2 = sigma_sq(p);
  const double s2x = sigma_sq_constrained(p);
  const double g2 = mean_grad_norm_sq_at(p, xs);
  const auto rep = interpolation_check(p, xs, 1e-8);
  os << "sigma_sq = " << format_double(s2) << "\n";
  os << "sigma_sq_constrained = " << format_double(s2x) << "\n";
  os << "mean_grad_norm_sq_at_opt = " << format_double(g2) << "\n";
  os << "constrained_interpolation = " << (rep.sigma_x_zero ? "true" : "false") << "\n";
  os << "xstar_minimizes_every_component = "
     << (rep.xstar_in_all_component_minima ? "true" : "false") << "\n";
  return 0;
}

}  // namespace mirroropt
