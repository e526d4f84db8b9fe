#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mirroropt/config.hpp"
#include "mirroropt/experiment.hpp"

using namespace mirroropt;

namespace {

const char* kMarkovConfig = R"(# stationary distribution benchmark
[problem]
kind = markov
markov_m = 5
markov_seed = 11

[map]
kind = negentropy

[set]
kind = simplex

[rules]
rule = constant 1.0
rule = msps 1.0

[run]
iterations = 300
replicates = 50
record_every = 1
seed = 42
x_init = auto
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(kMarkovConfig);
  CHECK(cfg.problem_kind == "markov");
  CHECK(cfg.markov_m == 5);
  CHECK(cfg.map_kind == "negentropy");
  CHECK(cfg.set_kind == "simplex");
  REQUIRE(cfg.rules.size() == 2);
  CHECK(cfg.rules[0].kind == "constant");
  CHECK(cfg.rules[0].params[0] == 1.0);
  CHECK(cfg.iterations == 300);
  CHECK(cfg.seed == 42);

  SECTION("round trips losslessly through the normalized form") {
    const std::string one = cfg.serialize();
    const ExperimentConfig again = parse_config(one);
    CHECK(again.serialize() == one);
    CHECK(again.digest() == cfg.digest());
  }
  SECTION("unknown keys are errors") {
    CHECK_THROWS_AS(parse_config("[problem]\nkind = markov\nbogus = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nkind = markov\n"), ParseError);
    CHECK_THROWS_AS(parse_config("kind = markov\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[rules]\nrule = warp 1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_config("[rules]\nrule = constant\n"), ParseError);
  }
  SECTION("configs without rules are rejected") {
    CHECK_THROWS_AS(parse_config("[problem]\nkind = markov\n"), ParseError);
  }
  SECTION("quadratic coefficient lists") {
    const auto q = parse_config(
        "[problem]\nkind = quad1d\ncoeffs = 1,0,0 ; 0.5,-2,1\n[set]\nkind = box\nlo = 0\nhi = "
        "1\n[rules]\nrule = constant 0.25\n");
    REQUIRE(q.coeffs.size() == 2);
    CHECK(q.coeffs[1].b == -2.0);
  }
  SECTION("sweeps expand to log grids") {
    const auto s = parse_config(
        "[problem]\nkind = companion_nonneg\n[rules]\nrule = sweep_constant 1e-5 1e5 11\n");
    const auto built = build_problem(s);
    const auto rules = expand_rules(s, built);
    REQUIRE(rules.size() == 11);
    CHECK(rules.front().second.eta == Catch::Approx(1e-5));
    CHECK(rules.back().second.eta == Catch::Approx(1e5));
    CHECK(rules[5].second.eta == Catch::Approx(1.0));
  }
}

TEST_CASE("experiment runner") {
  const auto tmp = std::filesystem::temp_directory_path();

  SECTION("markov run emits csvs, bounds, and a manifest") {
    ExperimentConfig cfg = parse_config(kMarkovConfig);
    cfg.replicates = 20;
    cfg.iterations = 100;
    const auto dir = (tmp / "mo_run_a").string();
    std::filesystem::remove_all(dir);
    const auto report = run_experiment(cfg, dir, true);
    CHECK(report.rules_run == 2);
    CHECK(report.rules_diverged == 0);
    CHECK(std::filesystem::exists(dir + "/constant_1.csv"));
    CHECK(std::filesystem::exists(dir + "/msps_1.csv"));
    CHECK(std::filesystem::exists(dir + "/bounds_constant_1_rel_smooth_const.csv"));
    CHECK(std::filesystem::exists(dir + "/manifest.json"));
    const std::string head = slurp(dir + "/constant_1.csv").substr(0, 200);
    CHECK(head.rfind("t,eta_mean,f_gap_mean,f_gap_se,bpsi_mean,bpsi_se,bf_mean,bf_se,"
                     "favg_gap_mean,favg_gap_se,fbest_gap_mean",
                     0) == 0);
  }

  SECTION("identical config and seed give byte-identical outputs") {
    ExperimentConfig cfg = parse_config(kMarkovConfig);
    cfg.replicates = 10;
    cfg.iterations = 60;
    const auto d1 = (tmp / "mo_run_b1").string();
    const auto d2 = (tmp / "mo_run_b2").string();
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
    run_experiment(cfg, d1, true);
    run_experiment(cfg, d2, true);
    for (const auto& f : {"constant_1.csv", "msps_1.csv", "manifest.json"}) {
      REQUIRE(slurp(d1 + "/" + std::string(f)) == slurp(d2 + "/" + std::string(f)));
    }
  }

  SECTION("diverged sweep entries are flagged, not fatal") {
    ExperimentConfig cfg = parse_config(
        "[problem]\nkind = quad1d\ncoeffs = 1,0,0\n[set]\nkind = reals\n[rules]\nrule = "
        "sweep_constant 1e-2 1e5 8\n[run]\niterations = 50\nreplicates = 5\nseed = 3\nx_init = "
        "1.0\n");
    const auto dir = (tmp / "mo_run_c").string();
    std::filesystem::remove_all(dir);
    const auto report = run_experiment(cfg, dir, true);
    CHECK(report.rules_run == 8);
    CHECK(report.rules_diverged > 0);
    const std::string manifest = slurp(dir + "/manifest.json");
    CHECK(manifest.find("\"diverged\"") != std::string::npos);
  }

  SECTION("unsupported map/set pairs surface as errors") {
    ExperimentConfig cfg = parse_config(
        "[problem]\nkind = markov\nmarkov_m = 3\n[map]\nkind = pnorm\np = 1.5\n[set]\nkind = "
        "simplex\n[rules]\nrule = constant 1.0\n[run]\niterations = 10\nreplicates = 2\n");
    const auto dir = (tmp / "mo_run_d").string();
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(run_experiment(cfg, dir, true), UnsupportedPair);
  }
}

TEST_CASE("sigma report") {
  SECTION("interpolating linear system reports zeros and true flags") {
    ExperimentConfig cfg = parse_config(
        "[problem]\nkind = linear_system\nrows = 6\ncols = 4\nsystem_seed = 9\n[set]\nkind = "
        "reals\n[rules]\nrule = msps 0.5\n");
    std::ostringstream os;
    REQUIRE(sigma_report(cfg, os) == 0);
    const std::string text = os.str();
    CHECK(text.find("sigma_sq = 0\n") != std::string::npos);
    CHECK(text.find("sigma_sq_constrained = 0\n") != std::string::npos);
    CHECK(text.find("mean_grad_norm_sq_at_opt = 0\n") != std::string::npos);
    CHECK(text.find("constrained_interpolation = true") != std::string::npos);
  }
  SECTION("boundary instance separates the neighborhoods") {
    ExperimentConfig cfg = parse_config("[problem]\nkind = companion_nonneg\n[rules]\nrule = constant 0.25\n");
    std::ostringstream os;
    REQUIRE(sigma_report(cfg, os) == 0);
    const std::string text = os.str();
    CHECK(text.find("sigma_sq_constrained = 0\n") != std::string::npos);
    CHECK(text.find("constrained_interpolation = true") != std::string::npos);
    CHECK(text.find("sigma_sq = 0\n") == std::string::npos);  // strictly positive
  }
  SECTION("non-convex member sends sigma_sq to infinity") {
    ExperimentConfig cfg = parse_config("[problem]\nkind = companion_box\n[rules]\nrule = constant 0.25\n");
    std::ostringstream os;
    REQUIRE(sigma_report(cfg, os) == 0);
    CHECK(os.str().find("sigma_sq = inf") != std::string::npos);
  }
}
