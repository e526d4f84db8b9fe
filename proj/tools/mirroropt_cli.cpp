// Experiment runner. Subcommands:
//   run    --config PATH [--out DIR] [--seed N] [--replicates N] [--quiet]
//   verify SUITE [--out DIR] [--quiet]      (properties | theorems | figures | all)
//   sigma  --config PATH
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mirroropt/config.hpp"
#include "mirroropt/experiment.hpp"
#include "mirroropt/verify.hpp"
#include "mirroropt/version.hpp"

namespace {

mirroropt::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mirroropt::IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return mirroropt::parse_config(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic mirror descent benchmark harness"};
  app.set_version_flag("--version", mirroropt::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", suite = "all";
  long long seed_override = -1;
  int replicates_override = -1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--replicates", replicates_override, "override the replicate count");
  run->add_flag("--quiet", quiet, "suppress progress output");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "properties | theorems | figures | all");
  verify->add_option("--out", out_dir, "output directory for emitted data");
  verify->add_flag("--quiet", quiet, "suppress per-criterion detail");

  auto* sigma = app.add_subcommand("sigma", "report the neighborhood quantities of a problem");
  sigma->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto cfg = load_config(config_path);
      if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
      if (replicates_override > 0) cfg.replicates = replicates_override;
      mirroropt::run_experiment(cfg, out_dir, quiet);
      return 0;
    }
    if (verify->parsed()) return mirroropt::run_verify(suite, out_dir, quiet);
    if (sigma->parsed()) return mirroropt::sigma_report(load_config(config_path), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
