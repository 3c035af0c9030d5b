#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-class signal-free intersection: sequencing simulator and analysis"};
  app.require_subcommand(1);

  std::string config_path;
  intersim::cli::CommonOptions opts;
  std::uint64_t seed_flag = 0;
  std::string output_flag;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config")->required();
    cmd->add_option("--seed", seed_flag, "override the config seed");
    cmd->add_option("--output", output_flag, "output file (default: config dir, then $INTERSIM_OUTPUT_DIR, then stdout)");
    cmd->add_option("--jobs", opts.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  };

  CLI::App* bounds = app.add_subcommand("bounds", "stability and delay-bound report at a demand point");
  CLI::App* simulate = app.add_subcommand("simulate", "event-driven run at a demand point");
  CLI::App* sweep = app.add_subcommand("sweep", "delay surface over a demand grid (CSV)");
  CLI::App* region = app.add_subcommand("region", "capacity-region boundaries per policy (CSV)");
  CLI::App* micro = app.add_subcommand("micro-sim", "step-based approach-zone simulation");
  CLI::App* drift = app.add_subcommand("drift-probe", "closed-form vs Monte Carlo drift at a state");
  for (CLI::App* cmd : {bounds, simulate, sweep, region, micro, drift}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  for (CLI::App* cmd : {bounds, simulate, sweep, region, micro, drift}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--seed")) opts.seed = seed_flag;
    if (cmd->count("--output")) opts.output = output_flag;
  }

  try {
    const auto cfg = intersim::cli::load_config_file(config_path);
    if (bounds->parsed()) return intersim::cli::cmd_bounds(cfg, opts);
    if (simulate->parsed()) return intersim::cli::cmd_simulate(cfg, opts);
    if (sweep->parsed()) return intersim::cli::cmd_sweep(cfg, opts);
    if (region->parsed()) return intersim::cli::cmd_region(cfg, opts);
    if (micro->parsed()) return intersim::cli::cmd_micro_sim(cfg, opts);
    if (drift->parsed()) return intersim::cli::cmd_drift_probe(cfg, opts);
    return kExitValidation;
  } catch (const intersim::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
