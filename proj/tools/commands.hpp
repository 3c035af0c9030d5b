#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace intersim::cli {

struct CommonOptions {
  std::optional<std::uint64_t> seed;   // overrides config
  std::optional<std::string> output;   // explicit output path
  int jobs = 1;
};

// Resolves the destination for a command's primary artifact: --output wins,
// then the config's output dir, then $INTERSIM_OUTPUT_DIR, then stdout.
std::optional<std::string> resolve_output(const ExperimentConfig& cfg,
                                          const CommonOptions& opts,
                                          const std::string& default_name);

int cmd_bounds(const ExperimentConfig& cfg, const CommonOptions& opts);
int cmd_simulate(const ExperimentConfig& cfg, const CommonOptions& opts);
int cmd_sweep(const ExperimentConfig& cfg, const CommonOptions& opts);
int cmd_region(const ExperimentConfig& cfg, const CommonOptions& opts);
int cmd_micro_sim(const ExperimentConfig& cfg, const CommonOptions& opts);
int cmd_drift_probe(const ExperimentConfig& cfg, const CommonOptions& opts);

// Fixed-precision float serialization (9 significant digits) shared by all
// CSV/JSON emitters so reruns are byte-identical.
std::string fmt_double(double v);

}  // namespace intersim::cli
