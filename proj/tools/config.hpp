#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "intersim/scheduler.hpp"
#include "intersim/sim.hpp"
#include "intersim/types.hpp"

namespace intersim::cli {

// Schema violation with the JSON path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct GridSpec {
  double l1_min = 0.0, l1_max = 0.0;
  double l2_min = 0.0, l2_max = 0.0;
  int l1_count = 0, l2_count = 0;
};

struct DriftSpec {
  std::array<double, 2> x{0.0, 0.0};
  OdClass y = OdClass::k1;
  std::uint64_t samples = 100000;
};

// Declarative experiment description, version 1. Unknown keys are rejected.
struct ExperimentConfig {
  IntersectionSpec spec;
  double max_r = 0.5;  // from the crossing-time distribution

  std::vector<PolicyConfig> policies;  // >= 1; first entry is "the" policy
  SimConfig sim_template() const;

  double horizon = 1e5;
  double warmup = -1.0;
  std::uint64_t seed = 1;
  int replications = 1;

  std::optional<GridSpec> grid;
  int rays = 100;

  ApproachSpec approach{};
  double micro_horizon = 300.0;
  bool record_trajectories = false;

  DriftSpec drift;
  bool lqf_literal_b22 = false;

  std::optional<std::string> output_dir;
};

// Parses and validates a version-1 config document. Throws ConfigError with
// a field-path diagnostic on any violation.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

std::vector<std::array<double, 2>> expand_grid(const GridSpec& grid);

}  // namespace intersim::cli
