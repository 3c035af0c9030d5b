#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "intersim/state.hpp"
#include "intersim/types.hpp"

namespace intersim {

enum class Verdict { Bounded, Growing };

inline const char* to_string(Verdict v) {
  return v == Verdict::Bounded ? "bounded" : "growing";
}

// Mean per-vehicle delay [sec/veh] at which a demand point is flagged
// congested in delay surfaces.
inline constexpr double kCongestionDelayThreshold = 10.0;

struct SimConfig {
  IntersectionSpec spec;
  PolicyConfig policy;
  double horizon = 1e5;   // [sec]
  double warmup = -1.0;   // [sec]; negative selects the default 10% of horizon
  std::uint64_t seed = 1;
  int replications = 1;
  bool collect_log = false;

  double effective_warmup() const { return warmup < 0.0 ? 0.1 * horizon : warmup; }
};

// Metrics over [warmup, horizon]. With replications > 1 the scalar fields are
// means across replications, the event counts are totals, and the log (when
// collected) is the first replication's.
struct SimResult {
  double time_avg_workload = 0.0;      // time average of ||X||_1 [sec]
  double per_vehicle_delay_mean = 0.0; // [sec/veh]
  double mean_system_time = 0.0;       // departure - virtual arrival [sec/veh]
  double throughput = 0.0;             // [veh/sec]
  double switchovers = 0.0;            // departure-class alternations
  double max_workload = 0.0;           // [sec]
  double mean_number_in_system = 0.0;  // time average of N(t)
  Verdict verdict = Verdict::Bounded;
  std::vector<double> window_means;    // 10 windowed workload means
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  EventLog log;
};

// PDMP-layer delay of a departed vehicle: waiting plus headway spacing beyond
// the vehicle's own crossing time.
double per_vehicle_delay(const Vehicle& record, double departure_time);
double per_vehicle_delay(const Departure& record);

// One seeded replication.
SimResult run_single(const SimConfig& config, std::uint64_t seed);

// Runs config.replications replications with seeds derived from config.seed
// by the SplitMix64 splitting rule and merges the results. The verdict is
// Growing when at least half the replications grow.
SimResult run(const SimConfig& config);

struct SurfacePoint {
  double lambda1;
  double lambda2;
  double mean_delay;
  bool congested;
  Verdict verdict;
};

// One replicated run per grid point; rows come back in grid order regardless
// of scheduling. jobs <= 1 runs serially.
std::vector<SurfacePoint> estimate_delay_surface(
    const std::vector<std::array<double, 2>>& grid, const SimConfig& base, int jobs = 1);

struct DriftEstimate {
  double closed_form;
  double monte_carlo;
  double std_error;
  std::uint64_t samples;
};

// Closed-form one-step mean drift of the FIFO quadratic function
// V(x,y) = ||x||^2/2 + a_y ||x|| at state (x, y), cross-validated by Monte
// Carlo sampling of the arrival jump. Policies other than FIFO are rejected.
DriftEstimate drift_probe(const std::array<double, 2>& x, OdClass y,
                          const IntersectionSpec& spec, PolicyKind policy,
                          std::uint64_t samples, std::uint64_t seed);

}  // namespace intersim
