#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "intersim/types.hpp"

namespace intersim {

// One vehicle inside the PDMP. `service_time` is the headway-plus-crossing
// duration fixed when the vehicle was sequenced (and only changed when a
// policy re-sequences its predecessor). `residual` equals `service_time`
// until the vehicle reaches the head of the sequence.
struct Vehicle {
  OdClass cls;
  std::uint32_t index;        // per-class arrival index, 1-based
  double virtual_arrival;     // [sec]
  double crossing_time;       // drawn R [sec]
  double service_time;        // headway base + R [sec]
  double residual;            // remaining service [sec]
  std::optional<double> set_crossing_time;  // filled by the scheduler layer
};

using AggregateState = std::array<double, 2>;

struct Departure {
  double time;
  OdClass cls;
  std::uint32_t index;
  double virtual_arrival;
  double crossing_time;
  double service_time;
  // Queue counts immediately after this departure, for policy diagnostics.
  std::uint32_t remaining_same_class;
  std::uint32_t remaining_other_class;
};

struct ArrivalRecord {
  double time;
  OdClass cls;
  std::uint32_t index;
  double crossing_time;
};

struct EventLog {
  std::vector<ArrivalRecord> arrivals;
  std::vector<Departure> departures;
};

// Hybrid PDMP state: the committed crossing sequence plus residual service
// times, with the simulation clock. Plain value, no interior sharing. The
// per-class residual sums are maintained incrementally by advance() and the
// policy insertion helpers.
struct HybridState {
  std::deque<Vehicle> sequence;  // sequence[0] is the head (being served)
  double clock = 0.0;
  std::array<double, 2> residual_sum{0.0, 0.0};
  std::array<std::uint32_t, 2> class_count{0, 0};

  bool empty() const { return sequence.empty(); }
  std::size_t count() const { return sequence.size(); }
  std::size_t count_class(OdClass k) const { return class_count[idx(k)]; }
  void recompute_sums() {
    residual_sum = {0.0, 0.0};
    class_count = {0, 0};
    for (const auto& v : sequence) {
      residual_sum[idx(v.cls)] += v.residual;
      ++class_count[idx(v.cls)];
    }
  }
};

// Per-class residual sums; zero components for empty classes.
inline AggregateState aggregate(const HybridState& state) { return state.residual_sum; }

inline double workload(const HybridState& state) {
  return state.residual_sum[0] + state.residual_sum[1];
}

// Advances the deterministic flow by dt: the head residual drains at unit
// rate, vehicles depart as residuals hit zero, everyone else is frozen.
// dt must not skip past an arrival event; that is the engine's job.
// Appends departures (with timestamps) to `out`.
void advance(HybridState& state, double dt, std::vector<Departure>& out);

inline std::vector<Departure> advance(HybridState& state, double dt) {
  std::vector<Departure> out;
  advance(state, dt, out);
  return out;
}

// Post-hoc minimum-gap check on a departure log. The constraint applies to
// consecutive departure pairs where the follower arrived before the leader
// departed; a vehicle entering an idle intersection is unconstrained.
// Returns the index of the first violating pair, or nullopt if clean.
std::optional<std::size_t> find_headway_violation(const std::vector<Departure>& departures,
                                                  const HeadwayMatrix& theta,
                                                  double tol = 1e-9);

}  // namespace intersim
