#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "intersim/state.hpp"
#include "intersim/types.hpp"

namespace intersim {

// Geometry and kinematics of the approaching zone.
struct ApproachSpec {
  double length = 150.0;     // [m]
  double v_max = 15.0;       // [m/s], nominal speed; vehicles arrive at v_max
  double accel = 2.5;        // [m/s^2]
  double decel = -2.5;       // [m/s^2], negative
  double dt = 0.1;           // micro-sim step [sec]
  double safety_gap = 5.0;   // minimum inter-vehicle spacing [m]

  void validate() const {
    if (!(length > 0.0) || !(v_max > 0.0) || !(accel > 0.0) || !(dt > 0.0) ||
        !(safety_gap > 0.0))
      throw std::invalid_argument("approach parameters must be positive");
    if (!(decel < 0.0)) throw std::invalid_argument("deceleration must be negative");
  }

  double free_flow_time() const { return length / v_max; }
};

// Earliest feasible crossing instant for a vehicle entering at entry_time.
inline double minimal_set_time(double entry_time, const ApproachSpec& approach) {
  return approach.length / approach.v_max + entry_time;
}

struct ScheduleEntry {
  OdClass cls;
  std::uint32_t index;     // per-class arrival index, 1-based
  double entry_time;       // approach-zone entry [sec]
  double t_ms;             // minimal set time [sec]
  double t_floor;          // max of t_ms and any relaxations [sec]
  double t_set;            // set crossing time [sec]
  bool crossed = false;
};

// Crossing-window schedule shared by all policies: entries are kept in
// crossing order and set times always satisfy the max-recursion
//   t_set[i] = max(t_floor[i], t_set[i-1] + theta(cls[i-1], cls[i]) + mean_r).
// Entries become committed once their slot has begun (or they crossed);
// committed entries are never re-sequenced.
class Schedule {
 public:
  Schedule(const HeadwayMatrix& theta, double mean_r)
      : theta_(theta), mean_r_(mean_r) {}

  const std::vector<ScheduleEntry>& entries() const { return entries_; }
  std::size_t committed() const { return committed_; }
  const HeadwayMatrix& theta() const { return theta_; }
  double mean_r() const { return mean_r_; }

  // Arrival-order sequencing: append at the tail.
  std::size_t append_fifo(OdClass cls, std::uint32_t index, double entry_time,
                          const ApproachSpec& approach);

  // Two-case insertion: behind the previous same-class vehicle when the slot
  // chain is tight, otherwise the first downstream gap wide enough to hold a
  // crossing without shifting anyone.
  std::size_t insert_ms(OdClass cls, std::uint32_t index, double entry_time,
                        const ApproachSpec& approach);

  // Adds the vehicle to the pool and re-sequences all uncommitted entries by
  // repeatedly drawing from the longer temporal queue.
  std::size_t add_lqf(OdClass cls, std::uint32_t index, double entry_time,
                      const ApproachSpec& approach, double beta, TieRule tie_rule);

  // Re-sequences the uncommitted suffix under the LQF rule (also used after
  // departures).
  void rebuild_lqf(double beta, TieRule tie_rule);

  // Moves the committed boundary forward past entries whose slot has begun.
  void commit_until(double now);

  // Raises the entry's floor to new_floor and re-runs the recursion
  // downstream. Used when a vehicle can no longer make its slot.
  void relax(OdClass cls, std::uint32_t index, double new_floor);

  void mark_crossed(OdClass cls, std::uint32_t index);

  std::optional<std::size_t> position_of(OdClass cls, std::uint32_t index) const;
  const ScheduleEntry* find(OdClass cls, std::uint32_t index) const;

  // First adjacent pair violating t_set gaps >= theta + mean_r, if any.
  std::optional<std::size_t> find_slot_violation(double tol = 1e-9) const;

 private:
  static std::uint64_t key(OdClass cls, std::uint32_t index) {
    return (static_cast<std::uint64_t>(idx(cls)) << 32) | index;
  }
  std::size_t insert_at(std::size_t pos, ScheduleEntry entry);
  void recompute_from(std::size_t pos, bool force = false);
  void reindex_from(std::size_t pos);

  HeadwayMatrix theta_;
  double mean_r_;
  std::vector<ScheduleEntry> entries_;
  std::size_t committed_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> position_;
};

// Batch helper: schedules a time-ordered arrival stream under FIFO.
struct ScheduledArrival {
  double entry_time;
  OdClass cls;
};
Schedule fifo_schedule(const std::vector<ScheduledArrival>& arrivals,
                       const HeadwayMatrix& theta, double mean_r,
                       const ApproachSpec& approach);
Schedule ms_schedule(const std::vector<ScheduledArrival>& arrivals,
                     const HeadwayMatrix& theta, double mean_r,
                     const ApproachSpec& approach);
Schedule lqf_schedule(const std::vector<ScheduledArrival>& arrivals,
                      const HeadwayMatrix& theta, double mean_r,
                      const ApproachSpec& approach, double beta, TieRule tie_rule);

struct PlanResult {
  double accel_command;  // one of {accel, 0, decel}
  double t_min;          // earliest feasible crossing instant [sec]
};

// Minimal-time-to-go planner: accelerate when the slot is at or past the
// earliest feasible crossing, decelerate when the vehicle would arrive early.
// position is measured from the approach entry; the crossing line sits at
// approach.length.
PlanResult plan_trajectory(double position, double speed, double now, double t_set,
                           const ApproachSpec& approach);

struct MicroVehicleRecord {
  std::uint32_t id;        // global spawn order
  OdClass cls;
  std::uint32_t index;     // per-class index
  double entry_time;
  double crossing_time;    // instant the vehicle reached the crossing line
  double t_set;            // its final set time
  double delay;            // crossing_time - entry_time - free-flow time
};

struct TrajectorySample {
  double t;
  std::uint32_t id;
  OdClass cls;
  double position;
  double speed;
  double accel;
};

struct MicroSimConfig {
  PolicyConfig policy;
  HeadwayMatrix theta{0.5, 1.0, 1.0, 0.5};
  double mean_r = 0.5;
  DemandProfile demand{0.0, 0.0};   // per-step Bernoulli rates lambda_k * dt
  ApproachSpec approach{};
  double horizon = 1000.0;          // [sec]
  std::uint64_t seed = 1;
  bool record_trajectories = false;
  // When set, arrivals come from this list (quantized to steps) instead of
  // the Bernoulli streams.
  std::optional<std::vector<ScheduledArrival>> scripted_arrivals;
};

struct MicroSimResult {
  std::vector<MicroVehicleRecord> vehicles;  // crossing order
  double mean_delay = 0.0;
  double max_set_time_error = 0.0;   // max |crossing_time - t_set|
  std::size_t spawned = 0;
  std::size_t crossed = 0;
  bool slots_ok = true;  // final schedule satisfies the slot-gap recursion
  std::vector<TrajectorySample> trajectory;
};

// Single-lane-per-class step simulator: Bernoulli arrivals, schedule-driven
// crossing slots, bang-bang trajectory tracking, hard safety-gap enforcement.
// A safety-gap violation aborts with a diagnostic.
MicroSimResult micro_sim(const MicroSimConfig& config);

}  // namespace intersim
