#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "intersim/state.hpp"
#include "intersim/types.hpp"

namespace intersim {

// FIFO auxiliary state: class of the vehicle at the tail of the sequence,
// or of the last discharged vehicle when the system is empty.
struct FifoState {
  OdClass y = OdClass::k1;
};

// MS auxiliary state: class being discharged, or last discharged.
struct MsState {
  OdClass z = OdClass::k1;
};

// LQF auxiliary state. The queue comparator Q is computed on demand from the
// aggregate state and beta; the tie rule matters for the scheduling layer.
struct LqfState {
  double beta = 1.0;
  TieRule tie_rule = TieRule::MaintainServingClass;

  LqfState() = default;
  LqfState(double b, TieRule t) : beta(b), tie_rule(t) {
    if (!(beta > 0.0)) throw std::invalid_argument("LQF beta must be positive");
  }
};

// Longer-queue comparator: +1 if class 1 is longer, +2 if class 2 is longer,
// 0 on a tie (X1 == beta * X2).
int lqf_comparator(const AggregateState& x, double beta);

// Appends the arrival at the tail of the sequence with service
// theta(y, k) + R and updates y. Touches only the arrival's class.
void fifo_arrival(HybridState& state, FifoState& aux, OdClass cls, double crossing_time,
                  const HeadwayMatrix& theta, std::uint32_t index);

// Inserts the arrival immediately after the last same-class vehicle (tail if
// the class is absent); service times are charged against the actual
// in-sequence predecessor and the displaced follower, if any, is recharged
// against its new predecessor class.
void ms_arrival(HybridState& state, MsState& aux, OdClass cls, double crossing_time,
                const HeadwayMatrix& theta, std::uint32_t index);

// Arrival of the longer (or tied) class goes to the tail; an arrival of the
// shorter class is inserted at the boundary after the last same-class vehicle
// (after the head if none). The head is never displaced. Service charging is
// sequence-exact, as in ms_arrival.
void lqf_arrival(HybridState& state, LqfState& aux, OdClass cls, double crossing_time,
                 const HeadwayMatrix& theta, std::uint32_t index);

// Keeps MS's Z consistent after departures: Z follows the head's class and
// switches only when the serving class clears with the other class waiting.
void ms_on_departures(MsState& aux, const HybridState& state,
                      const std::vector<Departure>& departures);

using PolicyState = std::variant<FifoState, MsState, LqfState>;

PolicyState make_policy_state(const PolicyConfig& config);

void apply_arrival(HybridState& state, PolicyState& policy, OdClass cls,
                   double crossing_time, const HeadwayMatrix& theta, std::uint32_t index);

void apply_departures(PolicyState& policy, const HybridState& state,
                      const std::vector<Departure>& departures);

// Number of class alternations in a departure sequence.
std::size_t switchover_count(const std::vector<Departure>& departures);

}  // namespace intersim
