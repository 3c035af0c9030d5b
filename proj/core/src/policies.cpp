#include "intersim/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace intersim {

namespace {

// Inserts a vehicle at `pos`, charging its service against the class of its
// in-sequence predecessor (`base_leader`). If a follower exists and its
// predecessor class changed, its service time is recharged accordingly.
// Non-head residuals always equal the full service time.
void insert_charged(HybridState& state, std::size_t pos, OdClass cls, double crossing_time,
                    OdClass base_leader, const HeadwayMatrix& theta, std::uint32_t index) {
  const double service = theta(base_leader, cls) + crossing_time;
  Vehicle v{cls, index, state.clock, crossing_time, service, service, std::nullopt};
  state.sequence.insert(state.sequence.begin() + static_cast<std::ptrdiff_t>(pos), v);
  state.residual_sum[idx(cls)] += service;
  ++state.class_count[idx(cls)];
  // The displaced follower's predecessor class changed from base_leader to
  // cls; recharge its headway base against the new predecessor.
  const std::size_t follower = pos + 1;
  if (follower < state.sequence.size() && base_leader != cls) {
    Vehicle& f = state.sequence[follower];
    const double new_service = theta(cls, f.cls) + f.crossing_time;
    state.residual_sum[idx(f.cls)] += new_service - f.service_time;
    f.residual += new_service - f.service_time;
    f.service_time = new_service;
  }
}

std::ptrdiff_t find_last_of_class(const HybridState& state, OdClass cls) {
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(state.sequence.size()) - 1; i >= 0; --i)
    if (state.sequence[static_cast<std::size_t>(i)].cls == cls) return i;
  return -1;
}

}  // namespace

int lqf_comparator(const AggregateState& x, double beta) {
  if (x[0] > beta * x[1]) return 1;
  if (x[0] < beta * x[1]) return 2;
  return 0;
}

void fifo_arrival(HybridState& state, FifoState& aux, OdClass cls, double crossing_time,
                  const HeadwayMatrix& theta, std::uint32_t index) {
  const OdClass leader = state.empty() ? aux.y : state.sequence.back().cls;
  insert_charged(state, state.sequence.size(), cls, crossing_time, leader, theta, index);
  aux.y = cls;
}

void ms_arrival(HybridState& state, MsState& aux, OdClass cls, double crossing_time,
                const HeadwayMatrix& theta, std::uint32_t index) {
  if (state.empty()) {
    insert_charged(state, 0, cls, crossing_time, aux.z, theta, index);
    aux.z = cls;  // the arrival heads an empty system and is being discharged
    return;
  }
  const std::ptrdiff_t last_same = find_last_of_class(state, cls);
  if (last_same >= 0) {
    insert_charged(state, static_cast<std::size_t>(last_same) + 1, cls, crossing_time, cls,
                   theta, index);
  } else {
    insert_charged(state, state.sequence.size(), cls, crossing_time,
                   state.sequence.back().cls, theta, index);
  }
}

void lqf_arrival(HybridState& state, LqfState& aux, OdClass cls, double crossing_time,
                 const HeadwayMatrix& theta, std::uint32_t index) {
  if (state.empty()) {
    insert_charged(state, 0, cls, crossing_time, cls, theta, index);
    return;
  }
  const int q = lqf_comparator(aggregate(state), aux.beta);
  const int k = label(cls);
  if (q == 0 || q == k) {
    insert_charged(state, state.sequence.size(), cls, crossing_time,
                   state.sequence.back().cls, theta, index);
    return;
  }
  // Arrival belongs to the shorter queue: boundary insertion after the last
  // same-class vehicle, or right behind the head if the class is absent.
  const std::ptrdiff_t last_same = find_last_of_class(state, cls);
  const std::size_t pos = last_same >= 0 ? static_cast<std::size_t>(last_same) + 1 : 1;
  insert_charged(state, pos, cls, crossing_time, state.sequence[pos - 1].cls, theta, index);
}

void ms_on_departures(MsState& aux, const HybridState& state,
                      const std::vector<Departure>& departures) {
  if (departures.empty()) return;
  aux.z = state.empty() ? departures.back().cls : state.sequence.front().cls;
}

PolicyState make_policy_state(const PolicyConfig& config) {
  switch (config.kind) {
    case PolicyKind::Fifo: return FifoState{};
    case PolicyKind::Ms: return MsState{};
    case PolicyKind::Lqf: return LqfState{config.beta, config.tie_rule};
  }
  throw std::invalid_argument("unknown policy kind");
}

void apply_arrival(HybridState& state, PolicyState& policy, OdClass cls,
                   double crossing_time, const HeadwayMatrix& theta, std::uint32_t index) {
  std::visit(
      [&](auto& aux) {
        using T = std::decay_t<decltype(aux)>;
        if constexpr (std::is_same_v<T, FifoState>)
          fifo_arrival(state, aux, cls, crossing_time, theta, index);
        else if constexpr (std::is_same_v<T, MsState>)
          ms_arrival(state, aux, cls, crossing_time, theta, index);
        else
          lqf_arrival(state, aux, cls, crossing_time, theta, index);
      },
      policy);
}

void apply_departures(PolicyState& policy, const HybridState& state,
                      const std::vector<Departure>& departures) {
  if (auto* ms = std::get_if<MsState>(&policy)) ms_on_departures(*ms, state, departures);
}

std::size_t switchover_count(const std::vector<Departure>& departures) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < departures.size(); ++i)
    n += (departures[i].cls != departures[i - 1].cls);
  return n;
}

}  // namespace intersim
