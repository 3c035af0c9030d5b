#include "intersim/state.hpp"

#include <algorithm>
#include <stdexcept>

namespace intersim {

void advance(HybridState& state, double dt, std::vector<Departure>& out) {
  if (dt < 0.0) throw std::invalid_argument("advance: dt must be nonnegative");
  double remaining = dt;
  while (remaining > 0.0 && !state.sequence.empty()) {
    Vehicle& head = state.sequence.front();
    const int k = idx(head.cls);
    if (head.residual <= remaining) {
      remaining -= head.residual;
      state.clock += head.residual;
      state.residual_sum[k] = std::max(0.0, state.residual_sum[k] - head.residual);
      Departure d{state.clock,
                  head.cls,
                  head.index,
                  head.virtual_arrival,
                  head.crossing_time,
                  head.service_time,
                  0,
                  0};
      state.sequence.pop_front();
      --state.class_count[k];
      d.remaining_same_class = state.class_count[k];
      d.remaining_other_class = state.class_count[1 - k];
      out.push_back(d);
    } else {
      head.residual -= remaining;
      state.residual_sum[k] = std::max(0.0, state.residual_sum[k] - remaining);
      state.clock += remaining;
      remaining = 0.0;
    }
  }
  state.clock += remaining;  // idle time, if the sequence drained first
}

std::optional<std::size_t> find_headway_violation(const std::vector<Departure>& departures,
                                                  const HeadwayMatrix& theta, double tol) {
  for (std::size_t i = 1; i < departures.size(); ++i) {
    const Departure& lead = departures[i - 1];
    const Departure& foll = departures[i];
    if (foll.virtual_arrival >= lead.time) continue;
    const double gap = foll.time - lead.time;
    if (gap + tol < theta(lead.cls, foll.cls)) return i;
  }
  return std::nullopt;
}

}  // namespace intersim
