#pragma once

#include "intersim/types.hpp"

#include <array>

namespace intersim {
// Pure aggregate-state update laws: the X jump at an arrival under each
// policy, expressed directly on the two-vector of temporal queue sizes.
// These are the idealized laws the closed-form analysis works with; the
// sequence simulator charges headways where they physically occur, which can
// differ at re-sequencing corner cases (see tests).
namespace law {

struct FifoAggregate {
  std::array<double, 2> x{0.0, 0.0};
  OdClass y = OdClass::k1;
};

struct MsAggregate {
  std::array<double, 2> x{0.0, 0.0};
};

struct LqfAggregate {
  std::array<double, 2> x{0.0, 0.0};
  double beta = 1.0;
};

void fifo_step(FifoAggregate& s, OdClass cls, double crossing_time,
               const HeadwayMatrix& theta);

void ms_step(MsAggregate& s, OdClass cls, double crossing_time, const HeadwayMatrix& theta);

void lqf_step(LqfAggregate& s, OdClass cls, double crossing_time, const HeadwayMatrix& theta);

// Deterministic inter-arrival flow: ||x|| drains at unit rate. The split
// between components is policy-dependent in general; for 1-norm quantities
// only the total matters, so the drain is applied proportionally.
template <typename S>
void drain(S& s, double dt) {
  double total = s.x[0] + s.x[1];
  if (total <= dt) {
    s.x = {0.0, 0.0};
    return;
  }
  const double f = (total - dt) / total;
  s.x[0] *= f;
  s.x[1] *= f;
}

}  // namespace law
}  // namespace intersim
