#include "intersim/aggregate_law.hpp"

#include "intersim/policies.hpp"

namespace intersim {
namespace law {

void fifo_step(FifoAggregate& s, OdClass cls, double crossing_time,
               const HeadwayMatrix& theta) {
  s.x[idx(cls)] += theta(s.y, cls) + crossing_time;
  s.y = cls;
}

void ms_step(MsAggregate& s, OdClass cls, double crossing_time, const HeadwayMatrix& theta) {
  if (s.x[0] + s.x[1] > 0.0)
    s.x[idx(cls)] += theta(cls, cls) + crossing_time;
  else
    s.x[idx(cls)] = theta(other(cls), cls) + crossing_time;
}

void lqf_step(LqfAggregate& s, OdClass cls, double crossing_time, const HeadwayMatrix& theta) {
  const int q = lqf_comparator(s.x, s.beta);
  const int k = label(cls);
  if (q == 0 || q == k) {
    s.x[idx(cls)] += theta(cls, cls) + crossing_time;
  } else {
    const OdClass o = other(cls);
    s.x[idx(cls)] += theta(o, cls) + crossing_time;
    s.x[idx(o)] += theta(o, cls) - theta(o, o);
  }
}

}  // namespace law
}  // namespace intersim
