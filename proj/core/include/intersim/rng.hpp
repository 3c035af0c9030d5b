#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "intersim/types.hpp"

namespace intersim {

// SplitMix64 step; also the replication seed-splitting rule:
// rep_seed(master, i) is the (i+1)-th output of the SplitMix64 stream
// seeded with master.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t replication_seed(std::uint64_t master, unsigned replication) {
  std::uint64_t s = master;
  std::uint64_t out = 0;
  for (unsigned i = 0; i <= replication; ++i) out = splitmix64_next(s);
  return out;
}

// Seeded random stream. All draws are derived from uniform(0,1) samples with
// fixed arithmetic so that a seed pins the whole sample path, independent of
// the standard library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform in (0,1]; never returns 0 so log() is safe.
  double uniform_pos() {
    const double u = (engine_() >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  // Uniform in [0,1).
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct Interarrival {
  OdClass cls;
  double dt;
};

// Next Poisson arrival: gap ~ Exp(total rate), class by demand proportion.
// Empty when total demand is zero (no next arrival).
inline std::optional<Interarrival> sample_interarrival(RandomStream& rng,
                                                       const DemandProfile& demand) {
  const double total = demand.total();
  if (!(total > 0.0)) return std::nullopt;
  const double dt = rng.exponential(total);
  const OdClass cls =
      rng.uniform() * total < demand.at(0) ? OdClass::k1 : OdClass::k2;
  return Interarrival{cls, dt};
}

}  // namespace intersim
