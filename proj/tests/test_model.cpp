#include "doctest.h"

#include <cmath>
#include <vector>

#include "intersim/rng.hpp"
#include "intersim/state.hpp"
#include "intersim/types.hpp"

using namespace intersim;

namespace {

HeadwayMatrix theta_ref() { return HeadwayMatrix(0.5, 1.0, 1.0, 0.5); }

Vehicle make_vehicle(OdClass cls, std::uint32_t index, double residual) {
  return Vehicle{cls, index, 0.0, 0.5, residual, residual, std::nullopt};
}

HybridState make_state(std::vector<Vehicle> seq) {
  HybridState s;
  for (auto& v : seq) s.sequence.push_back(v);
  s.recompute_sums();
  return s;
}

}  // namespace

TEST_CASE("od class basics") {
  CHECK(other(OdClass::k1) == OdClass::k2);
  CHECK(other(OdClass::k2) == OdClass::k1);
  CHECK(other(other(OdClass::k1)) == OdClass::k1);
  CHECK(label(OdClass::k1) == 1);
  CHECK(label(OdClass::k2) == 2);
}

TEST_CASE("headway matrix validation") {
  CHECK_NOTHROW(theta_ref());
  CHECK_THROWS_AS(HeadwayMatrix(0.5, 0.5, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(HeadwayMatrix(0.5, 1.0, 0.4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(HeadwayMatrix(-0.5, 1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("crossing time moments are exact") {
  auto det = CrossingTimeDist::deterministic(0.5);
  CHECK(det.mean() == 0.5);
  CHECK(det.variance() == 0.0);
  CHECK(det.min() == 0.5);
  CHECK(det.max() == 0.5);

  auto uni = CrossingTimeDist::uniform(0.3, 0.7);
  CHECK(uni.mean() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(uni.variance() == doctest::Approx(0.16 / 12.0).epsilon(1e-12));

  auto disc = CrossingTimeDist::discrete({0.2, 0.8}, {0.25, 0.75});
  CHECK(disc.mean() == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(disc.variance() == doctest::Approx(0.0675).epsilon(1e-12));
  CHECK(disc.min() == 0.2);
  CHECK(disc.max() == 0.8);

  // Two-point convenience pins mean and variance exactly.
  auto two = CrossingTimeDist::two_point(0.5, 0.1);
  CHECK(two.mean() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two.variance() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(two.min() > 0.0);

  CHECK_THROWS_AS(CrossingTimeDist::deterministic(0.0), std::invalid_argument);
  CHECK_THROWS_AS(CrossingTimeDist::uniform(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(CrossingTimeDist::discrete({0.5}, {0.5}), std::invalid_argument);
}

TEST_CASE("crossing time samples stay inside the support") {
  auto uni = CrossingTimeDist::uniform(0.3, 0.7);
  auto disc = CrossingTimeDist::discrete({0.2, 0.5, 0.8}, {0.3, 0.4, 0.3});
  RandomStream rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double ru = uni.quantile(rng.uniform());
    CHECK(ru >= uni.min());
    CHECK(ru <= uni.max());
    const double rd = disc.quantile(rng.uniform());
    CHECK(rd >= disc.min());
    CHECK(rd <= disc.max());
  }
}

TEST_CASE("aggregate: per-class residual sums") {
  SUBCASE("empty sequence") {
    HybridState s;
    auto x = aggregate(s);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 0.0);
  }
  SUBCASE("single class-1 vehicle") {
    auto s = make_state({make_vehicle(OdClass::k1, 1, 0.7)});
    auto x = aggregate(s);
    CHECK(x[0] == 0.7);
    CHECK(x[1] == 0.0);
  }
  SUBCASE("hand summation across classes") {
    auto s = make_state({make_vehicle(OdClass::k1, 1, 0.3), make_vehicle(OdClass::k2, 1, 1.2),
                         make_vehicle(OdClass::k1, 2, 1.0)});
    auto x = aggregate(s);
    CHECK(x[0] == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(1.2).epsilon(1e-15));
  }
}

TEST_CASE("advance: head drains, departures in sequence order") {
  SUBCASE("exact drain departs the head") {
    auto s = make_state({make_vehicle(OdClass::k1, 1, 0.5), make_vehicle(OdClass::k2, 1, 0.6)});
    auto deps = advance(s, 0.5);
    REQUIRE(deps.size() == 1);
    CHECK(deps[0].cls == OdClass::k1);
    CHECK(deps[0].time == 0.5);
    CHECK(s.sequence.front().cls == OdClass::k2);
    CHECK(s.sequence.front().residual == 0.6);
  }
  SUBCASE("idle system just advances the clock") {
    HybridState s;
    auto deps = advance(s, 3.0);
    CHECK(deps.empty());
    CHECK(s.clock == 3.0);
    CHECK(workload(s) == 0.0);
  }
  SUBCASE("piecewise drain: two departures at offsets 0.4 and 1.0") {
    auto s = make_state({make_vehicle(OdClass::k1, 1, 0.4), make_vehicle(OdClass::k1, 2, 0.6)});
    auto deps = advance(s, 1.0);
    REQUIRE(deps.size() == 2);
    CHECK(deps[0].time == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(deps[1].time == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.empty());
    CHECK(s.clock == doctest::Approx(1.0));
  }
  SUBCASE("negative dt rejected") {
    HybridState s;
    std::vector<Departure> out;
    CHECK_THROWS_AS(advance(s, -0.1, out), std::invalid_argument);
  }
}

TEST_CASE("workload conservation over arrival-free intervals") {
  RandomStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vehicle> seq;
    const int n = static_cast<int>(rng.uniform() * 6);
    for (int i = 0; i < n; ++i) {
      const OdClass cls = rng.bernoulli(0.5) ? OdClass::k1 : OdClass::k2;
      seq.push_back(make_vehicle(cls, static_cast<std::uint32_t>(i + 1),
                                 0.1 + 2.0 * rng.uniform()));
    }
    auto s = make_state(seq);
    const double before = workload(s);
    const double dt = 3.0 * rng.uniform();
    advance(s, dt);
    const double after = workload(s);
    CHECK(after == doctest::Approx(std::max(0.0, before - dt)).epsilon(1e-9));
    CHECK(aggregate(s)[0] >= 0.0);
    CHECK(aggregate(s)[1] >= 0.0);
  }
}

TEST_CASE("sample_interarrival") {
  SUBCASE("degenerate mixture always picks the only class") {
    RandomStream rng(3);
    DemandProfile lambda(1.0, 0.0);
    for (int i = 0; i < 1000; ++i) {
      auto a = sample_interarrival(rng, lambda);
      REQUIRE(a.has_value());
      CHECK(a->cls == OdClass::k1);
      CHECK(a->dt >= 0.0);
    }
  }
  SUBCASE("zero demand means no next arrival") {
    RandomStream rng(3);
    DemandProfile lambda(0.0, 0.0);
    CHECK_FALSE(sample_interarrival(rng, lambda).has_value());
  }
  SUBCASE("law of large numbers on the seeded stream") {
    RandomStream rng(12345);
    DemandProfile lambda(0.5, 0.5);
    const int n = 100000;
    double dt_sum = 0.0;
    int class1 = 0;
    for (int i = 0; i < n; ++i) {
      auto a = sample_interarrival(rng, lambda);
      REQUIRE(a.has_value());
      dt_sum += a->dt;
      class1 += (a->cls == OdClass::k1);
    }
    CHECK(static_cast<double>(class1) / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(dt_sum / n == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("fixed seed reproduces the stream") {
    RandomStream a(42), b(42);
    DemandProfile lambda(0.4, 0.7);
    for (int i = 0; i < 1000; ++i) {
      auto x = sample_interarrival(a, lambda);
      auto y = sample_interarrival(b, lambda);
      CHECK(x->cls == y->cls);
      CHECK(x->dt == y->dt);
    }
  }
}

TEST_CASE("demand profile invariants") {
  CHECK_THROWS_AS(DemandProfile(-0.1, 0.2), std::invalid_argument);
  DemandProfile zero(0.0, 0.0);
  CHECK_THROWS_AS(zero.p(), std::domain_error);
  DemandProfile l(0.3, 0.1);
  auto p = l.p();
  CHECK(p[0] + p[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("replication seed splitting is stable and distinct") {
  const std::uint64_t master = 97;
  CHECK(replication_seed(master, 0) == replication_seed(master, 0));
  CHECK(replication_seed(master, 0) != replication_seed(master, 1));
  CHECK(replication_seed(master, 1) != replication_seed(master, 2));
}
