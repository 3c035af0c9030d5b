#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "intersim/policies.hpp"
#include "intersim/rng.hpp"
#include "intersim/scheduler.hpp"

using namespace intersim;

namespace {

HeadwayMatrix theta_ref() { return HeadwayMatrix(0.5, 1.0, 1.0, 0.5); }

ApproachSpec approach_ref() {
  ApproachSpec a;
  a.length = 150.0;
  a.v_max = 15.0;
  a.accel = 2.5;
  a.decel = -2.5;
  a.dt = 0.1;
  a.safety_gap = 5.0;
  return a;
}

std::vector<ScheduledArrival> poisson_arrivals(std::uint64_t seed, std::size_t n, double l1,
                                               double l2) {
  RandomStream rng(seed);
  DemandProfile lambda(l1, l2);
  std::vector<ScheduledArrival> out;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = sample_interarrival(rng, lambda);
    t += a->dt;
    out.push_back({t, a->cls});
  }
  return out;
}

}  // namespace

TEST_CASE("minimal set time") {
  auto ap = approach_ref();
  CHECK(minimal_set_time(0.0, ap) == doctest::Approx(10.0).epsilon(1e-12));
  ApproachSpec zero = ap;
  zero.length = 1e-12;  // effectively a zero-length zone
  CHECK(minimal_set_time(5.0, zero) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(minimal_set_time(3.0, ap) > minimal_set_time(2.0, ap));
}

TEST_CASE("fifo schedule recursion") {
  const auto theta = theta_ref();
  const auto ap = approach_ref();
  SUBCASE("single vehicle crosses at its minimal set time") {
    const auto s = fifo_schedule({{0.0, OdClass::k1}}, theta, 0.5, ap);
    REQUIRE(s.entries().size() == 1);
    CHECK(s.entries()[0].t_set == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("two same-class vehicles 0.1 s apart: second slot is first + 1.0") {
    const auto s =
        fifo_schedule({{0.0, OdClass::k1}, {0.1, OdClass::k1}}, theta, 0.5, ap);
    REQUIRE(s.entries().size() == 2);
    CHECK(s.entries()[1].t_set ==
          doctest::Approx(s.entries()[0].t_set + 1.0).epsilon(1e-12));
  }
  SUBCASE("widely spaced arrivals keep their minimal set times") {
    const auto s = fifo_schedule(
        {{0.0, OdClass::k1}, {5.0, OdClass::k2}, {10.0, OdClass::k1}}, theta, 0.5, ap);
    for (const auto& e : s.entries()) CHECK(e.t_set == doctest::Approx(e.t_ms).epsilon(1e-12));
  }
}

TEST_CASE("ms schedule insertion") {
  const auto theta = theta_ref();
  const auto ap = approach_ref();
  SUBCASE("empty schedule appends at the minimal set time") {
    Schedule s(theta, 0.5);
    s.insert_ms(OdClass::k2, 1, 0.0, ap);
    REQUIRE(s.entries().size() == 1);
    CHECK(s.entries()[0].t_set == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("arrival close behind a same-class platoon joins it (case 1)") {
    Schedule s(theta, 0.5);
    s.insert_ms(OdClass::k1, 1, 0.0, ap);
    s.insert_ms(OdClass::k1, 2, 0.2, ap);
    s.insert_ms(OdClass::k2, 1, 0.3, ap);  // tail, cross headway
    // New class-1 vehicle 0.5 s later: t_ms = 10.5 <= t_set(last 1) + 1.0.
    s.insert_ms(OdClass::k1, 3, 0.5, ap);
    REQUIRE(s.entries().size() == 4);
    CHECK(s.entries()[2].cls == OdClass::k1);
    CHECK(s.entries()[2].index == 3);
    // Platoon: 10.0, 11.0, 12.0; displaced class-2 vehicle chains after.
    CHECK(s.entries()[2].t_set == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(s.entries()[3].cls == OdClass::k2);
    CHECK(s.entries()[3].t_set == doctest::Approx(13.5).epsilon(1e-12));
  }
  SUBCASE("arrival far behind a platoon takes a wide downstream gap (case 2)") {
    Schedule s(theta, 0.5);
    s.insert_ms(OdClass::k1, 1, 0.0, ap);   // t_set 10
    s.insert_ms(OdClass::k2, 1, 0.0, ap);   // t_set 11.5
    s.insert_ms(OdClass::k2, 2, 20.0, ap);  // far future: t_set 30
    // Class-1 arrival at 8.0: t_ms 18; too late for slot 10 + 1.0 (case 1
    // fails); the [11.5, 30] gap holds 2 (theta21 + 0.5) = 3 <= 18.5 and
    // t_ms <= 30 + 1.5, so it lands between the two class-2 slots.
    s.insert_ms(OdClass::k1, 2, 8.0, ap);
    REQUIRE(s.entries().size() == 4);
    CHECK(s.entries()[2].cls == OdClass::k1);
    CHECK(s.entries()[2].index == 2);
    CHECK(s.entries()[2].t_set == doctest::Approx(18.0).epsilon(1e-12));
    // Downstream entry keeps its slot (unshifted).
    CHECK(s.entries()[3].t_set == doctest::Approx(30.0).epsilon(1e-12));
  }
}

TEST_CASE("lqf schedule rebuild") {
  const auto theta = theta_ref();
  const auto ap = approach_ref();
  SUBCASE("one empty class: plain FIFO order") {
    const auto s = lqf_schedule(
        {{0.0, OdClass::k1}, {0.1, OdClass::k1}, {0.2, OdClass::k1}}, theta, 0.5, ap, 1.0,
        TieRule::MaintainServingClass);
    REQUIRE(s.entries().size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.entries()[i].index == i + 1);
  }
  SUBCASE("balanced batch with maintain-class ties: frozen trace") {
    // Three of each class, all spawned before any slot begins.
    std::vector<ScheduledArrival> batch;
    for (int i = 0; i < 3; ++i) {
      batch.push_back({0.01 * i, OdClass::k1});
      batch.push_back({0.01 * i + 0.005, OdClass::k2});
    }
    const auto s =
        lqf_schedule(batch, theta, 0.5, ap, 1.0, TieRule::MaintainServingClass);
    REQUIRE(s.entries().size() == 6);
    // Rebuild trace: tie->serving(1), then longer(2), tie->2, longer(1),
    // tie->1, rest: [1, 2, 2, 1, 1, 2].
    const std::vector<OdClass> expect{OdClass::k1, OdClass::k2, OdClass::k2,
                                      OdClass::k1, OdClass::k1, OdClass::k2};
    for (std::size_t i = 0; i < 6; ++i) CHECK(s.entries()[i].cls == expect[i]);
  }
  SUBCASE("prefer-class-1 ties alternate differently") {
    std::vector<ScheduledArrival> batch;
    for (int i = 0; i < 2; ++i) {
      batch.push_back({0.01 * i, OdClass::k2});
      batch.push_back({0.01 * i + 0.005, OdClass::k1});
    }
    const auto s = lqf_schedule(batch, theta, 0.5, ap, 1.0, TieRule::PreferClass1);
    // tie -> class 1, then 2 is longer, tie -> 1, rest 2: [1, 2, 1, 2].
    const std::vector<OdClass> expect{OdClass::k1, OdClass::k2, OdClass::k1, OdClass::k2};
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.entries()[i].cls == expect[i]);
  }
  SUBCASE("rebuild never reorders within a class") {
    const auto arrivals = poisson_arrivals(5, 400, 0.3, 0.3);
    const auto s = lqf_schedule(arrivals, theta, 0.5, ap, 1.0, TieRule::MaintainServingClass);
    std::array<std::uint32_t, 2> seen{0, 0};
    for (const auto& e : s.entries()) {
      CHECK(e.index == seen[idx(e.cls)] + 1);
      seen[idx(e.cls)] = e.index;
    }
  }
}

TEST_CASE("schedule slot feasibility on random streams") {
  const auto theta = theta_ref();
  const auto ap = approach_ref();
  const auto arrivals = poisson_arrivals(17, 3000, 0.3, 0.25);
  const auto f = fifo_schedule(arrivals, theta, 0.5, ap);
  CHECK_FALSE(f.find_slot_violation().has_value());
  const auto m = ms_schedule(arrivals, theta, 0.5, ap);
  CHECK_FALSE(m.find_slot_violation().has_value());
  const auto l = lqf_schedule(arrivals, theta, 0.5, ap, 1.0, TieRule::MaintainServingClass);
  CHECK_FALSE(l.find_slot_violation().has_value());
}

TEST_CASE("online monotonicity: committed set times never decrease") {
  const auto theta = theta_ref();
  const auto ap = approach_ref();
  const auto arrivals = poisson_arrivals(23, 500, 0.35, 0.3);
  for (PolicyKind kind : {PolicyKind::Fifo, PolicyKind::Ms}) {
    Schedule s(theta, 0.5);
    std::array<std::uint32_t, 2> next{0, 0};
    std::vector<double> committed_tset;
    for (const auto& a : arrivals) {
      s.commit_until(a.entry_time);
      // Record committed slots, then check they never moved.
      committed_tset.resize(s.committed());
      for (std::size_t i = 0; i < s.committed(); ++i) {
        if (committed_tset[i] == 0.0) committed_tset[i] = s.entries()[i].t_set;
        CHECK(s.entries()[i].t_set >= committed_tset[i] - 1e-12);
      }
      const std::uint32_t index = ++next[idx(a.cls)];
      if (kind == PolicyKind::Fifo)
        s.append_fifo(a.cls, index, a.entry_time, ap);
      else
        s.insert_ms(a.cls, index, a.entry_time, ap);
    }
  }
}

TEST_CASE("trajectory planner") {
  const auto ap = approach_ref();
  SUBCASE("at nominal speed with a tight slot: cruise") {
    const auto r = plan_trajectory(0.0, 15.0, 0.0, 10.0, ap);
    CHECK(r.t_min == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(r.accel_command == 0.0);
  }
  SUBCASE("from rest across the full zone: accelerate, T_min by the two-case formula") {
    // v_max reachable: 15/2.5 + (150 - 45)/15 = 13.
    const auto r = plan_trajectory(0.0, 0.0, 0.0, 13.0, ap);
    CHECK(r.t_min == doctest::Approx(13.0).epsilon(1e-12));
    CHECK(r.accel_command == ap.accel);
  }
  SUBCASE("still-accelerating case of the T_min formula") {
    ApproachSpec shortzone = ap;
    shortzone.length = 20.0;  // v_max^2 / (2 a) = 45 > 20
    const auto r = plan_trajectory(0.0, 0.0, 0.0, 100.0, shortzone);
    CHECK(r.t_min == doctest::Approx(std::sqrt(2.0 * 20.0 / 2.5)).epsilon(1e-12));
    CHECK(r.accel_command == 0.0);  // early but already stopped: hold
  }
  SUBCASE("early vehicle decelerates") {
    const auto r = plan_trajectory(100.0, 15.0, 0.0, 20.0, ap);
    CHECK(r.t_min < 20.0);
    CHECK(r.accel_command == ap.decel);
  }
  SUBCASE("kinematically impossible states rejected") {
    CHECK_THROWS_AS(plan_trajectory(0.0, 16.0, 0.0, 10.0, ap), std::invalid_argument);
    CHECK_THROWS_AS(plan_trajectory(-1.0, 10.0, 0.0, 10.0, ap), std::invalid_argument);
  }
}

TEST_CASE("micro-sim: free flow and schedule tracking") {
  const auto ap = approach_ref();
  SUBCASE("one vehicle on an empty road has (near) zero delay") {
    MicroSimConfig c;
    c.policy = PolicyConfig{PolicyKind::Fifo, 1.0, TieRule::MaintainServingClass};
    c.theta = theta_ref();
    c.mean_r = 0.5;
    c.approach = ap;
    c.horizon = 60.0;
    c.scripted_arrivals = std::vector<ScheduledArrival>{{1.0, OdClass::k1}};
    const auto r = micro_sim(c);
    REQUIRE(r.crossed == 1);
    CHECK(std::abs(r.vehicles[0].delay) <= ap.dt + 1e-9);
    CHECK(r.max_set_time_error <= ap.dt + 1e-9);
  }
  SUBCASE("ten-vehicle scenario: crossing times match slots within one step") {
    MicroSimConfig c;
    c.policy = PolicyConfig{PolicyKind::Ms, 1.0, TieRule::MaintainServingClass};
    c.theta = theta_ref();
    c.mean_r = 0.5;
    c.approach = ap;
    c.horizon = 120.0;
    std::vector<ScheduledArrival> script;
    for (int i = 0; i < 5; ++i) {
      script.push_back({1.0 + 1.2 * i, OdClass::k1});
      script.push_back({1.6 + 1.2 * i, OdClass::k2});
    }
    std::sort(script.begin(), script.end(),
              [](const ScheduledArrival& a, const ScheduledArrival& b) {
                return a.entry_time < b.entry_time;
              });
    c.scripted_arrivals = script;
    const auto r = micro_sim(c);
    CHECK(r.crossed == 10);
    CHECK(r.max_set_time_error <= ap.dt + 1e-9);
  }
  SUBCASE("speed box and trajectory log columns") {
    MicroSimConfig c;
    c.policy = PolicyConfig{PolicyKind::Fifo, 1.0, TieRule::MaintainServingClass};
    c.theta = theta_ref();
    c.mean_r = 0.5;
    c.demand = DemandProfile(0.3, 0.3);
    c.approach = ap;
    c.horizon = 120.0;
    c.seed = 8;
    c.record_trajectories = true;
    const auto r = micro_sim(c);
    REQUIRE(!r.trajectory.empty());
    for (const auto& s : r.trajectory) {
      CHECK(s.speed >= -1e-12);
      CHECK(s.speed <= ap.v_max + 1e-12);
      const bool known = s.accel == 0.0 || s.accel == ap.accel || s.accel == ap.decel;
      CHECK(known);
    }
  }
}

TEST_CASE("micro-sim delay ordering: MS below FIFO below LQF on matched samples") {
  const auto ap = approach_ref();
  int ms_best = 0, lqf_worst = 0;
  const int samples = 12;
  for (int s = 0; s < samples; ++s) {
    // One Bernoulli arrival sample shared by all three policies.
    RandomStream rng(1000 + static_cast<unsigned>(s));
    std::vector<ScheduledArrival> script;
    for (double t = 0.0; t < 150.0; t += ap.dt) {
      if (rng.bernoulli(0.3 * ap.dt)) script.push_back({t, OdClass::k1});
      if (rng.bernoulli(0.3 * ap.dt)) script.push_back({t, OdClass::k2});
    }
    double delay[3] = {0, 0, 0};
    int i = 0;
    for (PolicyKind k : {PolicyKind::Fifo, PolicyKind::Ms, PolicyKind::Lqf}) {
      MicroSimConfig c;
      c.policy = PolicyConfig{k, 1.0, TieRule::MaintainServingClass};
      c.theta = theta_ref();
      c.mean_r = 0.5;
      c.approach = ap;
      c.horizon = 240.0;
      c.scripted_arrivals = script;
      delay[i++] = micro_sim(c).mean_delay;
    }
    ms_best += delay[1] < delay[0];
    lqf_worst += delay[2] > delay[0];
  }
  CHECK(ms_best >= samples - 2);
  CHECK(lqf_worst >= samples - 2);
}

TEST_CASE("micro-sim departure order matches the event-driven layer under FIFO") {
  const auto theta = theta_ref();
  const auto ap = approach_ref();
  const auto arrivals = poisson_arrivals(31, 60, 0.25, 0.25);

  MicroSimConfig c;
  c.policy = PolicyConfig{PolicyKind::Fifo, 1.0, TieRule::MaintainServingClass};
  c.theta = theta;
  c.mean_r = 0.5;
  c.approach = ap;
  c.horizon = arrivals.back().entry_time + 300.0;
  c.scripted_arrivals = arrivals;
  const auto micro = micro_sim(c);
  REQUIRE(micro.crossed == arrivals.size());

  // Event-driven layer fed the same virtual arrivals with deterministic R.
  HybridState state;
  PolicyState pol = make_policy_state(c.policy);
  std::array<std::uint32_t, 2> next{0, 0};
  std::vector<Departure> deps, all;
  for (const auto& a : arrivals) {
    deps.clear();
    advance(state, minimal_set_time(a.entry_time, ap) - state.clock, deps);
    for (const auto& d : deps) all.push_back(d);
    apply_departures(pol, state, deps);
    apply_arrival(state, pol, a.cls, 0.5, theta, ++next[idx(a.cls)]);
  }
  deps.clear();
  advance(state, 1e9, deps);
  for (const auto& d : deps) all.push_back(d);

  REQUIRE(all.size() == micro.vehicles.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].cls == micro.vehicles[i].cls);
    CHECK(all[i].index == micro.vehicles[i].index);
  }
}
