#include "intersim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "intersim/rng.hpp"

namespace intersim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::size_t Schedule::insert_at(std::size_t pos, ScheduleEntry entry) {
  pos = std::max(pos, committed_);
  entries_.insert(entries_.begin() + static_cast<std::ptrdiff_t>(pos), entry);
  reindex_from(pos);
  recompute_from(pos);
  return pos;
}

void Schedule::reindex_from(std::size_t pos) {
  for (std::size_t i = pos; i < entries_.size(); ++i)
    position_[key(entries_[i].cls, entries_[i].index)] = i;
}

void Schedule::recompute_from(std::size_t pos, bool force) {
  if (entries_.empty()) return;
  if (pos == 0) entries_[0].t_set = entries_[0].t_floor;
  for (std::size_t i = std::max<std::size_t>(pos, 1); i < entries_.size(); ++i) {
    const ScheduleEntry& prev = entries_[i - 1];
    const double chained = prev.t_set + theta_(prev.cls, entries_[i].cls) + mean_r_;
    const double t = std::max(entries_[i].t_floor, chained);
    if (!force && t == entries_[i].t_set && i != pos) break;  // downstream unaffected
    entries_[i].t_set = t;
  }
}

std::size_t Schedule::append_fifo(OdClass cls, std::uint32_t index, double entry_time,
                                  const ApproachSpec& approach) {
  const double t_ms = minimal_set_time(entry_time, approach);
  ScheduleEntry e{cls, index, entry_time, t_ms, t_ms, t_ms, false};
  if (!entries_.empty()) {
    const ScheduleEntry& prev = entries_.back();
    e.t_set = std::max(t_ms, prev.t_set + theta_(prev.cls, cls) + mean_r_);
  }
  entries_.push_back(e);
  position_[key(cls, index)] = entries_.size() - 1;
  return entries_.size() - 1;
}

std::size_t Schedule::insert_ms(OdClass cls, std::uint32_t index, double entry_time,
                                const ApproachSpec& approach) {
  const double t_ms = minimal_set_time(entry_time, approach);
  ScheduleEntry e{cls, index, entry_time, t_ms, t_ms, t_ms, false};

  std::ptrdiff_t last_same = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(entries_.size()) - 1; i >= 0; --i)
    if (entries_[static_cast<std::size_t>(i)].cls == cls) {
      last_same = i;
      break;
    }

  const double theta_same = theta_(cls, cls);
  const double theta_cross = theta_(other(cls), cls);

  if (last_same >= 0 && static_cast<std::size_t>(last_same) + 1 >= committed_ &&
      t_ms <= entries_[static_cast<std::size_t>(last_same)].t_set + theta_same + mean_r_) {
    return insert_at(static_cast<std::size_t>(last_same) + 1, e);
  }

  // Scan forward for a slot gap wide enough to hold one more crossing. The
  // scan never places the newcomer ahead of the whole schedule: position 0 is
  // reachable only when the schedule is empty.
  std::ptrdiff_t j = std::max(last_same, static_cast<std::ptrdiff_t>(committed_) - 1);
  if (!entries_.empty()) j = std::max<std::ptrdiff_t>(j, 0);
  while (true) {
    const std::size_t next = static_cast<std::size_t>(j + 1);
    if (next >= entries_.size()) return insert_at(entries_.size(), e);
    const double t_prev = entries_[static_cast<std::size_t>(j)].t_set;
    if (t_ms <= entries_[next].t_set + theta_cross + mean_r_ &&
        2.0 * (theta_cross + mean_r_) <= entries_[next].t_set - t_prev)
      return insert_at(next, e);
    ++j;
  }
}

std::size_t Schedule::add_lqf(OdClass cls, std::uint32_t index, double entry_time,
                              const ApproachSpec& approach, double beta, TieRule tie_rule) {
  const double t_ms = minimal_set_time(entry_time, approach);
  ScheduleEntry e{cls, index, entry_time, t_ms, t_ms, t_ms, false};
  entries_.push_back(e);
  position_[key(cls, index)] = entries_.size() - 1;
  rebuild_lqf(beta, tie_rule);
  const auto pos = position_of(cls, index);
  return pos ? *pos : entries_.size() - 1;
}

void Schedule::rebuild_lqf(double beta, TieRule tie_rule) {
  if (committed_ >= entries_.size()) return;

  std::array<std::deque<ScheduleEntry>, 2> pool;
  for (std::size_t i = committed_; i < entries_.size(); ++i)
    pool[idx(entries_[i].cls)].push_back(entries_[i]);
  // Preserve per-class FIFO by entry order.
  for (auto& q : pool)
    std::sort(q.begin(), q.end(),
              [](const ScheduleEntry& a, const ScheduleEntry& b) { return a.index < b.index; });

  OdClass serving = committed_ > 0 ? entries_[committed_ - 1].cls : OdClass::k1;
  std::array<double, 2> temporal{0.0, 0.0};
  for (int k = 0; k < 2; ++k)
    temporal[k] = static_cast<double>(pool[k].size()) * (theta_.at(k, k) + mean_r_);

  std::size_t write = committed_;
  while (!pool[0].empty() || !pool[1].empty()) {
    OdClass take;
    if (pool[0].empty()) {
      take = OdClass::k2;
    } else if (pool[1].empty()) {
      take = OdClass::k1;
    } else if (temporal[0] > beta * temporal[1]) {
      take = OdClass::k1;
    } else if (temporal[0] < beta * temporal[1]) {
      take = OdClass::k2;
    } else {
      take = tie_rule == TieRule::PreferClass1 ? OdClass::k1 : serving;
    }
    entries_[write++] = pool[idx(take)].front();
    pool[idx(take)].pop_front();
    temporal[idx(take)] -= theta_.at(idx(take), idx(take)) + mean_r_;
    serving = take;
  }
  reindex_from(committed_);
  recompute_from(committed_, /*force=*/true);
}

void Schedule::commit_until(double now) {
  while (committed_ < entries_.size() &&
         (entries_[committed_].crossed || entries_[committed_].t_set <= now))
    ++committed_;
}

void Schedule::relax(OdClass cls, std::uint32_t index, double new_floor) {
  const auto pos = position_of(cls, index);
  if (!pos || entries_[*pos].crossed) return;
  if (new_floor <= entries_[*pos].t_floor) return;
  entries_[*pos].t_floor = new_floor;
  entries_[*pos].t_set = std::max(entries_[*pos].t_set, new_floor);
  recompute_from(*pos + 1);
}

void Schedule::mark_crossed(OdClass cls, std::uint32_t index) {
  const auto pos = position_of(cls, index);
  if (!pos) return;
  entries_[*pos].crossed = true;
  if (*pos < committed_) return;
  // A crossed vehicle is committed by definition; everything sequenced ahead
  // of it has begun as well.
  committed_ = std::max(committed_, *pos + 1);
}

std::optional<std::size_t> Schedule::position_of(OdClass cls, std::uint32_t index) const {
  const auto it = position_.find(key(cls, index));
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

const ScheduleEntry* Schedule::find(OdClass cls, std::uint32_t index) const {
  const auto pos = position_of(cls, index);
  return pos ? &entries_[*pos] : nullptr;
}

std::optional<std::size_t> Schedule::find_slot_violation(double tol) const {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    const double need = theta_(entries_[i - 1].cls, entries_[i].cls) + mean_r_;
    if (entries_[i].t_set - entries_[i - 1].t_set + tol < need) return i;
  }
  return std::nullopt;
}

namespace {
Schedule build_stream(const std::vector<ScheduledArrival>& arrivals,
                      const HeadwayMatrix& theta, double mean_r,
                      const ApproachSpec& approach, PolicyKind kind, double beta,
                      TieRule tie_rule) {
  Schedule s(theta, mean_r);
  std::array<std::uint32_t, 2> next{0, 0};
  for (const auto& a : arrivals) {
    s.commit_until(a.entry_time);
    const std::uint32_t index = ++next[idx(a.cls)];
    switch (kind) {
      case PolicyKind::Fifo: s.append_fifo(a.cls, index, a.entry_time, approach); break;
      case PolicyKind::Ms: s.insert_ms(a.cls, index, a.entry_time, approach); break;
      case PolicyKind::Lqf: s.add_lqf(a.cls, index, a.entry_time, approach, beta, tie_rule); break;
    }
  }
  return s;
}
}  // namespace

Schedule fifo_schedule(const std::vector<ScheduledArrival>& arrivals,
                       const HeadwayMatrix& theta, double mean_r,
                       const ApproachSpec& approach) {
  return build_stream(arrivals, theta, mean_r, approach, PolicyKind::Fifo, 1.0,
                      TieRule::MaintainServingClass);
}

Schedule ms_schedule(const std::vector<ScheduledArrival>& arrivals,
                     const HeadwayMatrix& theta, double mean_r,
                     const ApproachSpec& approach) {
  return build_stream(arrivals, theta, mean_r, approach, PolicyKind::Ms, 1.0,
                      TieRule::MaintainServingClass);
}

Schedule lqf_schedule(const std::vector<ScheduledArrival>& arrivals,
                      const HeadwayMatrix& theta, double mean_r,
                      const ApproachSpec& approach, double beta, TieRule tie_rule) {
  return build_stream(arrivals, theta, mean_r, approach, PolicyKind::Lqf, beta, tie_rule);
}

PlanResult plan_trajectory(double position, double speed, double now, double t_set,
                           const ApproachSpec& approach) {
  approach.validate();
  const double tol = 1e-9;
  if (speed < -tol || speed > approach.v_max + tol)
    throw std::invalid_argument("plan_trajectory: speed outside [0, v_max]");
  if (position < -tol || position > approach.length + tol)
    throw std::invalid_argument("plan_trajectory: position outside the approaching zone");
  const double v = std::clamp(speed, 0.0, approach.v_max);
  const double d = std::max(0.0, approach.length - position);

  const double dv2 = approach.v_max * approach.v_max - v * v;
  double togo;
  if (dv2 / (2.0 * approach.accel) > d) {
    togo = (-v + std::sqrt(v * v + 2.0 * approach.accel * d)) / approach.accel;
  } else {
    togo = (approach.v_max - v) / approach.accel + (d - dv2 / (2.0 * approach.accel)) / approach.v_max;
  }
  const double t_min = now + togo;

  double a = 0.0;
  if (v < approach.v_max && t_min >= t_set)
    a = approach.accel;
  else if (v > 0.0 && t_min < t_set)
    a = approach.decel;
  return {a, t_min};
}

namespace {

struct ActiveVehicle {
  std::uint32_t id;
  OdClass cls;
  std::uint32_t index;
  double entry_time;
  double pos;
  double v;
  double a;
};

}  // namespace

MicroSimResult micro_sim(const MicroSimConfig& config) {
  config.approach.validate();
  const ApproachSpec& ap = config.approach;
  const double dt = ap.dt;
  const double free_flow = ap.free_flow_time();
  if (config.demand.at(0) * dt > 1.0 || config.demand.at(1) * dt > 1.0)
    throw std::invalid_argument("micro_sim: lambda*dt must not exceed 1");

  Schedule schedule(config.theta, config.mean_r);
  RandomStream rng(config.seed);
  std::array<std::vector<ActiveVehicle>, 2> lane;  // front of lane = begin()
  std::array<double, 2> last_spawn{-kInf, -kInf};
  std::array<std::uint32_t, 2> next_index{0, 0};
  std::uint32_t next_id = 0;
  std::size_t scripted_next = 0;

  MicroSimResult result;
  const auto steps = static_cast<std::uint64_t>(std::ceil(config.horizon / dt));

  auto spawn = [&](OdClass cls, double t) -> bool {
    auto& l = lane[idx(cls)];
    if (!l.empty()) {
      // Entering at v_max must leave room to brake down to the rear
      // vehicle's speed without crossing the safety gap.
      const ActiveVehicle& rear = l.back();
      const double closing = std::max(0.0, ap.v_max * ap.v_max - rear.v * rear.v);
      const double clearance =
          ap.safety_gap + closing / (2.0 * -ap.decel) + ap.v_max * dt;
      if (rear.pos < clearance) return false;
    }
    if (t - last_spawn[idx(cls)] < config.mean_r) return false;
    const std::uint32_t index = ++next_index[idx(cls)];
    ActiveVehicle v{next_id++, cls, index, t, 0.0, ap.v_max, 0.0};
    l.push_back(v);
    last_spawn[idx(cls)] = t;
    switch (config.policy.kind) {
      case PolicyKind::Fifo: schedule.append_fifo(cls, index, t, ap); break;
      case PolicyKind::Ms: schedule.insert_ms(cls, index, t, ap); break;
      case PolicyKind::Lqf:
        schedule.add_lqf(cls, index, t, ap, config.policy.beta, config.policy.tie_rule);
        break;
    }
    ++result.spawned;
    return true;
  };

  for (std::uint64_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    schedule.commit_until(t);

    // Arrivals.
    if (config.scripted_arrivals) {
      const auto& script = *config.scripted_arrivals;
      while (scripted_next < script.size() && script[scripted_next].entry_time <= t) {
        if (spawn(script[scripted_next].cls, t)) ++scripted_next;
        else break;  // blocked; retry next step to preserve the sample
      }
    } else {
      for (int k = 0; k < 2; ++k) {
        const bool hit = rng.bernoulli(config.demand.at(k) * dt);
        if (hit) spawn(od_from_index(k), t);
      }
    }

    // Controls.
    for (auto& l : lane) {
      for (std::size_t i = 0; i < l.size(); ++i) {
        ActiveVehicle& veh = l[i];
        const ScheduleEntry* entry = schedule.find(veh.cls, veh.index);
        const double t_set = entry ? entry->t_set : t;
        const PlanResult plan = plan_trajectory(veh.pos, veh.v, t, t_set, ap);
        if (plan.t_min > t_set + 1e-9)
          schedule.relax(veh.cls, veh.index, plan.t_min);  // cannot make the slot
        veh.a = plan.accel_command;
        if (i > 0) {
          // Car following: brake while the remaining gap cannot absorb the
          // speed difference at full deceleration.
          const ActiveVehicle& lead = l[i - 1];
          const double gap = lead.pos - veh.pos;
          const double closing = std::max(0.0, veh.v * veh.v - lead.v * lead.v);
          const double need = ap.safety_gap + closing / (2.0 * -ap.decel) + veh.v * dt;
          if (gap <= need) veh.a = ap.decel;
        }
      }
    }

    // Kinematics, crossings, safety.
    for (auto& l : lane) {
      for (auto& veh : l) {
        const double v_new = std::clamp(veh.v + veh.a * dt, 0.0, ap.v_max);
        veh.pos += 0.5 * (veh.v + v_new) * dt;
        veh.v = v_new;
        if (config.record_trajectories)
          result.trajectory.push_back({t + dt, veh.id, veh.cls, veh.pos, veh.v, veh.a});
      }
      for (std::size_t i = 1; i < l.size(); ++i) {
        if (l[i - 1].pos - l[i].pos < ap.safety_gap - 1e-6)
          throw std::runtime_error("micro_sim: safety gap violated in lane " +
                                   std::to_string(label(l[i].cls)) + " at t=" +
                                   std::to_string(t + dt));
      }
      while (!l.empty() && l.front().pos >= ap.length) {
        ActiveVehicle veh = l.front();
        l.erase(l.begin());
        // Interpolate the crossing instant inside the step.
        const double overshoot = veh.pos - ap.length;
        const double t_cross = veh.v > 0.0 ? (t + dt) - overshoot / veh.v : t + dt;
        schedule.mark_crossed(veh.cls, veh.index);
        const ScheduleEntry* entry = schedule.find(veh.cls, veh.index);
        const double t_set = entry ? entry->t_set : t_cross;
        MicroVehicleRecord rec{veh.id,  veh.cls, veh.index, veh.entry_time,
                               t_cross, t_set,   t_cross - veh.entry_time - free_flow};
        result.vehicles.push_back(rec);
        result.max_set_time_error =
            std::max(result.max_set_time_error, std::abs(t_cross - t_set));
        ++result.crossed;
        if (config.policy.kind == PolicyKind::Lqf)
          schedule.rebuild_lqf(config.policy.beta, config.policy.tie_rule);
      }
    }
  }

  result.slots_ok = !schedule.find_slot_violation().has_value();
  if (!result.vehicles.empty()) {
    double sum = 0.0;
    for (const auto& v : result.vehicles) sum += v.delay;
    result.mean_delay = sum / static_cast<double>(result.vehicles.size());
    std::sort(result.vehicles.begin(), result.vehicles.end(),
              [](const MicroVehicleRecord& a, const MicroVehicleRecord& b) {
                return a.crossing_time < b.crossing_time;
              });
  }
  return result;
}

}  // namespace intersim
