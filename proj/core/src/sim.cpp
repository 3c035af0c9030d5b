#include "intersim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "intersim/analytics.hpp"
#include "intersim/policies.hpp"
#include "intersim/rng.hpp"

namespace intersim {

namespace {

constexpr int kWindows = 10;

// Accumulates exact integrals of the piecewise-linear workload and the
// piecewise-constant vehicle count over [warmup, horizon], split into equal
// windows for the stability heuristic.
class Integrals {
 public:
  Integrals(double warmup, double horizon)
      : warmup_(warmup), horizon_(horizon), window_len_((horizon - warmup) / kWindows) {
    window_integral_.assign(kWindows, 0.0);
  }

  // Segment starting at t0 of length len; workload w(t) = w0 - slope*(t-t0),
  // n vehicles in system throughout.
  void add(double t0, double len, double w0, double slope, std::size_t n) {
    const double a = std::max(t0, warmup_);
    const double b = std::min(t0 + len, horizon_);
    if (b <= a) return;
    const double wa = w0 - slope * (a - t0);
    const double span = b - a;
    workload_integral_ += wa * span - 0.5 * slope * span * span;
    count_integral_ += static_cast<double>(n) * span;
    max_workload_ = std::max(max_workload_, wa);

    double pos = a;
    double w = wa;
    while (pos < b) {
      int win = std::min(kWindows - 1, static_cast<int>((pos - warmup_) / window_len_));
      const double win_end = warmup_ + (win + 1) * window_len_;
      const double chunk = std::min(b, win_end) - pos;
      if (chunk <= 0.0) break;
      window_integral_[static_cast<std::size_t>(win)] += w * chunk - 0.5 * slope * chunk * chunk;
      w -= slope * chunk;
      pos += chunk;
    }
  }

  void note_jump(double t, double w) {
    if (t >= warmup_ && t <= horizon_) max_workload_ = std::max(max_workload_, w);
  }

  double time_avg_workload() const {
    const double span = horizon_ - warmup_;
    return span > 0.0 ? workload_integral_ / span : 0.0;
  }
  double mean_count() const {
    const double span = horizon_ - warmup_;
    return span > 0.0 ? count_integral_ / span : 0.0;
  }
  double max_workload() const { return max_workload_; }

  std::vector<double> window_means() const {
    std::vector<double> m(kWindows, 0.0);
    for (int i = 0; i < kWindows; ++i)
      m[static_cast<std::size_t>(i)] =
          window_len_ > 0.0 ? window_integral_[static_cast<std::size_t>(i)] / window_len_ : 0.0;
    return m;
  }

 private:
  double warmup_;
  double horizon_;
  double window_len_;
  double workload_integral_ = 0.0;
  double count_integral_ = 0.0;
  double max_workload_ = 0.0;
  std::vector<double> window_integral_;
};

// Growing iff the windowed means strictly increase over the last five windows
// and the final window exceeds three times the first post-warmup window.
Verdict classify(const std::vector<double>& windows) {
  if (windows.size() < 6) return Verdict::Bounded;
  for (std::size_t i = windows.size() - 5; i < windows.size(); ++i)
    if (!(windows[i] > windows[i - 1])) return Verdict::Bounded;
  return windows.back() > 3.0 * windows.front() ? Verdict::Growing : Verdict::Bounded;
}

// Drains the flow up to t_target, integrating and reporting departures.
template <typename OnDeparture>
void advance_integrated(HybridState& state, double t_target, Integrals& acc,
                        OnDeparture&& on_departure) {
  while (state.clock < t_target) {
    const double remaining = t_target - state.clock;
    if (state.sequence.empty()) {
      acc.add(state.clock, remaining, 0.0, 0.0, 0);
      state.clock = t_target;
      return;
    }
    Vehicle& head = state.sequence.front();
    const double w = workload(state);
    const std::size_t n = state.sequence.size();
    const int k = idx(head.cls);
    if (head.residual <= remaining) {
      const double step = head.residual;
      acc.add(state.clock, step, w, 1.0, n);
      state.clock += step;
      state.residual_sum[k] = std::max(0.0, state.residual_sum[k] - step);
      Departure d{state.clock, head.cls,          head.index, head.virtual_arrival,
                  head.crossing_time, head.service_time, 0,          0};
      state.sequence.pop_front();
      --state.class_count[k];
      d.remaining_same_class = state.class_count[k];
      d.remaining_other_class = state.class_count[1 - k];
      on_departure(d);
    } else {
      acc.add(state.clock, remaining, w, 1.0, n);
      head.residual -= remaining;
      state.residual_sum[k] = std::max(0.0, state.residual_sum[k] - remaining);
      state.clock = t_target;
      return;
    }
  }
}

}  // namespace

double per_vehicle_delay(const Vehicle& record, double departure_time) {
  if (departure_time < record.virtual_arrival)
    throw std::logic_error("per_vehicle_delay: departure precedes arrival");
  return departure_time - record.virtual_arrival - record.crossing_time;
}

double per_vehicle_delay(const Departure& record) {
  if (record.time < record.virtual_arrival)
    throw std::logic_error("per_vehicle_delay: departure precedes arrival");
  return record.time - record.virtual_arrival - record.crossing_time;
}

SimResult run_single(const SimConfig& config, std::uint64_t seed) {
  const double horizon = config.horizon;
  const double warmup = config.effective_warmup();
  if (!(horizon > warmup) || !(warmup >= 0.0))
    throw std::invalid_argument("sim requires horizon > warmup >= 0");

  RandomStream rng(seed);
  HybridState state;
  PolicyState policy = make_policy_state(config.policy);
  Integrals acc(warmup, horizon);
  const HeadwayMatrix& theta = config.spec.theta;

  SimResult res;
  std::array<std::uint32_t, 2> next_index{0, 0};
  double delay_sum = 0.0, system_time_sum = 0.0;
  std::uint64_t measured_departures = 0;
  std::uint64_t switchovers = 0;
  std::optional<OdClass> prev_departure_cls;
  std::vector<Departure> batch;

  auto on_departure = [&](const Departure& d) {
    batch.push_back(d);
    if (d.time >= warmup) {
      ++measured_departures;
      delay_sum += per_vehicle_delay(d);
      system_time_sum += d.time - d.virtual_arrival;
      if (prev_departure_cls && *prev_departure_cls != d.cls) ++switchovers;
      prev_departure_cls = d.cls;
    }
    if (config.collect_log) res.log.departures.push_back(d);
  };

  while (true) {
    const auto next = sample_interarrival(rng, config.spec.demand);
    const double t_arrival = next ? state.clock + next->dt : horizon;
    advance_integrated(state, std::min(t_arrival, horizon), acc, on_departure);
    if (!batch.empty()) {
      apply_departures(policy, state, batch);
      batch.clear();
    }
    if (!next || t_arrival > horizon) break;

    const double r = config.spec.crossing_time.quantile(rng.uniform());
    const OdClass cls = next->cls;
    const std::uint32_t index = ++next_index[idx(cls)];
    apply_arrival(state, policy, cls, r, theta, index);
    ++res.arrivals;
    acc.note_jump(state.clock, workload(state));
    if (config.collect_log) res.log.arrivals.push_back({state.clock, cls, index, r});
  }

  res.time_avg_workload = acc.time_avg_workload();
  res.mean_number_in_system = acc.mean_count();
  res.max_workload = acc.max_workload();
  res.window_means = acc.window_means();
  res.verdict = classify(res.window_means);
  res.departures = measured_departures;
  res.throughput = measured_departures / (horizon - warmup);
  res.per_vehicle_delay_mean =
      measured_departures > 0 ? delay_sum / static_cast<double>(measured_departures) : 0.0;
  res.mean_system_time =
      measured_departures > 0 ? system_time_sum / static_cast<double>(measured_departures) : 0.0;
  res.switchovers = static_cast<double>(switchovers);
  return res;
}

SimResult run(const SimConfig& config) {
  if (config.replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (config.replications == 1) return run_single(config, replication_seed(config.seed, 0));

  std::vector<SimResult> reps;
  reps.reserve(static_cast<std::size_t>(config.replications));
  for (int r = 0; r < config.replications; ++r) {
    SimConfig one = config;
    one.collect_log = config.collect_log && r == 0;
    reps.push_back(run_single(one, replication_seed(config.seed, static_cast<unsigned>(r))));
  }

  SimResult merged = reps.front();
  const double n = static_cast<double>(reps.size());
  int growing = merged.verdict == Verdict::Growing ? 1 : 0;
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const SimResult& r = reps[i];
    merged.time_avg_workload += r.time_avg_workload;
    merged.per_vehicle_delay_mean += r.per_vehicle_delay_mean;
    merged.mean_system_time += r.mean_system_time;
    merged.throughput += r.throughput;
    merged.switchovers += r.switchovers;
    merged.mean_number_in_system += r.mean_number_in_system;
    merged.max_workload = std::max(merged.max_workload, r.max_workload);
    merged.arrivals += r.arrivals;
    merged.departures += r.departures;
    for (std::size_t w = 0; w < merged.window_means.size(); ++w)
      merged.window_means[w] += r.window_means[w];
    growing += r.verdict == Verdict::Growing ? 1 : 0;
  }
  merged.time_avg_workload /= n;
  merged.per_vehicle_delay_mean /= n;
  merged.mean_system_time /= n;
  merged.throughput /= n;
  merged.switchovers /= n;
  merged.mean_number_in_system /= n;
  for (double& w : merged.window_means) w /= n;
  merged.verdict = 2 * growing >= config.replications ? Verdict::Growing : Verdict::Bounded;
  return merged;
}

std::vector<SurfacePoint> estimate_delay_surface(
    const std::vector<std::array<double, 2>>& grid, const SimConfig& base, int jobs) {
  std::vector<SurfacePoint> out(grid.size());
  auto work = [&](std::size_t i) {
    SimConfig cfg = base;
    cfg.collect_log = false;
    cfg.spec.demand = DemandProfile(grid[i][0], grid[i][1]);
    cfg.seed = replication_seed(base.seed, static_cast<unsigned>(i));
    const SimResult r = run(cfg);
    out[i] = {grid[i][0], grid[i][1], r.per_vehicle_delay_mean,
              r.per_vehicle_delay_mean >= kCongestionDelayThreshold, r.verdict};
  };

  const int workers = std::max(1, jobs);
  if (workers == 1 || grid.size() <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = cursor.fetch_add(1); i < grid.size(); i = cursor.fetch_add(1))
        work(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

DriftEstimate drift_probe(const std::array<double, 2>& x, OdClass y,
                          const IntersectionSpec& spec, PolicyKind policy,
                          std::uint64_t samples, std::uint64_t seed) {
  if (policy != PolicyKind::Fifo)
    throw std::invalid_argument("drift_probe is defined for the FIFO policy only");
  if (!(x[0] >= 0.0) || !(x[1] >= 0.0))
    throw std::invalid_argument("drift_probe: state components must be nonnegative");
  if (samples == 0) throw std::invalid_argument("drift_probe: needs at least one sample");

  const HeadwayMatrix& theta = spec.theta;
  const DemandProfile& lambda = spec.demand;
  const double mean_r = spec.crossing_time.mean();
  const double var_r = spec.crossing_time.variance();
  const double total = lambda.total();
  const auto a = analytics::balancing_terms(lambda, theta);
  const double norm = x[0] + x[1];
  const int yi = idx(y);

  double linear = -1.0;
  double constant = -a[yi];
  for (int k = 0; k < 2; ++k) {
    const double s_mean = theta.at(yi, k) + mean_r;
    linear += lambda.at(k) * s_mean;
    constant += 0.5 * lambda.at(k) * (s_mean * s_mean + var_r);
  }
  linear += lambda.at(1 - yi) * (a[1 - yi] - a[yi]);
  const double closed_form = linear * norm + constant;

  // Monte Carlo over the arrival jump of the generator; the deterministic
  // flow contribution is exact.
  const double flow = norm > 0.0 ? -(norm + a[yi]) : 0.0;
  RandomStream rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  const double v_before = 0.5 * norm * norm + a[yi] * norm;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const int k = rng.uniform() * total < lambda.at(0) ? 0 : 1;
    const double r = spec.crossing_time.quantile(rng.uniform());
    const double s = theta.at(yi, k) + r;
    const double norm_after = norm + s;
    const double dv = 0.5 * norm_after * norm_after + a[k] * norm_after - v_before;
    sum += dv;
    sum_sq += dv * dv;
  }
  const double n = static_cast<double>(samples);
  const double mean_dv = sum / n;
  const double var_dv = std::max(0.0, sum_sq / n - mean_dv * mean_dv);
  const double mc = flow + total * mean_dv;
  const double se = total * std::sqrt(var_dv / n);
  return {closed_form, mc, se, samples};
}

}  // namespace intersim
