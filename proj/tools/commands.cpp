#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "intersim/analytics.hpp"
#include "intersim/rng.hpp"

namespace intersim::cli {

using nlohmann::json;
namespace an = intersim::analytics;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::optional<std::string> resolve_output(const ExperimentConfig& cfg,
                                          const CommonOptions& opts,
                                          const std::string& default_name) {
  if (opts.output) return *opts.output;
  if (cfg.output_dir) return (std::filesystem::path(*cfg.output_dir) / default_name).string();
  if (const char* dir = std::getenv("INTERSIM_OUTPUT_DIR"))
    return (std::filesystem::path(dir) / default_name).string();
  return std::nullopt;  // stdout
}

namespace {

int write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return 0;
  }
  std::filesystem::path p(*path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << *path << "\n";
    return 3;
  }
  out << text;
  return out.good() ? 0 : 3;
}

json report_json(const an::BoundsReport& r, const ExperimentConfig& cfg, double beta) {
  auto policy = [](const an::PolicyReport& p, const char* upper_name) {
    json j{{"stable", p.stable}, {"margin", p.margin}};
    j["w0"] = p.w0 ? json(*p.w0) : json(nullptr);
    j[upper_name] = p.w_upper ? json(*p.w_upper) : json(nullptr);
    if (p.beta_window)
      j["beta_window"] = json::array({p.beta_window->lo, p.beta_window->hi});
    return j;
  };
  json j;
  j["lambda"] = {cfg.spec.demand.at(0), cfg.spec.demand.at(1)};
  j["mean_r"] = cfg.spec.crossing_time.mean();
  j["var_r"] = cfg.spec.crossing_time.variance();
  j["max_r"] = cfg.max_r;
  j["beta"] = beta;
  j["fifo"] = policy(r.fifo, "w1");
  j["ms"] = policy(r.ms, "w2");
  j["lqf"] = policy(r.lqf, "w3");
  if (!r.lqf.beta_window) j["lqf"]["beta_window"] = json(nullptr);
  j["w0_display"] = r.w0_display ? json(*r.w0_display) : json(nullptr);
  return j;
}

PolicyConfig lqf_policy_of(const ExperimentConfig& cfg) {
  for (const auto& p : cfg.policies)
    if (p.kind == PolicyKind::Lqf) return p;
  return {PolicyKind::Lqf, 1.0, TieRule::MaintainServingClass};
}

}  // namespace

int cmd_bounds(const ExperimentConfig& cfg, const CommonOptions& opts) {
  const double beta = lqf_policy_of(cfg).beta;
  const auto report = an::bounds_report(
      cfg.spec.demand, cfg.spec.theta, cfg.spec.crossing_time.mean(),
      cfg.spec.crossing_time.variance(), cfg.max_r, beta, cfg.lqf_literal_b22);
  return write_text(resolve_output(cfg, opts, "bounds.json"),
                    report_json(report, cfg, beta).dump(2) + "\n");
}

int cmd_simulate(const ExperimentConfig& cfg, const CommonOptions& opts) {
  SimConfig sim = cfg.sim_template();
  if (opts.seed) sim.seed = *opts.seed;
  const SimResult r = run(sim);
  json j;
  j["policy"] = to_string(sim.policy.kind);
  j["lambda"] = {sim.spec.demand.at(0), sim.spec.demand.at(1)};
  j["horizon"] = sim.horizon;
  j["warmup"] = sim.effective_warmup();
  j["seed"] = sim.seed;
  j["replications"] = sim.replications;
  j["time_avg_workload"] = r.time_avg_workload;
  j["per_vehicle_delay_mean"] = r.per_vehicle_delay_mean;
  j["mean_system_time"] = r.mean_system_time;
  j["throughput"] = r.throughput;
  j["switchovers"] = r.switchovers;
  j["max_workload"] = r.max_workload;
  j["mean_number_in_system"] = r.mean_number_in_system;
  j["verdict"] = to_string(r.verdict);
  j["window_means"] = r.window_means;
  j["arrivals"] = r.arrivals;
  j["departures"] = r.departures;
  return write_text(resolve_output(cfg, opts, "simulate.json"), j.dump(2) + "\n");
}

int cmd_sweep(const ExperimentConfig& cfg, const CommonOptions& opts) {
  if (!cfg.grid) {
    std::cerr << "error: /grid: sweep requires a demand grid\n";
    return 2;
  }
  const auto points = expand_grid(*cfg.grid);
  std::ostringstream csv;
  csv << "lambda1,lambda2,policy,mean_delay,congested,verdict\n";
  for (const auto& policy : cfg.policies) {
    SimConfig base = cfg.sim_template();
    base.policy = policy;
    if (opts.seed) base.seed = *opts.seed;
    std::cerr << "sweep: policy " << to_string(policy.kind) << " over " << points.size()
              << " points\n";
    const auto rows = estimate_delay_surface(points, base, opts.jobs);
    for (const auto& row : rows) {
      csv << fmt_double(row.lambda1) << ',' << fmt_double(row.lambda2) << ','
          << to_string(policy.kind) << ',' << fmt_double(row.mean_delay) << ','
          << (row.congested ? 1 : 0) << ',' << to_string(row.verdict) << '\n';
    }
  }
  return write_text(resolve_output(cfg, opts, "sweep.csv"), csv.str());
}

int cmd_region(const ExperimentConfig& cfg, const CommonOptions& opts) {
  std::ostringstream csv;
  csv << "policy,p1,lambda_bar,lambda1,lambda2\n";
  const double mean_r = cfg.spec.crossing_time.mean();
  for (const auto& policy : cfg.policies) {
    const auto pts =
        an::capacity_region(policy.kind, cfg.spec.theta, mean_r, cfg.max_r, cfg.rays);
    for (const auto& pt : pts)
      csv << to_string(policy.kind) << ',' << fmt_double(pt.p[0]) << ','
          << fmt_double(pt.lambda_bar) << ',' << fmt_double(pt.lambda[0]) << ','
          << fmt_double(pt.lambda[1]) << '\n';
  }
  return write_text(resolve_output(cfg, opts, "region.csv"), csv.str());
}

int cmd_micro_sim(const ExperimentConfig& cfg, const CommonOptions& opts) {
  MicroSimConfig mc;
  mc.policy = cfg.policies.front();
  mc.theta = cfg.spec.theta;
  mc.mean_r = cfg.spec.crossing_time.mean();
  mc.demand = cfg.spec.demand;
  mc.approach = cfg.approach;
  mc.horizon = cfg.micro_horizon;
  mc.seed = opts.seed ? *opts.seed : cfg.seed;
  mc.record_trajectories = cfg.record_trajectories;
  const auto r = micro_sim(mc);

  std::ostringstream csv;
  csv << "vehicle_id,class,entry_time,crossing_time,delay\n";
  for (const auto& v : r.vehicles)
    csv << v.id << ',' << label(v.cls) << ',' << fmt_double(v.entry_time) << ','
        << fmt_double(v.crossing_time) << ',' << fmt_double(v.delay) << '\n';
  const int rc = write_text(resolve_output(cfg, opts, "microsim_delays.csv"), csv.str());
  if (rc != 0) return rc;

  if (cfg.record_trajectories) {
    std::ostringstream traj;
    traj << "t,vehicle_id,class,position,speed,accel\n";
    for (const auto& s : r.trajectory)
      traj << fmt_double(s.t) << ',' << s.id << ',' << label(s.cls) << ','
           << fmt_double(s.position) << ',' << fmt_double(s.speed) << ','
           << fmt_double(s.accel) << '\n';
    CommonOptions traj_opts = opts;
    traj_opts.output.reset();  // trajectories always go next to the delay log
    const int rt = write_text(resolve_output(cfg, traj_opts, "trajectories.csv"), traj.str());
    if (rt != 0) return rt;
  }

  std::cerr << "micro-sim: " << r.spawned << " spawned, " << r.crossed
            << " crossed, mean delay " << fmt_double(r.mean_delay)
            << " s/veh, max |crossing - t_set| " << fmt_double(r.max_set_time_error) << " s\n";
  return 0;
}

int cmd_drift_probe(const ExperimentConfig& cfg, const CommonOptions& opts) {
  const auto d = drift_probe(cfg.drift.x, cfg.drift.y, cfg.spec, PolicyKind::Fifo,
                             cfg.drift.samples, opts.seed ? *opts.seed : cfg.seed);
  const auto coeff =
      an::fifo_drift_coefficients(cfg.spec.demand, cfg.spec.theta,
                                  cfg.spec.crossing_time.mean(),
                                  cfg.spec.crossing_time.variance());
  json j;
  j["x"] = {cfg.drift.x[0], cfg.drift.x[1]};
  j["y"] = label(cfg.drift.y);
  j["closed_form"] = d.closed_form;
  j["monte_carlo"] = d.monte_carlo;
  j["std_error"] = d.std_error;
  j["samples"] = d.samples;
  j["c1"] = coeff.c1;
  j["d1"] = coeff.d1;
  return write_text(resolve_output(cfg, opts, "drift.json"), j.dump(2) + "\n");
}

}  // namespace intersim::cli
