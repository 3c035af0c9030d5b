#include "config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace intersim::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(path + "/" + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x > 0.0)) throw ConfigError(path, "must be positive");
  return x;
}

double nonnegative(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (!(x >= 0.0)) throw ConfigError(path, "must be nonnegative");
  return x;
}

CrossingTimeDist parse_crossing(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  const std::string family = require(v, path, "family").get<std::string>();
  try {
    if (family == "deterministic") {
      reject_unknown(v, path, {"family", "value"});
      return CrossingTimeDist::deterministic(positive(require(v, path, "value"), path + "/value"));
    }
    if (family == "uniform") {
      reject_unknown(v, path, {"family", "low", "high"});
      return CrossingTimeDist::uniform(positive(require(v, path, "low"), path + "/low"),
                                       positive(require(v, path, "high"), path + "/high"));
    }
    if (family == "discrete") {
      reject_unknown(v, path, {"family", "values", "probs"});
      const auto& values = require(v, path, "values");
      const auto& probs = require(v, path, "probs");
      if (!values.is_array() || !probs.is_array())
        throw ConfigError(path, "values/probs must be arrays");
      return CrossingTimeDist::discrete(values.get<std::vector<double>>(),
                                        probs.get<std::vector<double>>());
    }
    if (family == "two-point") {
      reject_unknown(v, path, {"family", "mean", "variance"});
      return CrossingTimeDist::two_point(
          positive(require(v, path, "mean"), path + "/mean"),
          nonnegative(require(v, path, "variance"), path + "/variance"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + "/family",
                    "unknown family (expected deterministic, uniform, discrete, two-point)");
}

PolicyConfig parse_policy(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "fifo") return {PolicyKind::Fifo, 1.0, TieRule::MaintainServingClass};
    if (name == "ms") return {PolicyKind::Ms, 1.0, TieRule::MaintainServingClass};
    if (name == "lqf") return {PolicyKind::Lqf, 1.0, TieRule::MaintainServingClass};
    throw ConfigError(path, "unknown policy (expected fifo, ms, lqf)");
  }
  if (!v.is_object()) throw ConfigError(path, "expected a policy name or object");
  reject_unknown(v, path, {"name", "beta", "tie_rule"});
  PolicyConfig p = parse_policy(require(v, path, "name"), path + "/name");
  if (v.contains("beta")) p.beta = positive(v.at("beta"), path + "/beta");
  if (v.contains("tie_rule")) {
    const std::string rule = v.at("tie_rule").get<std::string>();
    if (rule == "maintain-serving-class")
      p.tie_rule = TieRule::MaintainServingClass;
    else if (rule == "prefer-class-1")
      p.tie_rule = TieRule::PreferClass1;
    else
      throw ConfigError(path + "/tie_rule",
                        "unknown tie rule (expected maintain-serving-class, prefer-class-1)");
  }
  return p;
}

GridSpec parse_grid(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown(v, path, {"lambda1", "lambda2"});
  GridSpec g;
  auto axis = [&](const char* key, double& lo, double& hi, int& count) {
    const std::string p = path + "/" + key;
    const json& a = require(v, path, key);
    if (!a.is_object()) throw ConfigError(p, "expected an object");
    reject_unknown(a, p, {"min", "max", "count"});
    lo = nonnegative(require(a, p, "min"), p + "/min");
    hi = nonnegative(require(a, p, "max"), p + "/max");
    if (hi < lo) throw ConfigError(p, "max must be >= min");
    count = require(a, p, "count").get<int>();
    if (count < 1) throw ConfigError(p + "/count", "must be >= 1");
  };
  axis("lambda1", g.l1_min, g.l1_max, g.l1_count);
  axis("lambda2", g.l2_min, g.l2_max, g.l2_count);
  return g;
}

}  // namespace

SimConfig ExperimentConfig::sim_template() const {
  SimConfig c;
  c.spec = spec;
  c.policy = policies.front();
  c.horizon = horizon;
  c.warmup = warmup;
  c.seed = seed;
  c.replications = replications;
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(doc, "", {"version", "intersection", "policy", "policies", "sim", "grid",
                           "rays", "approach", "micro", "drift", "output",
                           "lqf_literal_b22"});
  const int version = require(doc, "", "version").get<int>();
  if (version != 1) throw ConfigError("/version", "unsupported config version (expected 1)");

  ExperimentConfig cfg;

  const json& inter = require(doc, "", "intersection");
  if (!inter.is_object()) throw ConfigError("/intersection", "expected an object");
  reject_unknown(inter, "/intersection", {"theta", "crossing_time", "lambda"});
  const json& theta = require(inter, "/intersection", "theta");
  if (!theta.is_array() || theta.size() != 2 || !theta[0].is_array() ||
      theta[0].size() != 2 || theta[1].size() != 2)
    throw ConfigError("/intersection/theta", "expected a 2x2 array");
  try {
    cfg.spec.theta = HeadwayMatrix(number(theta[0][0], "/intersection/theta"),
                                   number(theta[0][1], "/intersection/theta"),
                                   number(theta[1][0], "/intersection/theta"),
                                   number(theta[1][1], "/intersection/theta"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/intersection/theta", e.what());
  }
  cfg.spec.crossing_time =
      parse_crossing(require(inter, "/intersection", "crossing_time"),
                     "/intersection/crossing_time");
  cfg.max_r = cfg.spec.crossing_time.max();
  const json& lambda = require(inter, "/intersection", "lambda");
  if (!lambda.is_array() || lambda.size() != 2)
    throw ConfigError("/intersection/lambda", "expected a 2-vector");
  try {
    cfg.spec.demand = DemandProfile(number(lambda[0], "/intersection/lambda"),
                                    number(lambda[1], "/intersection/lambda"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/intersection/lambda", e.what());
  }

  if (doc.contains("policy")) cfg.policies.push_back(parse_policy(doc.at("policy"), "/policy"));
  if (doc.contains("policies")) {
    const json& list = doc.at("policies");
    if (!list.is_array() || list.empty())
      throw ConfigError("/policies", "expected a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i)
      cfg.policies.push_back(parse_policy(list[i], "/policies/" + std::to_string(i)));
  }
  if (cfg.policies.empty())
    for (PolicyKind k : {PolicyKind::Fifo, PolicyKind::Ms, PolicyKind::Lqf})
      cfg.policies.push_back({k, 1.0, TieRule::MaintainServingClass});

  if (doc.contains("sim")) {
    const json& sim = doc.at("sim");
    if (!sim.is_object()) throw ConfigError("/sim", "expected an object");
    reject_unknown(sim, "/sim", {"horizon", "warmup", "seed", "replications"});
    if (sim.contains("horizon")) cfg.horizon = positive(sim.at("horizon"), "/sim/horizon");
    if (sim.contains("warmup")) cfg.warmup = nonnegative(sim.at("warmup"), "/sim/warmup");
    if (cfg.warmup >= cfg.horizon)
      throw ConfigError("/sim/warmup", "must be below the horizon");
    if (sim.contains("seed")) cfg.seed = sim.at("seed").get<std::uint64_t>();
    if (sim.contains("replications")) {
      cfg.replications = sim.at("replications").get<int>();
      if (cfg.replications < 1) throw ConfigError("/sim/replications", "must be >= 1");
    }
  }

  if (doc.contains("grid")) cfg.grid = parse_grid(doc.at("grid"), "/grid");
  if (doc.contains("rays")) {
    cfg.rays = doc.at("rays").get<int>();
    if (cfg.rays < 2) throw ConfigError("/rays", "must be >= 2");
  }

  if (doc.contains("approach")) {
    const json& ap = doc.at("approach");
    if (!ap.is_object()) throw ConfigError("/approach", "expected an object");
    reject_unknown(ap, "/approach",
                   {"length", "v_max", "accel", "decel", "dt", "safety_gap"});
    if (ap.contains("length")) cfg.approach.length = positive(ap.at("length"), "/approach/length");
    if (ap.contains("v_max")) cfg.approach.v_max = positive(ap.at("v_max"), "/approach/v_max");
    if (ap.contains("accel")) cfg.approach.accel = positive(ap.at("accel"), "/approach/accel");
    if (ap.contains("decel")) {
      cfg.approach.decel = number(ap.at("decel"), "/approach/decel");
      if (!(cfg.approach.decel < 0.0))
        throw ConfigError("/approach/decel", "must be negative");
    }
    if (ap.contains("dt")) cfg.approach.dt = positive(ap.at("dt"), "/approach/dt");
    if (ap.contains("safety_gap"))
      cfg.approach.safety_gap = positive(ap.at("safety_gap"), "/approach/safety_gap");
  }

  if (doc.contains("micro")) {
    const json& micro = doc.at("micro");
    if (!micro.is_object()) throw ConfigError("/micro", "expected an object");
    reject_unknown(micro, "/micro", {"horizon", "record_trajectories"});
    if (micro.contains("horizon"))
      cfg.micro_horizon = positive(micro.at("horizon"), "/micro/horizon");
    if (micro.contains("record_trajectories"))
      cfg.record_trajectories = micro.at("record_trajectories").get<bool>();
  }

  if (doc.contains("drift")) {
    const json& drift = doc.at("drift");
    if (!drift.is_object()) throw ConfigError("/drift", "expected an object");
    reject_unknown(drift, "/drift", {"x", "y", "samples"});
    if (drift.contains("x")) {
      const json& x = drift.at("x");
      if (!x.is_array() || x.size() != 2) throw ConfigError("/drift/x", "expected a 2-vector");
      cfg.drift.x = {nonnegative(x[0], "/drift/x"), nonnegative(x[1], "/drift/x")};
    }
    if (drift.contains("y")) {
      const int y = drift.at("y").get<int>();
      if (y != 1 && y != 2) throw ConfigError("/drift/y", "expected class 1 or 2");
      cfg.drift.y = od_from_index(y - 1);
    }
    if (drift.contains("samples")) {
      cfg.drift.samples = drift.at("samples").get<std::uint64_t>();
      if (cfg.drift.samples == 0) throw ConfigError("/drift/samples", "must be >= 1");
    }
  }

  if (doc.contains("lqf_literal_b22")) cfg.lqf_literal_b22 = doc.at("lqf_literal_b22").get<bool>();

  if (doc.contains("output")) {
    const json& out = doc.at("output");
    if (!out.is_object()) throw ConfigError("/output", "expected an object");
    reject_unknown(out, "/output", {"dir"});
    if (out.contains("dir")) cfg.output_dir = out.at("dir").get<std::string>();
  }

  try {
    cfg.approach.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/approach", e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::vector<std::array<double, 2>> expand_grid(const GridSpec& grid) {
  std::vector<std::array<double, 2>> points;
  points.reserve(static_cast<std::size_t>(grid.l1_count) *
                 static_cast<std::size_t>(grid.l2_count));
  for (int i = 0; i < grid.l1_count; ++i) {
    const double l1 = grid.l1_count == 1
                          ? grid.l1_min
                          : grid.l1_min + (grid.l1_max - grid.l1_min) * i / (grid.l1_count - 1);
    for (int j = 0; j < grid.l2_count; ++j) {
      const double l2 = grid.l2_count == 1
                            ? grid.l2_min
                            : grid.l2_min + (grid.l2_max - grid.l2_min) * j / (grid.l2_count - 1);
      points.push_back({l1, l2});
    }
  }
  return points;
}

}  // namespace intersim::cli
