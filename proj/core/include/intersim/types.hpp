#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace intersim {

// Traffic class (origin-destination pair) of a two-class intersection.
enum class OdClass : int { k1 = 0, k2 = 1 };

constexpr OdClass other(OdClass k) {
  return k == OdClass::k1 ? OdClass::k2 : OdClass::k1;
}

constexpr int idx(OdClass k) { return static_cast<int>(k); }

constexpr OdClass od_from_index(int i) {
  if (i != 0 && i != 1) throw std::invalid_argument("OD class index must be 0 or 1");
  return static_cast<OdClass>(i);
}

// Human-facing label: class 1 / class 2.
constexpr int label(OdClass k) { return idx(k) + 1; }

// Minimal time gap [sec] between consecutive crossings, indexed
// (leader class, follower class). Cross-class entries strictly dominate
// the leader's same-class entry.
class HeadwayMatrix {
 public:
  HeadwayMatrix(double t11, double t12, double t21, double t22)
      : theta_{{{t11, t12}, {t21, t22}}} {
    validate();
  }
  explicit HeadwayMatrix(const std::array<std::array<double, 2>, 2>& t) : theta_(t) {
    validate();
  }

  double operator()(OdClass leader, OdClass follower) const {
    return theta_[idx(leader)][idx(follower)];
  }
  double at(int leader, int follower) const { return theta_[leader][follower]; }

  std::array<double, 2> diagonal() const { return {theta_[0][0], theta_[1][1]}; }

  HeadwayMatrix scaled(double c) const {
    return HeadwayMatrix(theta_[0][0] * c, theta_[0][1] * c, theta_[1][0] * c,
                         theta_[1][1] * c);
  }

 private:
  void validate() const {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        if (!(theta_[i][j] >= 0.0) || !std::isfinite(theta_[i][j]))
          throw std::invalid_argument("headway entries must be finite and nonnegative");
    if (!(theta_[0][1] > theta_[0][0]))
      throw std::invalid_argument("theta[1][2] must exceed theta[1][1] (cross-class dominance)");
    if (!(theta_[1][0] > theta_[1][1]))
      throw std::invalid_argument("theta[2][1] must exceed theta[2][2] (cross-class dominance)");
  }

  std::array<std::array<double, 2>, 2> theta_;
};

// Crossing time distribution: bounded support, exact analytic moments.
class CrossingTimeDist {
 public:
  enum class Family { Deterministic, Uniform, Discrete };

  static CrossingTimeDist deterministic(double r) {
    CrossingTimeDist d;
    d.family_ = Family::Deterministic;
    d.values_ = {r};
    d.probs_ = {1.0};
    d.min_ = d.max_ = r;
    d.mean_ = r;
    d.variance_ = 0.0;
    d.check_support();
    return d;
  }

  static CrossingTimeDist uniform(double a, double b) {
    if (!(a <= b)) throw std::invalid_argument("uniform crossing time requires a <= b");
    CrossingTimeDist d;
    d.family_ = Family::Uniform;
    d.values_ = {a, b};
    d.min_ = a;
    d.max_ = b;
    d.mean_ = 0.5 * (a + b);
    d.variance_ = (b - a) * (b - a) / 12.0;
    d.check_support();
    return d;
  }

  static CrossingTimeDist discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
      throw std::invalid_argument("discrete crossing time needs matching nonempty values/probs");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw std::invalid_argument("discrete probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("discrete probabilities must sum to 1");
    CrossingTimeDist d;
    d.family_ = Family::Discrete;
    d.values_ = std::move(values);
    d.probs_ = std::move(probs);
    d.min_ = d.values_[0];
    d.max_ = d.values_[0];
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < d.values_.size(); ++i) {
      d.min_ = std::min(d.min_, d.values_[i]);
      d.max_ = std::max(d.max_, d.values_[i]);
      m1 += d.probs_[i] * d.values_[i];
      m2 += d.probs_[i] * d.values_[i] * d.values_[i];
    }
    d.mean_ = m1;
    d.variance_ = std::max(0.0, m2 - m1 * m1);
    d.check_support();
    return d;
  }

  // Two-point distribution with the requested mean and variance; handy for
  // experiments that pin (mean, variance) without a named law.
  static CrossingTimeDist two_point(double mean, double variance) {
    if (variance < 0.0) throw std::invalid_argument("variance must be nonnegative");
    if (variance == 0.0) return deterministic(mean);
    double h = std::sqrt(variance);
    return discrete({mean - h, mean + h}, {0.5, 0.5});
  }

  Family family() const { return family_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double min() const { return min_; }
  double max() const { return max_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

  // Maps a uniform(0,1) draw to a crossing time; all randomness stays with
  // the caller's stream.
  double quantile(double u) const {
    switch (family_) {
      case Family::Deterministic:
        return values_[0];
      case Family::Uniform:
        return min_ + u * (max_ - min_);
      case Family::Discrete: {
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
          acc += probs_[i];
          if (u < acc) return values_[i];
        }
        return values_.back();
      }
    }
    return values_[0];
  }

  CrossingTimeDist scaled(double c) const {
    switch (family_) {
      case Family::Deterministic:
        return deterministic(values_[0] * c);
      case Family::Uniform:
        return uniform(min_ * c, max_ * c);
      case Family::Discrete: {
        std::vector<double> v = values_;
        for (double& x : v) x *= c;
        return discrete(std::move(v), probs_);
      }
    }
    return *this;
  }

 private:
  CrossingTimeDist() = default;

  void check_support() const {
    if (!(min_ > 0.0) || !(max_ >= min_) || !std::isfinite(max_))
      throw std::invalid_argument("crossing time support must satisfy 0 < R_min <= R_max < inf");
  }

  Family family_ = Family::Deterministic;
  std::vector<double> values_;
  std::vector<double> probs_;
  double min_ = 0, max_ = 0, mean_ = 0, variance_ = 0;
};

// Arrival rate vector [veh/sec].
class DemandProfile {
 public:
  DemandProfile(double l1, double l2) : lambda_{l1, l2} {
    if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l2))
      throw std::invalid_argument("arrival rates must be finite and nonnegative");
  }

  double operator[](OdClass k) const { return lambda_[idx(k)]; }
  double at(int i) const { return lambda_[i]; }
  double total() const { return lambda_[0] + lambda_[1]; }

  // Distribution of demand; only defined for positive total rate.
  std::array<double, 2> p() const {
    double t = total();
    if (!(t > 0.0)) throw std::domain_error("demand distribution undefined for zero demand");
    return {lambda_[0] / t, lambda_[1] / t};
  }

 private:
  std::array<double, 2> lambda_;
};

// Static description of the intersection: headways, crossing time law, demand.
struct IntersectionSpec {
  HeadwayMatrix theta{0.5, 1.0, 1.0, 0.5};
  CrossingTimeDist crossing_time = CrossingTimeDist::deterministic(0.5);
  DemandProfile demand{0.0, 0.0};
};

enum class PolicyKind { Fifo, Ms, Lqf };

inline std::string to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::Fifo: return "fifo";
    case PolicyKind::Ms: return "ms";
    case PolicyKind::Lqf: return "lqf";
  }
  return "?";
}

enum class TieRule { MaintainServingClass, PreferClass1 };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Fifo;
  double beta = 1.0;                                // LQF comparator weight
  TieRule tie_rule = TieRule::MaintainServingClass; // LQF tie handling
};

}  // namespace intersim
