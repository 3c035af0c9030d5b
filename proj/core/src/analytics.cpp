#include "intersim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace intersim {
namespace analytics {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return a[0] * b[0] + a[1] * b[1];
}
}  // namespace

std::array<double, 2> balancing_terms(const DemandProfile& lambda,
                                      const HeadwayMatrix& theta) {
  const double total = lambda.total();
  if (!(total > 0.0)) return {0.0, 0.0};
  std::array<double, 2> a{};
  for (int y = 0; y < 2; ++y) {
    const int ny = 1 - y;
    a[y] = (lambda.at(0) * (theta.at(y, 0) - theta.at(ny, 0)) +
            lambda.at(1) * (theta.at(y, 1) - theta.at(ny, 1))) /
           (2.0 * total);
  }
  return a;
}

CoefficientMatrices coefficient_matrices(const DemandProfile& lambda,
                                         const HeadwayMatrix& theta, double mean_r,
                                         double max_r, bool literal_b22) {
  CoefficientMatrices m{};
  const auto a = balancing_terms(lambda, theta);
  for (int y = 0; y < 2; ++y) m.a[y] = {a[y], a[y]};

  const double l1 = lambda.at(0);
  const double l2 = lambda.at(1);
  const double cross = theta.at(0, 1) + theta.at(1, 0) + mean_r + max_r;
  m.b[0][0] = cross * l1;
  m.b[0][1] = (theta.at(0, 0) + mean_r) * l1 + (theta.at(1, 0) - theta.at(0, 0)) * l2 - 1.0;
  m.b[1][0] = (theta.at(0, 1) - theta.at(1, 1)) * l1 + (theta.at(1, 1) + mean_r) * l2 - 1.0;
  m.b[1][1] = cross * (literal_b22 ? l1 : l2);
  return m;
}

StabilityResult fifo_predicate(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r) {
  const double total = lambda.total();
  if (!(total > 0.0)) return {true, -1.0};
  double quad = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) quad += lambda.at(i) * theta.at(i, j) * lambda.at(j);
  const double lhs = quad / total + mean_r * total;
  return {lhs < 1.0, lhs - 1.0};
}

StabilityResult ms_predicate(const DemandProfile& lambda, const HeadwayMatrix& theta,
                             double mean_r) {
  const double lhs = (theta.at(0, 0) + mean_r) * lambda.at(0) +
                     (theta.at(1, 1) + mean_r) * lambda.at(1);
  return {lhs < 1.0, lhs - 1.0};
}

LqfStability lqf_predicate(const DemandProfile& lambda, const HeadwayMatrix& theta,
                           double mean_r, double max_r, bool literal_b22) {
  const auto m = coefficient_matrices(lambda, theta, mean_r, max_r, literal_b22);
  const double b11 = m.b[0][0], b12 = m.b[0][1], b21 = m.b[1][0], b22 = m.b[1][1];
  const double det = b11 * b22 - b12 * b21;

  LqfStability out{false, det, std::nullopt};
  if (!(det < 0.0) || !(b12 < 0.0) || !(b21 < 0.0)) return out;
  const double lo = b11 / (-b21);
  const double hi = b22 > 0.0 ? (-b12) / b22 : kInf;
  if (!(lo < hi)) return out;
  out.stable = true;
  out.beta_window = BetaWindow{lo, hi};
  return out;
}

std::optional<double> w0_mg1(const DemandProfile& lambda, const HeadwayMatrix& theta,
                             double mean_r, double var_r) {
  const double total = lambda.total();
  if (!(total > 0.0)) return 0.0;
  const auto p = lambda.p();
  const auto d = theta.diagonal();
  const double e_phi = dot(d, p);
  const double e_phi2 = d[0] * d[0] * p[0] + d[1] * d[1] * p[1];
  const double e_s = e_phi + mean_r;
  const double e_s2 = e_phi2 + 2.0 * e_phi * mean_r + mean_r * mean_r + var_r;
  const double rho = total * e_s;
  if (!(rho < 1.0)) return std::nullopt;
  return total * e_s2 / (2.0 * (1.0 - rho));
}

std::optional<double> w0_display(const DemandProfile& lambda, const HeadwayMatrix& theta,
                                 double mean_r, double var_r) {
  const double total = lambda.total();
  if (!(total > 0.0)) return 0.0;
  const auto p = lambda.p();
  const auto d = theta.diagonal();
  const double head = dot(d, p) + mean_r;
  const double num =
      (d[0] * d[0] + d[0] * mean_r) * p[0] + (d[1] * d[1] + d[1] * mean_r) * p[1] +
      mean_r * mean_r + var_r;
  const double den = 2.0 / total - 2.0 * total * head;
  if (!(den > 0.0)) return std::nullopt;
  return head + num / den;
}

namespace {
// max over rows y of sum_k lambda_k [ (theta_yk + R)(half*(theta_yk + R) + a_y)
//                                     + half * var_r ]
double jump_constant(const DemandProfile& lambda, const HeadwayMatrix& theta, double mean_r,
                     double var_r, bool with_balancing) {
  const auto a = balancing_terms(lambda, theta);
  double best = -kInf;
  for (int y = 0; y < 2; ++y) {
    double row = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double s = theta.at(y, k) + mean_r;
      row += lambda.at(k) * (s * (0.5 * s + (with_balancing ? a[y] : 0.0)) + 0.5 * var_r);
    }
    best = std::max(best, row);
  }
  return best;
}
}  // namespace

DriftCoefficients fifo_drift_coefficients(const DemandProfile& lambda,
                                          const HeadwayMatrix& theta, double mean_r,
                                          double var_r) {
  const auto pred = fifo_predicate(lambda, theta, mean_r);
  return {-pred.margin, jump_constant(lambda, theta, mean_r, var_r, true)};
}

std::optional<double> bound_w1(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r, double var_r) {
  const auto pred = fifo_predicate(lambda, theta, mean_r);
  if (!pred.stable) return std::nullopt;
  if (!(lambda.total() > 0.0)) return 0.0;
  return jump_constant(lambda, theta, mean_r, var_r, true) / (-pred.margin);
}

std::optional<double> bound_w2(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r, double var_r) {
  const auto pred = ms_predicate(lambda, theta, mean_r);
  if (!pred.stable) return std::nullopt;
  const double total = lambda.total();
  if (!(total > 0.0)) return 0.0;
  double best = -kInf;
  for (int y = 0; y < 2; ++y) {
    double row = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double s = theta.at(y, k) + mean_r;
      row += lambda.at(k) * (s * s + var_r);
    }
    best = std::max(best, row);
  }
  const double switch_term =
      lambda.at(0) * lambda.at(1) / total *
      ((theta.at(1, 0) - theta.at(0, 0)) + (theta.at(0, 1) - theta.at(1, 1)));
  return best / (-2.0 * pred.margin) + switch_term;
}

std::optional<double> bound_w3(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r, double var_r, double max_r, double beta,
                               bool literal_b22) {
  const auto pred = lqf_predicate(lambda, theta, mean_r, max_r, literal_b22);
  if (!pred.stable) return std::nullopt;
  if (!(beta > pred.beta_window->lo && beta < pred.beta_window->hi)) return std::nullopt;
  if (!(lambda.total() > 0.0)) return 0.0;
  const auto m = coefficient_matrices(lambda, theta, mean_r, max_r, literal_b22);
  const double b11 = m.b[0][0], b12 = m.b[0][1], b21 = m.b[1][0], b22 = m.b[1][1];
  const double num =
      std::max(b11 * b11 + (b12 + 1.0) * (b12 + 1.0), b22 * b22 + (b21 + 1.0) * (b21 + 1.0)) +
      var_r * lambda.total();
  const double den = -std::max(b11 + beta * b12, b22 + beta * b21);
  if (!(den > 0.0)) return std::nullopt;
  return std::sqrt(0.5 * (1.0 + beta * beta)) * num / den;
}

double scalar_capacity(const std::array<double, 2>& p, PolicyKind policy,
                       const HeadwayMatrix& theta, double mean_r, double max_r,
                       double bisect_tol) {
  if (!(p[0] >= 0.0) || !(p[1] >= 0.0) || std::abs(p[0] + p[1] - 1.0) > 1e-9)
    throw std::invalid_argument("demand distribution p must be nonnegative and sum to 1");
  switch (policy) {
    case PolicyKind::Fifo: {
      double quad = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) quad += p[i] * theta.at(i, j) * p[j];
      return 1.0 / (quad + mean_r);
    }
    case PolicyKind::Ms: {
      const auto d = theta.diagonal();
      return 1.0 / (dot(d, p) + mean_r);
    }
    case PolicyKind::Lqf: {
      auto stable_at = [&](double total) {
        DemandProfile lambda(total * p[0], total * p[1]);
        return lqf_predicate(lambda, theta, mean_r, max_r).stable;
      };
      double lo = 0.0;
      double hi = 1.0;
      while (stable_at(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9) return kInf;
      }
      while (hi - lo > bisect_tol) {
        const double mid = 0.5 * (lo + hi);
        (stable_at(mid) ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  throw std::invalid_argument("unknown policy kind");
}

std::vector<RegionPoint> capacity_region(PolicyKind policy, const HeadwayMatrix& theta,
                                         double mean_r, double max_r, int rays) {
  if (rays < 2) throw std::invalid_argument("capacity_region requires at least 2 rays");
  std::vector<RegionPoint> out;
  out.reserve(static_cast<std::size_t>(rays));
  for (int i = 0; i < rays; ++i) {
    const double p1 = static_cast<double>(i) / (rays - 1);
    const std::array<double, 2> p{p1, 1.0 - p1};
    const double cap = scalar_capacity(p, policy, theta, mean_r, max_r);
    out.push_back({p, cap, {cap * p[0], cap * p[1]}});
  }
  return out;
}

BoundsReport bounds_report(const DemandProfile& lambda, const HeadwayMatrix& theta,
                           double mean_r, double var_r, double max_r, double beta,
                           bool literal_b22) {
  BoundsReport r;
  const auto w0 = w0_mg1(lambda, theta, mean_r, var_r);

  const auto f = fifo_predicate(lambda, theta, mean_r);
  r.fifo.stable = f.stable;
  r.fifo.margin = f.margin;
  r.fifo.w0 = w0;
  r.fifo.w_upper = bound_w1(lambda, theta, mean_r, var_r);

  const auto m = ms_predicate(lambda, theta, mean_r);
  r.ms.stable = m.stable;
  r.ms.margin = m.margin;
  r.ms.w0 = w0;
  r.ms.w_upper = bound_w2(lambda, theta, mean_r, var_r);

  const auto l = lqf_predicate(lambda, theta, mean_r, max_r, literal_b22);
  r.lqf.stable = l.stable;
  r.lqf.margin = l.det;  // sign of det(B) plays the margin role for LQF
  r.lqf.w0 = w0;
  r.lqf.beta_window = l.beta_window;
  r.lqf.w_upper = bound_w3(lambda, theta, mean_r, var_r, max_r, beta, literal_b22);

  r.w0_display = w0_display(lambda, theta, mean_r, var_r);
  return r;
}

TwoOdReduction aggregate_four_od(const std::array<double, 4>& lambda4,
                                 const std::array<std::array<double, 4>, 4>& theta4) {
  for (double l : lambda4)
    if (!(l >= 0.0)) throw std::invalid_argument("four-OD arrival rates must be nonnegative");
  const std::array<std::array<int, 2>, 2> groups{{{0, 1}, {2, 3}}};  // {W, N}

  TwoOdReduction out{};
  out.lambda_bar = {lambda4[0] + lambda4[1], lambda4[2] + lambda4[3]};

  auto weights = [&](int g) {
    const double total = out.lambda_bar[static_cast<std::size_t>(g)];
    std::array<double, 2> w{0.5, 0.5};
    if (total > 0.0)
      w = {lambda4[static_cast<std::size_t>(groups[g][0])] / total,
           lambda4[static_cast<std::size_t>(groups[g][1])] / total};
    return w;
  };

  for (int g1 = 0; g1 < 2; ++g1) {
    const auto w1 = weights(g1);
    for (int g2 = 0; g2 < 2; ++g2) {
      const auto w2 = weights(g2);
      double mix = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          mix += w1[i] * w2[j] *
                 theta4[static_cast<std::size_t>(groups[g1][i])]
                       [static_cast<std::size_t>(groups[g2][j])];
      out.theta_bar[g1][g2] = mix;
    }
  }
  return out;
}

}  // namespace analytics
}  // namespace intersim
