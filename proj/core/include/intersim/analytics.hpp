#pragma once

#include <array>
#include <optional>
#include <vector>

#include "intersim/types.hpp"

namespace intersim {
namespace analytics {

// First-order balancing coefficients A and the LQF matrix B. A's rows are
// constant (a_y repeated along row y). By class-exchange symmetry the b22
// entry carries lambda2; set `literal_b22` to evaluate the asymmetric
// variant with lambda1 in both diagonal entries for comparison.
struct CoefficientMatrices {
  std::array<std::array<double, 2>, 2> a;
  std::array<std::array<double, 2>, 2> b;
};

std::array<double, 2> balancing_terms(const DemandProfile& lambda, const HeadwayMatrix& theta);

CoefficientMatrices coefficient_matrices(const DemandProfile& lambda,
                                         const HeadwayMatrix& theta, double mean_r,
                                         double max_r, bool literal_b22 = false);

struct StabilityResult {
  bool stable;
  double margin;  // LHS of the stability inequality minus 1
};

// FIFO is stabilizing iff (lambda^T/||lambda|| Theta + R_bar J) lambda < 1.
StabilityResult fifo_predicate(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r);

// MS is stabilizing iff diag(Theta + R_bar J) lambda < 1.
StabilityResult ms_predicate(const DemandProfile& lambda, const HeadwayMatrix& theta,
                             double mean_r);

struct BetaWindow {
  double lo;
  double hi;  // +inf when unbounded above
};

struct LqfStability {
  bool stable;          // det(B) < 0 with a nonempty beta window
  double det;
  std::optional<BetaWindow> beta_window;
};

// LQF sufficient condition: det(B) < 0 and a nonempty window of admissible
// beta values.
LqfStability lqf_predicate(const DemandProfile& lambda, const HeadwayMatrix& theta,
                           double mean_r, double max_r, bool literal_b22 = false);

// Workload lower bound from the M/G/1 construction (service = same-class
// headway mixture plus crossing time), evaluated with the Pollaczek-Khinchin
// formula. Defined iff the construction's utilization is below one, which
// coincides with the MS stability predicate.
std::optional<double> w0_mg1(const DemandProfile& lambda, const HeadwayMatrix& theta,
                             double mean_r, double var_r);

// The W0 closed-form display as published (kept verbatim for report output
// and spot checks). Note this display is not a usable lower bound: it can
// exceed the policy upper bounds; w0_mg1 is the bound the sandwich uses.
std::optional<double> w0_display(const DemandProfile& lambda, const HeadwayMatrix& theta,
                                 double mean_r, double var_r);

// Policy-specific delay upper bounds; defined only when the corresponding
// stability predicate holds (and, for W3, when beta lies in the window).
std::optional<double> bound_w1(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r, double var_r);
std::optional<double> bound_w2(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r, double var_r);
std::optional<double> bound_w3(const DemandProfile& lambda, const HeadwayMatrix& theta,
                               double mean_r, double var_r, double max_r, double beta,
                               bool literal_b22 = false);

// Drift coefficients for the FIFO quadratic function: the closed-form drift
// satisfies AV <= -c1 ||x|| + d1. d1 is the arrival-jump constant (the W1
// numerator); c1 > 0 iff the FIFO predicate holds.
struct DriftCoefficients {
  double c1;
  double d1;
};
DriftCoefficients fifo_drift_coefficients(const DemandProfile& lambda,
                                          const HeadwayMatrix& theta, double mean_r,
                                          double var_r);

// Maximal total demand along the fixed demand-distribution ray p.
double scalar_capacity(const std::array<double, 2>& p, PolicyKind policy,
                       const HeadwayMatrix& theta, double mean_r, double max_r,
                       double bisect_tol = 1e-9);

struct RegionPoint {
  std::array<double, 2> p;
  double lambda_bar;            // scalar capacity along the ray
  std::array<double, 2> lambda; // lambda_bar * p
};

// Capacity-region boundary as a fan of rays p1 = i/(rays-1).
std::vector<RegionPoint> capacity_region(PolicyKind policy, const HeadwayMatrix& theta,
                                         double mean_r, double max_r, int rays);

// Per-policy stability-and-bounds report for a demand point.
struct PolicyReport {
  bool stable = false;
  double margin = 0.0;
  std::optional<double> w0;       // M/G/1 lower bound (common to all policies)
  std::optional<double> w_upper;  // policy-specific upper bound
  std::optional<BetaWindow> beta_window;  // LQF only
};

struct BoundsReport {
  PolicyReport fifo;
  PolicyReport ms;
  PolicyReport lqf;
  std::optional<double> w0_display;
};

BoundsReport bounds_report(const DemandProfile& lambda, const HeadwayMatrix& theta,
                           double mean_r, double var_r, double max_r, double beta,
                           bool literal_b22 = false);

// Four ODs with turning, classes ordered {WE, WS, NS, NE}: reduction to an
// equivalent two-class system. Mixture weights for an origin with zero total
// demand fall back to the unweighted average.
struct TwoOdReduction {
  std::array<double, 2> lambda_bar;             // (West, North)
  std::array<std::array<double, 2>, 2> theta_bar;
};

TwoOdReduction aggregate_four_od(const std::array<double, 4>& lambda4,
                                 const std::array<std::array<double, 4>, 4>& theta4);

}  // namespace analytics
}  // namespace intersim
