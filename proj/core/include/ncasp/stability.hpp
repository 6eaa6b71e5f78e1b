#ifndef NCASP_STABILITY_HPP
#define NCASP_STABILITY_HPP

#include <vector>

#include "ncasp/algnn.hpp"
#include "ncasp/linalg.hpp"
#include "ncasp/nc_polynomial.hpp"
#include "ncasp/perturbation.hpp"
#include "ncasp/shift_set.hpp"

namespace ncasp {

enum class StabilityVerdict { bounded, violated, inconclusive };

std::string to_string(StabilityVerdict v);

struct StabilityConstants {
  int m = 0;
  double delta = 0.0;
  double l0 = 0.0;
  double l1 = 0.0;
  double sup_t = 0.0;   // at unit perturbation scale
  double sup_dt = 0.0;  // at unit perturbation scale
};

struct StabilityProbe {
  double epsilon = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // max(0, lhs - rhs)
};

struct StabilityReport {
  double lhs = 0.0;              // observed deviation at the largest probe
  double rhs_first_order = 0.0;  // first-order bound at the largest probe
  double quadratic_slack = 0.0;  // fitted c2 of the second-order term
  StabilityConstants constants;
  std::vector<StabilityProbe> probes;
  StabilityVerdict verdict = StabilityVerdict::inconclusive;
  double rhs_slope = 0.0;   // rhs(eps)/eps, constant across the sweep
  double max_ratio = 0.0;   // max over probes of lhs/rhs (non-vacuity witness)
};

struct VerifyOptions {
  /// The fitted quadratic constant may not exceed c2_cap_factor * rhs slope.
  double c2_cap_factor = 1e3;
  /// Slack on the small-epsilon slope test lhs/eps <= rhs_slope * (1 + slope_slack).
  double slope_slack = 1e-6;
};

/// ||p(S)x - p(S~)x||_2.
double filter_deviation(const NcPolynomial& p, const ShiftSet& shifts,
                        const ShiftSet& perturbed, const Vector& x);

/// First-order bound of the filter stability inequality with constants
/// C0 = m delta L0 and C1 = m delta L1 from the analytic certificates at
/// radius B: (C0 sup||T(S_i)|| + C1 sup||D_T(S_i)||) ||x||. Throws when B is
/// smaller than the realized shift norms (certificate would not cover the
/// perturbed shifts).
double filter_stability_bound(const NcPolynomial& p, const ShiftSet& shifts,
                      const PerturbationModel& perturbation, double x_norm, double radius);

/// Epsilon-sweep verification of the filter bound: scales the perturbation
/// template by each epsilon, compares the observed deviation against the
/// first-order bound, fits the quadratic slack on the residuals, and runs
/// the small-epsilon slope test.
StabilityReport verify_filter_stability(const NcPolynomial& p, const ShiftSet& shifts,
                                        const PerturbationModel& perturbation, const Vector& x,
                                        const std::vector<double>& epsilons, double radius,
                                        const VerifyOptions& opts = {});

/// Layer bound: C_l delta ||x|| m (L0 sup||T(S)|| + L1 sup||D_T(S)||), with
/// the layer's aggregated analytic certificates at its certificate radius.
double layer_deviation_bound(const Layer& layer, const PerturbationModel& perturbation,
                             double x_norm);

/// Network bound: sum_l Delta_l (prod_{r=l..L} C_r)(prod_{r=l+1..L} B_r)
/// (prod_{r=1..l-1} C_r B_r) ||x||, Delta_l = delta m (L0 sup||T|| +
/// L1 sup||D_T||) per layer.
double network_deviation_bound(const AlgNN& net,
                               const std::vector<PerturbationModel>& perturbations,
                               double x_norm);

/// Epsilon-sweep verification for the whole network; lhs is the norm of the
/// difference of network outputs under original and perturbed shifts.
StabilityReport verify_network_stability(const AlgNN& net,
                                         const std::vector<PerturbationModel>& perturbations,
                                         const std::vector<Vector>& features,
                                         const std::vector<double>& epsilons,
                                         const VerifyOptions& opts = {});

/// Right singular vector of rho(p) - rho~(p): the input that realizes the
/// operator-level deviation (adversarial probe signal).
Vector adversarial_signal(const NcPolynomial& p, const ShiftSet& shifts,
                          const ShiftSet& perturbed);

}  // namespace ncasp

#endif  // NCASP_STABILITY_HPP
