#ifndef NCASP_PERTURBATION_HPP
#define NCASP_PERTURBATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ncasp/linalg.hpp"
#include "ncasp/shift_set.hpp"

namespace ncasp {

/// Affine perturbation of shift operators: S -> S + T0 + T1 S, with T0, T1
/// normal and delta bounding the Frobenius/spectral ratio of each.
struct PerturbationModel {
  Matrix t0;
  Matrix t1;
  double delta = 1.0;

  /// Same template with both matrices scaled; delta is scale invariant.
  PerturbationModel scaled(double factor) const { return {factor * t0, factor * t1, delta}; }

  bool is_zero() const { return t0.norm() == 0.0 && t1.norm() == 0.0; }
};

/// Hard invariant check (throws std::invalid_argument): spectral norms < 1,
/// ||T_i||_F <= delta ||T_i||_2, normality. Returns soft warnings (norms
/// above 0.1, where the small-perturbation reading gets strained).
std::vector<std::string> validate(const PerturbationModel& p);

/// S~_i = S_i + T0 + T1 S_i.
ShiftSet perturb_shifts(const ShiftSet& shifts, const PerturbationModel& p);

struct PerturbationNorms {
  /// max_i ||T0 + T1 S_i||_2.
  double sup_t = 0.0;
  /// ||T1||_2: the Frechet derivative of S -> T0 + T1 S is H -> T1 H.
  double sup_dt = 0.0;
};

PerturbationNorms perturbation_norms(const ShiftSet& shifts, const PerturbationModel& p);

enum class PerturbationKind { absolute, relative, mixed };

PerturbationKind perturbation_kind_from_string(const std::string& s);
std::string to_string(PerturbationKind k);

/// Draws a random symmetric perturbation pair with spectral norm `magnitude`
/// (the unused matrix zeroed for absolute/relative kinds), then hard-
/// thresholds the smallest eigenvalues until ||T||_F <= delta_cap ||T||_2.
/// The returned delta is the realized Frobenius/spectral ratio.
/// Deterministic given seed.
PerturbationModel sample_perturbation(int dim, PerturbationKind kind, double magnitude,
                                      double delta_cap, std::uint64_t seed);

}  // namespace ncasp

#endif  // NCASP_PERTURBATION_HPP
