#ifndef NCASP_LIPSCHITZ_HPP
#define NCASP_LIPSCHITZ_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "ncasp/nc_polynomial.hpp"
#include "ncasp/word.hpp"

namespace ncasp {

/// Certified Lipschitz data for a filter's matrix-polynomial response over
/// the product of operator-norm balls of radius `radius`, under the
/// max-over-components tuple norm.
struct LipschitzCertificate {
  enum class Method { analytic, empirical };

  double radius = 0.0;
  double l0_bound = 0.0;
  std::vector<double> l1_bounds;  // per generator
  Method method = Method::analytic;

  double l1_max() const {
    double best = 0.0;
    for (double v : l1_bounds) best = std::max(best, v);
    return best;
  }
};

/// sum_w |h_w| deg(w) B^(deg(w)-1): a Lipschitz constant of x -> p(x) on the
/// radius-B ball (per-word telescoping bound).
double analytic_l0(const NcPolynomial& p, double radius);

/// Per generator i, sum_w |h_w| occ_i(w) B^deg(w): bounds the norm of the
/// map H -> D_{p|x_i}(x){H x_i} on the ball.
std::vector<double> analytic_l1(const NcPolynomial& p, double radius);

/// Sampled lower-bound witness for analytic_l0: max difference quotient over
/// random matrix-tuple pairs with norms <= radius, matrix dimension cycled
/// over {1,2,3,4}. Deterministic given seed.
double empirical_l0(const NcPolynomial& p, double radius, int trials, std::uint64_t seed);

/// Sampled partial Frechet derivative norms, exact word-wise product rule,
/// maximized over random tuples and unit directions. Deterministic given
/// seed.
std::vector<double> empirical_l1(const NcPolynomial& p, double radius, int trials,
                                 std::uint64_t seed);

LipschitzCertificate analytic_certificate(const NcPolynomial& p, double radius);
LipschitzCertificate empirical_certificate(const NcPolynomial& p, double radius, int trials,
                                           std::uint64_t seed);

struct SpectralDecomposition;

/// Empirical estimates restricted to the realized matrix frequencies of a
/// decomposition instead of the whole norm ball: L0 from zero-padded
/// pairwise block differences, L1 from random unit directions at each block
/// tuple. The certificate radius records the largest block-frequency norm.
LipschitzCertificate block_certificate(const NcPolynomial& p, const SpectralDecomposition& d,
                                       int trials, std::uint64_t seed);

/// Trainable integral-Lipschitz penalty: log-sum-exp smoothing (temperature
/// tau) of the per-generator analytic L1 components, with a subgradient in
/// the filter coefficients. `exact_max` carries the unsmoothed maximum.
struct IlPenalty {
  double value = 0.0;
  double exact_max = 0.0;
  std::map<Word, double, GradedLexLess> gradient;
};

IlPenalty il_penalty(const NcPolynomial& p, double radius, double tau = 0.01);

}  // namespace ncasp

#endif  // NCASP_LIPSCHITZ_HPP
