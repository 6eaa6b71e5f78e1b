#ifndef NCASP_FILTER_OPS_HPP
#define NCASP_FILTER_OPS_HPP

#include <map>
#include <optional>
#include <vector>

#include "ncasp/linalg.hpp"
#include "ncasp/nc_polynomial.hpp"
#include "ncasp/shift_set.hpp"
#include "ncasp/word.hpp"

namespace ncasp {

/// Default cap on the dimension of materialized filter operators.
inline constexpr int kDefaultDenseCap = 4096;

/// A materialized filter rho(p) together with the polynomial that produced
/// it. The matrix equals the word expansion sum_w h_w S_{w1}...S_{wk}
/// (empty word -> identity); see recompute_error for the check.
struct FilterOperator {
  Matrix matrix;
  NcPolynomial source;
};

/// Memoization table of word prefix products P_w = S_{w1}...S_{wk}, shared
/// across the terms of a filter (and across filters in a bank).
class WordMatrixCache {
 public:
  explicit WordMatrixCache(const ShiftSet& shifts);
  const Matrix& product(const Word& w);

 private:
  const ShiftSet& shifts_;
  std::map<Word, Matrix, GradedLexLess> cache_;
};

/// Memoization table of word actions on a fixed signal: vec(w) = S_w x,
/// evaluated right-to-left so shared suffixes are applied once.
class WordVectorCache {
 public:
  WordVectorCache(const ShiftSet& shifts, Vector x);
  const Vector& action(const Word& w);

 private:
  const ShiftSet& shifts_;
  std::map<Word, Vector, GradedLexLess> cache_;
};

/// rho(p) = sum_w h_w S_{w1}...S_{wk}. Throws std::invalid_argument on
/// generator-count mismatch or when the dimension exceeds dense_cap.
FilterOperator instantiate(const NcPolynomial& p, const ShiftSet& shifts,
                           int dense_cap = kDefaultDenseCap);

/// y = F x.
Vector apply(const FilterOperator& f, const Vector& x);

/// rho(p) x without materializing rho(p); matches apply(instantiate(p,S),x)
/// within 1e-10 relative error.
Vector apply_streaming(const NcPolynomial& p, const ShiftSet& shifts, const Vector& x);

/// rho(p)^T y, evaluated word-wise on transposed shifts. Used by reverse-mode
/// gradients.
Vector apply_streaming_adjoint(const NcPolynomial& p, const ShiftSet& shifts, const Vector& y);

/// Frobenius distance between f.matrix and a fresh word expansion over
/// `shifts`, relative to the matrix norm. The construction invariant keeps
/// this below 1e-12.
double recompute_error(const FilterOperator& f, const ShiftSet& shifts);

struct OperatorNormBound {
  /// sum_w |h_w| prod_j ||S_{wj}||_2, an upper bound on ||rho(p)||_2.
  double bound = 0.0;
  /// Spectral norm of the materialized operator, present when dim <= dense cap.
  std::optional<double> exact;
};

OperatorNormBound operator_norm_bound(const NcPolynomial& p, const ShiftSet& shifts,
                                      int dense_cap = 1024);

}  // namespace ncasp

#endif  // NCASP_FILTER_OPS_HPP
