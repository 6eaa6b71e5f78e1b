#ifndef NCASP_SPECTRAL_HPP
#define NCASP_SPECTRAL_HPP

#include <cstdint>
#include <vector>

#include "ncasp/linalg.hpp"
#include "ncasp/nc_polynomial.hpp"
#include "ncasp/shift_set.hpp"

namespace ncasp {

struct BlockRange {
  int offset = 0;
  int size = 0;
};

/// Fourier decomposition of a finite-dimensional signal model: an orthogonal
/// basis U and a partition of [0, n) into blocks such that every shift is
/// block diagonal in that basis. block_shifts[j][i] is the restriction of
/// shift i to block j (the matrix frequency of generator i on that block).
struct SpectralDecomposition {
  Matrix basis;
  std::vector<BlockRange> blocks;
  std::vector<std::vector<Matrix>> block_shifts;
  /// Realized max_i ||U^T S_i U - blockdiag||_F / ||S_i||_F.
  double offblock_residual = 0.0;
};

/// Matrix frequencies of one block: the per-generator restrictions, zero
/// padded to a common size when requested.
struct MatrixFrequency {
  int block_index = 0;
  std::vector<Matrix> lambdas;
};

struct JbdOptions {
  /// Off-block leakage tolerance, relative Frobenius per shift.
  double tol = 1e-8;
  /// Eigenvalues of the random commutant element closer than
  /// group_tol * (lambda_max - lambda_min) fall into one block.
  double group_tol = 1e-6;
  /// Singular values of the commutant constraint system below
  /// nullspace_tol * sigma_max count as null directions.
  double nullspace_tol = 1e-7;
  /// Minimum relative gap between kept and dropped singular values; below
  /// this the rank estimate is unstable and NonConvergence is thrown.
  double gap_tol = 1e-10;
  std::uint64_t seed = 0xA15E;
};

/// Joint block diagonalization of the shift set. Computes the symmetric
/// commutant {M = M^T : M S_i = S_i M and M S_i^T = S_i^T M} by null-space
/// computation, eigendecomposes a random commutant element, and groups
/// eigenvalues into blocks. The result is the finest partition the commutant
/// supports at the given tolerances. Throws NonConvergence if the null-space
/// rank is ambiguous or the off-block residual cannot be met.
SpectralDecomposition joint_block_diagonalize(const ShiftSet& shifts,
                                              const JbdOptions& opts = {});

/// Per-block evaluation of p on the block's matrix frequencies: the matrix
/// polynomial p(Sigma_j^(1), ..., Sigma_j^(m)) for each block j.
std::vector<Matrix> frequency_response(const NcPolynomial& p, const SpectralDecomposition& d);

/// The Lambda_i view of one block, zero padded to max block size on request.
MatrixFrequency matrix_frequencies(const SpectralDecomposition& d, int block,
                                   bool zero_pad = false);

/// x_hat = U^T x split by blocks.
std::vector<Vector> fourier_transform(const Vector& x, const SpectralDecomposition& d);

/// Reassembles x = U x_hat from block components.
Vector inverse_fourier_transform(const std::vector<Vector>& components,
                                 const SpectralDecomposition& d);

}  // namespace ncasp

#endif  // NCASP_SPECTRAL_HPP
