#ifndef NCASP_LINALG_HPP
#define NCASP_LINALG_HPP

#include <Eigen/Dense>
#include <string>

namespace ncasp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SpectralNormOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
  /// Dimension up to which a failed power iteration falls back to a full SVD.
  int svd_fallback_dim = 256;
};

/// Largest singular value. Power iteration on M^T M with a deterministic
/// start vector; falls back to a dense SVD for small matrices when the
/// iteration stalls (close top singular values).
double spectral_norm(const Matrix& m, const SpectralNormOptions& opts = {});

/// Residual of the normality condition ||M M^T - M^T M||_F.
double normality_residual(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-12);

/// CSV matrix format: one row per line, decimal floats (shortest round-trip),
/// comma separated, no header, LF line endings.
void save_matrix_csv(const std::string& path, const Matrix& m);
Matrix load_matrix_csv(const std::string& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
/// Strict double parse; the full token must be consumed.
double parse_double(const std::string& token, bool* ok);

}  // namespace ncasp

#endif  // NCASP_LINALG_HPP
