#include "ncasp/linalg.hpp"

#include <Eigen/SVD>
#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "ncasp/errors.hpp"
#include "ncasp/rng.hpp"

namespace ncasp {

double spectral_norm(const Matrix& m, const SpectralNormOptions& opts) {
  if (m.size() == 0) return 0.0;
  const double frob = m.norm();
  if (frob == 0.0) return 0.0;

  // Power iteration on M^T M, deterministic Gaussian start.
  Rng rng(0x5EC7A11ULL);
  Vector v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.gaussian();
  v.normalize();

  double sigma2 = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vector w = m.transpose() * (m * v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - sigma2) <= opts.tol * std::max(next, 1e-300)) {
      return std::sqrt(next);
    }
    sigma2 = next;
  }

  if (m.rows() <= opts.svd_fallback_dim && m.cols() <= opts.svd_fallback_dim) {
    return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
  }
  return std::sqrt(sigma2);
}

double normality_residual(const Matrix& m) {
  return (m * m.transpose() - m.transpose() * m).norm();
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= tol * std::max(1.0, m.norm());
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, bool* ok) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  *ok = res.ec == std::errc() && res.ptr == end && begin != end;
  return value;
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write matrix file: " + path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string tok = line.substr(start, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - start);
      bool ok = false;
      const double v = parse_double(tok, &ok);
      if (!ok) {
        throw IoError(path + ":" + std::to_string(line_no) + ": malformed CSV field '" + tok +
                      "'");
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                    std::to_string(row.size()) + " fields, expected " +
                    std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty matrix file");

  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

}  // namespace ncasp
