#include "ncasp/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ncasp/errors.hpp"
#include "ncasp/filter_ops.hpp"
#include "ncasp/rng.hpp"

namespace ncasp {

namespace {

// Symmetric matrices are parametrized by their upper triangle (a <= b),
// via the basis E_ab = e_a e_b^T + e_b e_a^T (a < b) and E_aa = e_a e_a^T.
struct SymBasis {
  explicit SymBasis(int n) : n(n) {
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) pairs.emplace_back(a, b);
    }
  }
  int n;
  std::vector<std::pair<int, int>> pairs;
  int size() const { return static_cast<int>(pairs.size()); }

  Matrix unvec(const Vector& x) const {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < size(); ++k) {
      const auto [a, b] = pairs[static_cast<std::size_t>(k)];
      m(a, b) += x(k);
      if (a != b) m(b, a) += x(k);
    }
    return m;
  }
};

// Commutator constraint block for one matrix C: rows are vec(E_k C - C E_k),
// one column per symmetric basis element.
Matrix constraint_block(const SymBasis& basis, const Matrix& c) {
  const int n = basis.n;
  Matrix block(n * n, basis.size());
  Matrix e = Matrix::Zero(n, n);
  for (int k = 0; k < basis.size(); ++k) {
    const auto [a, b] = basis.pairs[static_cast<std::size_t>(k)];
    e(a, b) = 1.0;
    e(b, a) = 1.0;
    const Matrix comm = e * c - c * e;
    block.col(k) = Eigen::Map<const Vector>(comm.data(), n * n);
    e(a, b) = 0.0;
    e(b, a) = 0.0;
  }
  return block;
}

struct NullSpace {
  std::vector<Vector> basis_vectors;  // ascending exact constraint residual
  double sigma_max = 0.0;
};

// Exact residual ||A v||_2 of one symmetric direction against every
// commutator constraint. Cheap per vector, and free of the Gram-spectrum
// noise floor (~1e-8 * sigma_max), so exact null directions separate
// cleanly from nearly-commuting ones.
double constraint_residual(const ShiftSet& shifts, const SymBasis& basis, const Vector& v) {
  const Matrix m = basis.unvec(v);
  double sq = 0.0;
  for (const Matrix& s : shifts.shifts()) {
    sq += (m * s - s * m).squaredNorm();
    if (!is_symmetric(s, 1e-12)) {
      sq += (m * s.transpose() - s.transpose() * m).squaredNorm();
    }
  }
  return std::sqrt(sq);
}

// Null space of the stacked constraint system. The spectrum comes from the
// Gram matrix G = sum_C A_C^T A_C; candidate null directions are then
// re-scored with exact residuals.
NullSpace commutant_null_space(const ShiftSet& shifts, const SymBasis& basis,
                               const JbdOptions& opts) {
  const int cols = basis.size();
  Matrix gram = Matrix::Zero(cols, cols);
  for (const Matrix& s : shifts.shifts()) {
    const Matrix block = constraint_block(basis, s);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    if (!is_symmetric(s, 1e-12)) {
      const Matrix tblock = constraint_block(basis, s.transpose());
      gram.selfadjointView<Eigen::Lower>().rankUpdate(tblock.transpose());
    }
  }
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NonConvergence("commutant eigendecomposition failed");
  }
  // Ascending eigenvalues; singular values of the constraint system.
  Vector sigma(cols);
  for (int i = 0; i < cols; ++i) sigma(i) = std::sqrt(std::max(eig.eigenvalues()(i), 0.0));
  const double sigma_max = sigma(cols - 1);

  NullSpace out;
  out.sigma_max = sigma_max;
  if (sigma_max == 0.0) {
    // Every symmetric matrix commutes (all shifts are multiples of I).
    for (int i = 0; i < cols; ++i) out.basis_vectors.push_back(eig.eigenvectors().col(i));
    return out;
  }

  const double threshold = opts.nullspace_tol * sigma_max;
  std::vector<std::pair<double, int>> scored;  // (exact residual, column)
  int first_dropped = -1;
  for (int i = 0; i < cols; ++i) {
    if (sigma(i) <= threshold) {
      scored.emplace_back(constraint_residual(shifts, basis, eig.eigenvectors().col(i)), i);
    } else if (first_dropped < 0) {
      first_dropped = i;
    }
  }
  if (scored.empty()) {
    throw NonConvergence("commutant null space is empty (identity direction lost)");
  }
  std::sort(scored.begin(), scored.end());

  if (first_dropped >= 0) {
    const double gap = sigma(first_dropped) - scored.back().first;
    if (gap / sigma_max < opts.gap_tol) {
      throw NonConvergence("null-space rank estimation unstable: relative singular-value gap " +
                           format_double(gap / sigma_max) + " below " +
                           format_double(opts.gap_tol));
    }
  }
  for (const auto& [residual, col] : scored) {
    out.basis_vectors.push_back(eig.eigenvectors().col(col));
  }
  return out;
}

struct Grouping {
  std::vector<BlockRange> blocks;  // contiguous in eigenvalue order
};

Grouping group_eigenvalues(const Vector& lambda, double group_tol) {
  const int n = static_cast<int>(lambda.size());
  Grouping g;
  const double spread = lambda(n - 1) - lambda(0);
  const double degenerate = 1e-12 * std::max({std::abs(lambda(0)), std::abs(lambda(n - 1)), 1.0});
  if (spread <= degenerate) {
    g.blocks.push_back({0, n});
    return g;
  }
  int start = 0;
  for (int i = 1; i < n; ++i) {
    if (lambda(i) - lambda(i - 1) > group_tol * spread) {
      g.blocks.push_back({start, i - start});
      start = i;
    }
  }
  g.blocks.push_back({start, n - start});
  return g;
}

double offblock_residual_of(const ShiftSet& shifts, const Matrix& u,
                            const std::vector<BlockRange>& blocks) {
  double worst = 0.0;
  for (const Matrix& s : shifts.shifts()) {
    const Matrix t = u.transpose() * s * u;
    Matrix leak = t;
    for (const BlockRange& b : blocks) {
      leak.block(b.offset, b.offset, b.size, b.size).setZero();
    }
    const double denom = std::max(s.norm(), 1e-300);
    worst = std::max(worst, leak.norm() / denom);
  }
  return worst;
}

}  // namespace

SpectralDecomposition joint_block_diagonalize(const ShiftSet& shifts, const JbdOptions& opts) {
  const int n = shifts.dim();
  const SymBasis basis(n);
  const NullSpace null_space = commutant_null_space(shifts, basis, opts);

  // A generic element of the commutant has eigenspaces invariant under every
  // shift. Nearly-commuting directions sneak into the candidate set when the
  // true spectrum dips below the rank threshold, and their eigenspaces leak;
  // the outer loop drops the weakest candidates (largest exact residual)
  // until the off-block invariant holds. Exact commutants are unaffected:
  // their directions sort first. The fully reduced case k = 1 is essentially
  // the identity direction, which yields the trivial single-block answer.
  std::string last_failure;
  int total_attempts = 0;
  for (std::size_t k = null_space.basis_vectors.size(); k >= 1; --k) {
    for (int attempt = 0; attempt < 2; ++attempt, ++total_attempts) {
      Rng rng(Rng::mix(opts.seed, Rng::mix(k, static_cast<std::uint64_t>(attempt))));
      Vector wvec = Vector::Zero(basis.size());
      for (std::size_t i = 0; i < k; ++i) {
        wvec += rng.gaussian() * null_space.basis_vectors[i];
      }
      Matrix w = basis.unvec(wvec);
      w = 0.5 * (w + w.transpose());

      Eigen::SelfAdjointEigenSolver<Matrix> eig(w);
      if (eig.info() != Eigen::Success) {
        last_failure = "eigendecomposition of the commutant element failed";
        continue;
      }
      const Grouping grouping = group_eigenvalues(eig.eigenvalues(), opts.group_tol);

      // Sort blocks by size (largest first), ties by position in the
      // eigenvalue ordering, and permute the basis columns to match.
      std::vector<int> order(grouping.blocks.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const BlockRange& ba = grouping.blocks[static_cast<std::size_t>(a)];
        const BlockRange& bb = grouping.blocks[static_cast<std::size_t>(b)];
        if (ba.size != bb.size) return ba.size > bb.size;
        return ba.offset < bb.offset;
      });

      Matrix u(n, n);
      std::vector<BlockRange> blocks;
      int offset = 0;
      for (int idx : order) {
        const BlockRange& b = grouping.blocks[static_cast<std::size_t>(idx)];
        u.middleCols(offset, b.size) = eig.eigenvectors().middleCols(b.offset, b.size);
        blocks.push_back({offset, b.size});
        offset += b.size;
      }

      const double residual = offblock_residual_of(shifts, u, blocks);
      if (residual > opts.tol) {
        last_failure = "off-block residual " + format_double(residual) +
                       " exceeds tolerance " + format_double(opts.tol);
        continue;
      }

      SpectralDecomposition out;
      out.basis = std::move(u);
      out.blocks = std::move(blocks);
      out.offblock_residual = residual;
      out.block_shifts.resize(out.blocks.size());
      for (std::size_t j = 0; j < out.blocks.size(); ++j) {
        const BlockRange& b = out.blocks[j];
        const Matrix uj = out.basis.middleCols(b.offset, b.size);
        for (const Matrix& s : shifts.shifts()) {
          out.block_shifts[j].push_back(uj.transpose() * s * uj);
        }
      }
      return out;
    }
  }
  throw NonConvergence("joint block diagonalization failed after " +
                       std::to_string(total_attempts) + " attempts: " + last_failure);
}

std::vector<Matrix> frequency_response(const NcPolynomial& p, const SpectralDecomposition& d) {
  if (!d.block_shifts.empty() &&
      p.num_generators() != d.block_shifts.front().size()) {
    throw std::invalid_argument("filter generator count does not match decomposition");
  }
  std::vector<Matrix> out;
  out.reserve(d.blocks.size());
  for (std::size_t j = 0; j < d.blocks.size(); ++j) {
    const int pj = d.blocks[j].size;
    ShiftSet block_set(pj, d.block_shifts[j]);
    out.push_back(instantiate(p, block_set).matrix);
  }
  return out;
}

MatrixFrequency matrix_frequencies(const SpectralDecomposition& d, int block, bool zero_pad) {
  const auto& lambdas = d.block_shifts.at(static_cast<std::size_t>(block));
  MatrixFrequency out;
  out.block_index = block;
  if (!zero_pad) {
    out.lambdas = lambdas;
    return out;
  }
  int dmax = 0;
  for (const BlockRange& b : d.blocks) dmax = std::max(dmax, b.size);
  for (const Matrix& l : lambdas) {
    Matrix padded = Matrix::Zero(dmax, dmax);
    padded.topLeftCorner(l.rows(), l.cols()) = l;
    out.lambdas.push_back(std::move(padded));
  }
  return out;
}

std::vector<Vector> fourier_transform(const Vector& x, const SpectralDecomposition& d) {
  if (x.size() != d.basis.rows()) {
    throw std::invalid_argument("signal length does not match decomposition dimension");
  }
  const Vector xhat = d.basis.transpose() * x;
  std::vector<Vector> out;
  out.reserve(d.blocks.size());
  for (const BlockRange& b : d.blocks) out.push_back(xhat.segment(b.offset, b.size));
  return out;
}

Vector inverse_fourier_transform(const std::vector<Vector>& components,
                                 const SpectralDecomposition& d) {
  if (components.size() != d.blocks.size()) {
    throw std::invalid_argument("component count does not match block count");
  }
  Vector xhat(d.basis.rows());
  for (std::size_t j = 0; j < d.blocks.size(); ++j) {
    const BlockRange& b = d.blocks[j];
    if (components[j].size() != b.size) {
      throw std::invalid_argument("component " + std::to_string(j) + " has wrong length");
    }
    xhat.segment(b.offset, b.size) = components[j];
  }
  return d.basis * xhat;
}

}  // namespace ncasp
