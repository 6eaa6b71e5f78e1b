#include "ncasp/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ncasp/rng.hpp"

namespace ncasp {

namespace {

void check_square_pair(const PerturbationModel& p) {
  if (p.t0.rows() != p.t0.cols() || p.t1.rows() != p.t1.cols() ||
      p.t0.rows() != p.t1.rows()) {
    throw std::invalid_argument("perturbation matrices must be square with equal dimension");
  }
  if (!(p.delta > 0.0)) throw std::invalid_argument("delta must be positive");
}

Matrix random_symmetric(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = rng.gaussian();
  }
  return 0.5 * (g + g.transpose());
}

// Zeroes smallest-magnitude eigenvalues until the Frobenius/spectral ratio
// falls below the cap. Spectral norm is untouched (the top eigenvalue is
// zeroed last, and the loop stops at ratio 1).
Matrix threshold_to_delta_cap(const Matrix& sym, double delta_cap) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector lambda = eig.eigenvalues();
  const int n = static_cast<int>(lambda.size());

  std::vector<int> by_magnitude(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) by_magnitude[static_cast<std::size_t>(i)] = i;
  std::sort(by_magnitude.begin(), by_magnitude.end(),
            [&](int a, int b) { return std::abs(lambda(a)) < std::abs(lambda(b)); });

  const double spectral = std::abs(lambda(by_magnitude.back()));
  if (spectral == 0.0) return Matrix::Zero(n, n);

  double frob2 = lambda.squaredNorm();
  std::size_t next = 0;
  while (std::sqrt(frob2) > delta_cap * spectral && next + 1 < by_magnitude.size()) {
    const int idx = by_magnitude[next++];
    frob2 -= lambda(idx) * lambda(idx);
    lambda(idx) = 0.0;
  }
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::vector<std::string> validate(const PerturbationModel& p) {
  check_square_pair(p);
  std::vector<std::string> warnings;
  const char* names[2] = {"T0", "T1"};
  const Matrix* mats[2] = {&p.t0, &p.t1};
  for (int i = 0; i < 2; ++i) {
    const Matrix& t = *mats[i];
    const double spec = spectral_norm(t);
    const double frob = t.norm();
    if (spec >= 1.0) {
      throw std::invalid_argument(std::string(names[i]) + " spectral norm " +
                                  format_double(spec) + " is not < 1");
    }
    if (frob > p.delta * spec + 1e-12 * std::max(frob, 1.0)) {
      throw std::invalid_argument(std::string(names[i]) + " violates ||T||_F <= delta ||T||_2 (" +
                                  format_double(frob) + " > " + format_double(p.delta * spec) +
                                  ")");
    }
    if (normality_residual(t) > 1e-10 * std::max(frob * frob, 1e-300)) {
      throw std::invalid_argument(std::string(names[i]) + " is not normal within tolerance");
    }
    if (spec > 0.1) {
      warnings.push_back(std::string(names[i]) + " spectral norm " + format_double(spec) +
                         " above 0.1; the small-perturbation regime is strained");
    }
  }
  return warnings;
}

ShiftSet perturb_shifts(const ShiftSet& shifts, const PerturbationModel& p) {
  check_square_pair(p);
  if (p.t0.rows() != shifts.dim()) {
    throw std::invalid_argument("perturbation dimension " + std::to_string(p.t0.rows()) +
                                " does not match shift dimension " +
                                std::to_string(shifts.dim()));
  }
  std::vector<Matrix> out;
  out.reserve(shifts.num_generators());
  for (const Matrix& s : shifts.shifts()) out.push_back(s + p.t0 + p.t1 * s);
  return ShiftSet(shifts.dim(), std::move(out));
}

PerturbationNorms perturbation_norms(const ShiftSet& shifts, const PerturbationModel& p) {
  check_square_pair(p);
  if (p.t0.rows() != shifts.dim()) {
    throw std::invalid_argument("perturbation dimension does not match shift dimension");
  }
  PerturbationNorms out;
  for (const Matrix& s : shifts.shifts()) {
    out.sup_t = std::max(out.sup_t, spectral_norm(p.t0 + p.t1 * s));
  }
  out.sup_dt = spectral_norm(p.t1);
  return out;
}

PerturbationKind perturbation_kind_from_string(const std::string& s) {
  if (s == "absolute") return PerturbationKind::absolute;
  if (s == "relative") return PerturbationKind::relative;
  if (s == "mixed") return PerturbationKind::mixed;
  throw std::invalid_argument("unknown perturbation kind '" + s +
                              "' (expected absolute|relative|mixed)");
}

std::string to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::absolute:
      return "absolute";
    case PerturbationKind::relative:
      return "relative";
    case PerturbationKind::mixed:
      return "mixed";
  }
  return "?";
}

PerturbationModel sample_perturbation(int dim, PerturbationKind kind, double magnitude,
                                      double delta_cap, std::uint64_t seed) {
  if (!(magnitude > 0.0) || magnitude > 0.5) {
    throw std::invalid_argument("perturbation magnitude must be in (0, 0.5]");
  }
  if (delta_cap < 1.0) {
    throw std::invalid_argument("delta_cap < 1 is infeasible (||T||_F >= ||T||_2 always)");
  }
  if (dim < 1) throw std::invalid_argument("perturbation dimension must be positive");
  Rng rng(seed);
  PerturbationModel p;
  p.t0 = Matrix::Zero(dim, dim);
  p.t1 = Matrix::Zero(dim, dim);

  const bool want_t0 = kind != PerturbationKind::relative;
  const bool want_t1 = kind != PerturbationKind::absolute;
  double delta = 1.0;
  for (int which = 0; which < 2; ++which) {
    const bool want = which == 0 ? want_t0 : want_t1;
    if (!want) continue;
    Matrix t = threshold_to_delta_cap(random_symmetric(dim, rng), delta_cap);
    double spec = spectral_norm(t);
    while (spec == 0.0) {
      // A zero draw has probability zero but would break the rescale.
      t = threshold_to_delta_cap(random_symmetric(dim, rng), delta_cap);
      spec = spectral_norm(t);
    }
    t *= magnitude / spec;
    delta = std::max(delta, t.norm() / magnitude);
    if (which == 0) {
      p.t0 = std::move(t);
    } else {
      p.t1 = std::move(t);
    }
  }
  p.delta = delta;
  validate(p);
  return p;
}

}  // namespace ncasp
