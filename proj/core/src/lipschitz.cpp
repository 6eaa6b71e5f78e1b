#include "ncasp/lipschitz.hpp"

#include <cmath>
#include <stdexcept>

#include "ncasp/filter_ops.hpp"
#include "ncasp/rng.hpp"
#include "ncasp/shift_set.hpp"
#include "ncasp/spectral.hpp"

namespace ncasp {

namespace {

void check_radius(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("certificate radius must be positive");
}

// Random matrix with a prescribed spectral norm.
Matrix random_matrix_with_norm(int dim, double norm, Rng& rng) {
  Matrix g(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) g(r, c) = rng.gaussian();
  }
  const double s = spectral_norm(g);
  if (s == 0.0) return Matrix::Zero(dim, dim);
  return g * (norm / s);
}

std::vector<Matrix> random_tuple(std::uint32_t m, int dim, double radius, Rng& rng) {
  std::vector<Matrix> tuple;
  tuple.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    tuple.push_back(random_matrix_with_norm(dim, radius * rng.uniform(), rng));
  }
  return tuple;
}

Matrix evaluate(const NcPolynomial& p, const std::vector<Matrix>& tuple, int dim) {
  ShiftSet s(dim, tuple);
  return instantiate(p, s).matrix;
}

// Product of tuple matrices over letters [begin, end) of w; identity when
// the range is empty.
Matrix range_product(const Word& w, std::size_t begin, std::size_t end,
                     const std::vector<Matrix>& tuple, int dim) {
  Matrix acc = Matrix::Identity(dim, dim);
  for (std::size_t j = begin; j < end; ++j) acc = acc * tuple[w[j]];
  return acc;
}

}  // namespace

double analytic_l0(const NcPolynomial& p, double radius) {
  check_radius(radius);
  double total = 0.0;
  for (const auto& [w, c] : p.terms()) {
    const auto deg = static_cast<double>(w.size());
    if (w.empty()) continue;
    total += std::abs(c) * deg * std::pow(radius, deg - 1.0);
  }
  return total;
}

std::vector<double> analytic_l1(const NcPolynomial& p, double radius) {
  check_radius(radius);
  std::vector<double> out(p.num_generators(), 0.0);
  for (const auto& [w, c] : p.terms()) {
    const double weight = std::abs(c) * std::pow(radius, static_cast<double>(w.size()));
    for (std::uint32_t i = 0; i < p.num_generators(); ++i) {
      const int occ = count_occurrences(w, i);
      if (occ > 0) out[i] += weight * occ;
    }
  }
  return out;
}

double empirical_l0(const NcPolynomial& p, double radius, int trials, std::uint64_t seed) {
  check_radius(radius);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const std::uint32_t m = p.num_generators();
  const Rng base(seed);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = base.derive(static_cast<std::uint64_t>(t));
    const int dim = 1 + t % 4;
    const std::vector<Matrix> x = random_tuple(m, dim, radius, rng);
    const std::vector<Matrix> y = random_tuple(m, dim, radius, rng);
    double denom = 0.0;
    for (std::uint32_t i = 0; i < m; ++i) denom = std::max(denom, spectral_norm(x[i] - y[i]));
    if (denom < 1e-12) continue;
    const double num = spectral_norm(evaluate(p, x, dim) - evaluate(p, y, dim));
    best = std::max(best, num / denom);
  }
  return best;
}

std::vector<double> empirical_l1(const NcPolynomial& p, double radius, int trials,
                                 std::uint64_t seed) {
  check_radius(radius);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const std::uint32_t m = p.num_generators();
  const Rng base(seed);
  std::vector<double> best(m, 0.0);
  for (int t = 0; t < trials; ++t) {
    Rng rng = base.derive(static_cast<std::uint64_t>(t));
    const int dim = 1 + t % 4;
    const std::vector<Matrix> x = random_tuple(m, dim, radius, rng);
    const Matrix h = random_matrix_with_norm(dim, 1.0, rng);
    for (std::uint32_t i = 0; i < m; ++i) {
      // Direction of the constrained derivative: Delta = H x_i.
      const Matrix delta = h * x[i];
      Matrix d = Matrix::Zero(dim, dim);
      for (const auto& [w, c] : p.terms()) {
        for (std::size_t j = 0; j < w.size(); ++j) {
          if (w[j] != i) continue;
          d += c * range_product(w, 0, j, x, dim) * delta *
               range_product(w, j + 1, w.size(), x, dim);
        }
      }
      best[i] = std::max(best[i], spectral_norm(d));
    }
  }
  return best;
}

LipschitzCertificate analytic_certificate(const NcPolynomial& p, double radius) {
  LipschitzCertificate cert;
  cert.radius = radius;
  cert.l0_bound = analytic_l0(p, radius);
  cert.l1_bounds = analytic_l1(p, radius);
  cert.method = LipschitzCertificate::Method::analytic;
  return cert;
}

LipschitzCertificate empirical_certificate(const NcPolynomial& p, double radius, int trials,
                                           std::uint64_t seed) {
  LipschitzCertificate cert;
  cert.radius = radius;
  cert.l0_bound = empirical_l0(p, radius, trials, seed);
  cert.l1_bounds = empirical_l1(p, radius, trials, seed);
  cert.method = LipschitzCertificate::Method::empirical;
  return cert;
}

LipschitzCertificate block_certificate(const NcPolynomial& p, const SpectralDecomposition& d,
                                       int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const std::uint32_t m = p.num_generators();
  if (!d.block_shifts.empty() && d.block_shifts.front().size() != m) {
    throw std::invalid_argument("decomposition generator count does not match the filter");
  }

  LipschitzCertificate cert;
  cert.method = LipschitzCertificate::Method::empirical;
  cert.l1_bounds.assign(m, 0.0);

  int dmax = 0;
  for (const BlockRange& b : d.blocks) dmax = std::max(dmax, b.size);
  for (const auto& lambdas : d.block_shifts) {
    for (const Matrix& l : lambdas) cert.radius = std::max(cert.radius, spectral_norm(l));
  }

  // L0 over the zero-padded block tuples: every pair of distinct blocks is a
  // realized pair of frequency points in the common R^{dmax x dmax} view.
  std::vector<std::vector<Matrix>> padded;
  for (int j = 0; j < static_cast<int>(d.blocks.size()); ++j) {
    padded.push_back(matrix_frequencies(d, j, true).lambdas);
  }
  for (std::size_t a = 0; a < padded.size(); ++a) {
    for (std::size_t b = a + 1; b < padded.size(); ++b) {
      double denom = 0.0;
      for (std::uint32_t i = 0; i < m; ++i) {
        denom = std::max(denom, spectral_norm(padded[a][i] - padded[b][i]));
      }
      if (denom < 1e-12) continue;
      const double num = spectral_norm(evaluate(p, padded[a], dmax) -
                                       evaluate(p, padded[b], dmax));
      cert.l0_bound = std::max(cert.l0_bound, num / denom);
    }
  }

  // L1 at each block tuple with random unit directions.
  const Rng base(seed);
  for (std::size_t j = 0; j < d.block_shifts.size(); ++j) {
    const std::vector<Matrix>& lambdas = d.block_shifts[j];
    const int dim = d.blocks[j].size;
    for (int t = 0; t < trials; ++t) {
      Rng rng = base.derive(Rng::mix(j, static_cast<std::uint64_t>(t)));
      const Matrix h = random_matrix_with_norm(dim, 1.0, rng);
      for (std::uint32_t i = 0; i < m; ++i) {
        const Matrix delta = h * lambdas[i];
        Matrix deriv = Matrix::Zero(dim, dim);
        for (const auto& [w, c] : p.terms()) {
          for (std::size_t pos = 0; pos < w.size(); ++pos) {
            if (w[pos] != i) continue;
            deriv += c * range_product(w, 0, pos, lambdas, dim) * delta *
                     range_product(w, pos + 1, w.size(), lambdas, dim);
          }
        }
        cert.l1_bounds[i] = std::max(cert.l1_bounds[i], spectral_norm(deriv));
      }
    }
  }
  return cert;
}

IlPenalty il_penalty(const NcPolynomial& p, double radius, double tau) {
  check_radius(radius);
  if (!(tau > 0.0)) throw std::invalid_argument("smoothing temperature must be positive");
  const std::uint32_t m = p.num_generators();
  const std::vector<double> v = analytic_l1(p, radius);

  IlPenalty out;
  double vmax = 0.0;
  for (double vi : v) vmax = std::max(vmax, vi);
  out.exact_max = vmax;

  // Log-sum-exp with the max factored out for stability.
  double z = 0.0;
  std::vector<double> softmax(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    softmax[i] = std::exp((v[i] - vmax) / tau);
    z += softmax[i];
  }
  out.value = vmax + tau * std::log(z);
  for (std::uint32_t i = 0; i < m; ++i) softmax[i] /= z;

  for (const auto& [w, c] : p.terms()) {
    const double sign = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
    const double bpow = std::pow(radius, static_cast<double>(w.size()));
    double g = 0.0;
    for (std::uint32_t i = 0; i < m; ++i) {
      const int occ = count_occurrences(w, i);
      if (occ > 0) g += softmax[i] * occ * bpow;
    }
    out.gradient.emplace(w, sign * g);
  }
  return out;
}

}  // namespace ncasp
