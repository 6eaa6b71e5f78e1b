#ifndef NCASP_BENCH_COMMON_HPP
#define NCASP_BENCH_COMMON_HPP

#include "ncasp/linalg.hpp"
#include "ncasp/nc_polynomial.hpp"
#include "ncasp/rng.hpp"
#include "ncasp/shift_set.hpp"

namespace ncasp::bench {

inline Matrix random_symmetric(int n, Rng& rng) {
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = rng.gaussian();
  }
  return 0.5 * (m + m.transpose());
}

inline ShiftSet random_shift_set(int n, std::uint32_t m, Rng& rng) {
  std::vector<Matrix> shifts;
  for (std::uint32_t i = 0; i < m; ++i) {
    Matrix s = random_symmetric(n, rng);
    const double norm = spectral_norm(s);
    if (norm > 0.0) s /= norm;
    shifts.push_back(std::move(s));
  }
  return ShiftSet(n, std::move(shifts));
}

inline NcPolynomial dense_filter(std::uint32_t m, int max_degree, Rng& rng) {
  NcPolynomial p = NcPolynomial::zero(m);
  for (const Word& w : words_up_to_degree(m, max_degree)) {
    p = p.with_term(w, rng.gaussian());
  }
  return p;
}

}  // namespace ncasp::bench

#endif  // NCASP_BENCH_COMMON_HPP
