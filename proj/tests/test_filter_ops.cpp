#include <doctest.h>

#include <stdexcept>

#include "ncasp/filter_ops.hpp"
#include "test_helpers.hpp"

using namespace ncasp;

namespace {

NcPolynomial example_filter() {
  // g1 + 5 g1g2 + g2^2
  return NcPolynomial::zero(2)
      .with_term(Word{0}, 1.0)
      .with_term(Word{0, 1}, 5.0)
      .with_term(Word{1, 1}, 1.0);
}

}  // namespace

TEST_CASE("instantiate: unit polynomial maps to the identity") {
  Rng rng(3);
  const ShiftSet s = test::random_shift_set(4, 2, rng);
  const FilterOperator f = instantiate(NcPolynomial::unit(2), s);
  CHECK((f.matrix - Matrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("instantiate: example filter at identity shifts sums coefficients") {
  const Matrix eye = Matrix::Identity(2, 2);
  const ShiftSet s(2, {eye, eye});
  const FilterOperator f = instantiate(example_filter(), s);
  CHECK((f.matrix - 7.0 * eye).norm() <= 1e-14);
}

TEST_CASE("instantiate: 2x2 commutator of the ladder pair") {
  Matrix s1(2, 2), s2(2, 2);
  s1 << 0, 1, 0, 0;
  s2 << 0, 0, 1, 0;
  const auto p = add(NcPolynomial::monomial(2, Word{0, 1}, 1.0),
                     NcPolynomial::monomial(2, Word{1, 0}, -1.0));
  const FilterOperator f = instantiate(p, ShiftSet(2, {s1, s2}));
  Matrix expected(2, 2);
  expected << 1, 0, 0, -1;
  CHECK((f.matrix - expected).norm() == 0.0);
}

TEST_CASE("apply: identity, zero filter, cyclic shift") {
  Vector x(3);
  x << 1, 2, 3;

  Matrix cyc = Matrix::Zero(3, 3);
  cyc(0, 2) = 1;
  cyc(1, 0) = 1;
  cyc(2, 1) = 1;
  const ShiftSet s(3, {cyc});

  const FilterOperator unit = instantiate(NcPolynomial::unit(1), s);
  CHECK((apply(unit, x) - x).norm() == 0.0);

  const FilterOperator zero = instantiate(NcPolynomial::zero(1), s);
  CHECK(apply(zero, x).norm() == 0.0);

  const FilterOperator shift = instantiate(NcPolynomial::generator(1, 0), s);
  Vector rotated(3);
  rotated << 3, 1, 2;
  CHECK((apply(shift, x) - rotated).norm() == 0.0);
}

TEST_CASE("apply_streaming: matches dense instantiation on random instances") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(15));
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));
    const ShiftSet s = test::random_shift_set(n, m, rng);
    const auto p = test::random_polynomial(m, 4, 6, rng);
    const Vector x = test::random_vector(n, rng);

    const Vector dense = apply(instantiate(p, s), x);
    const Vector streamed = apply_streaming(p, s, x);
    const double scale = std::max(dense.norm(), 1e-300);
    CHECK((dense - streamed).norm() / scale <= 1e-10);
  }
}

TEST_CASE("apply_streaming: unit filter returns the signal") {
  Rng rng(5);
  const ShiftSet s = test::random_shift_set(6, 2, rng);
  const Vector x = test::random_vector(6, rng);
  CHECK((apply_streaming(NcPolynomial::unit(2), s, x) - x).norm() == 0.0);
}

TEST_CASE("apply_streaming: single word g2g1 acts as S2(S1 x)") {
  Rng rng(6);
  const ShiftSet s = test::random_shift_set(5, 2, rng);
  const Vector x = test::random_vector(5, rng);
  const auto p = NcPolynomial::monomial(2, Word{1, 0}, 1.0);
  const Vector expected = s.shift(1) * (s.shift(0) * x);
  CHECK((apply_streaming(p, s, x) - expected).norm() <= 1e-14 * expected.norm());
}

TEST_CASE("apply_streaming_adjoint matches the transposed operator") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(6));
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(2));
    const ShiftSet s = test::random_shift_set(n, m, rng);
    const auto p = test::random_polynomial(m, 3, 5, rng);
    const Vector y = test::random_vector(n, rng);
    const Vector expected = instantiate(p, s).matrix.transpose() * y;
    const Vector got = apply_streaming_adjoint(p, s, y);
    CHECK((expected - got).norm() <= 1e-12 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("homomorphism: rho(pq) = rho(p) rho(q)") {
  Rng rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(8));
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));
    const ShiftSet s = test::random_shift_set(n, m, rng);
    const auto p = test::random_polynomial(m, 3, 4, rng);
    const auto q = test::random_polynomial(m, 3, 4, rng);

    const Matrix lhs = instantiate(multiply(p, q), s).matrix;
    const Matrix rhs = instantiate(p, s).matrix * instantiate(q, s).matrix;
    const double scale = std::max(lhs.norm(), 1e-300);
    CHECK((lhs - rhs).norm() / scale <= 1e-10);
  }
}

TEST_CASE("linearity: rho(p+q) = rho(p) + rho(q)") {
  Rng rng(31);
  const ShiftSet s = test::random_shift_set(6, 2, rng);
  const auto p = test::random_polynomial(2, 3, 4, rng);
  const auto q = test::random_polynomial(2, 3, 4, rng);
  const Matrix lhs = instantiate(add(p, q), s).matrix;
  const Matrix rhs = instantiate(p, s).matrix + instantiate(q, s).matrix;
  CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, lhs.norm()));
}

TEST_CASE("recompute_error stays within the construction invariant") {
  Rng rng(37);
  const ShiftSet s = test::random_shift_set(7, 2, rng);
  const auto p = test::random_polynomial(2, 4, 6, rng);
  const FilterOperator f = instantiate(p, s);
  CHECK(recompute_error(f, s) <= 1e-12);
}

TEST_CASE("operator_norm_bound: unit and scaled orthogonal shift") {
  const Matrix eye = Matrix::Identity(3, 3);
  const ShiftSet s(3, {eye});
  const auto unit_bound = operator_norm_bound(NcPolynomial::unit(1), s);
  CHECK(unit_bound.bound == doctest::Approx(1.0));

  const auto scaled = operator_norm_bound(scale(NcPolynomial::generator(1, 0), 2.0), s);
  CHECK(scaled.bound == doctest::Approx(2.0));
  REQUIRE(scaled.exact.has_value());
  CHECK(*scaled.exact == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("operator_norm_bound dominates the exact spectral norm") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(6));
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));
    const ShiftSet s = test::random_shift_set(n, m, rng);
    const auto p = test::random_polynomial(m, 3, 5, rng);
    const auto nb = operator_norm_bound(p, s);
    REQUIRE(nb.exact.has_value());
    CHECK(*nb.exact <= nb.bound * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("contract violations throw") {
  Rng rng(43);
  const ShiftSet s = test::random_shift_set(4, 2, rng);
  CHECK_THROWS_AS(instantiate(NcPolynomial::generator(3, 0), s), std::invalid_argument);
  CHECK_THROWS_AS(instantiate(NcPolynomial::unit(2), s, 2), std::invalid_argument);
  const FilterOperator f = instantiate(NcPolynomial::unit(2), s);
  CHECK_THROWS_AS(apply(f, Vector::Zero(5)), std::invalid_argument);
  CHECK_THROWS_AS(apply_streaming(NcPolynomial::unit(2), s, Vector::Zero(3)),
                  std::invalid_argument);
}
