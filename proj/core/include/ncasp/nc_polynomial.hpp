#ifndef NCASP_NC_POLYNOMIAL_HPP
#define NCASP_NC_POLYNOMIAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncasp/word.hpp"

namespace ncasp {

/// Element of the free non-commutative polynomial algebra over m generators:
/// a finite real-coefficient combination of words. Stored in canonical sparse
/// form (no zero coefficients, terms in graded-lex order). Immutable in
/// spirit: all mutators return new values.
class NcPolynomial {
 public:
  using TermMap = std::map<Word, double, GradedLexLess>;

  explicit NcPolynomial(std::uint32_t num_generators) : num_generators_(num_generators) {}
  NcPolynomial(std::uint32_t num_generators, TermMap terms);

  static NcPolynomial zero(std::uint32_t num_generators) { return NcPolynomial(num_generators); }
  static NcPolynomial unit(std::uint32_t num_generators);
  /// The single-letter monomial g_{index}.
  static NcPolynomial generator(std::uint32_t num_generators, std::uint32_t index);
  static NcPolynomial monomial(std::uint32_t num_generators, Word w, double coefficient);

  std::uint32_t num_generators() const noexcept { return num_generators_; }
  const TermMap& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// Max word length among terms; 0 for the zero polynomial.
  int degree() const noexcept;
  double coefficient(const Word& w) const;

  /// Returns a copy with terms_[w] set (or erased when exactly zero).
  NcPolynomial with_term(Word w, double coefficient) const;

  friend bool operator==(const NcPolynomial& a, const NcPolynomial& b) {
    return a.num_generators_ == b.num_generators_ && a.terms_ == b.terms_;
  }

 private:
  std::uint32_t num_generators_;
  TermMap terms_;
};

/// Coefficient-wise sum. Throws std::invalid_argument on generator-count
/// mismatch.
NcPolynomial add(const NcPolynomial& p, const NcPolynomial& q);

/// Algebra product: convolution of coefficient maps under word concatenation.
/// Not commutative.
NcPolynomial multiply(const NcPolynomial& p, const NcPolynomial& q);

NcPolynomial scale(const NcPolynomial& p, double factor);

/// Per word of p, the number of letters equal to generator `index`.
std::map<Word, int, GradedLexLess> generator_occurrences(const NcPolynomial& p,
                                                         std::uint32_t index);

/// Text form, one term per line: `coefficient: i1 i2 ... ik`, the empty word
/// written as `coefficient: e`. Coefficients use shortest round-trip decimals,
/// terms in graded-lex order.
std::string to_text(const NcPolynomial& p);

/// Parses the to_text format. When num_generators is absent it is inferred as
/// (max letter + 1), so an explicit count is needed for exact round-trips of
/// polynomials that do not use their top generator. Line numbers are reported
/// on parse errors (IoError).
NcPolynomial from_text(const std::string& text,
                       std::optional<std::uint32_t> num_generators = std::nullopt);

NcPolynomial load_polynomial(const std::string& path,
                             std::optional<std::uint32_t> num_generators = std::nullopt);
void save_polynomial(const std::string& path, const NcPolynomial& p);

}  // namespace ncasp

#endif  // NCASP_NC_POLYNOMIAL_HPP
