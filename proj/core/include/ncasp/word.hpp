#ifndef NCASP_WORD_HPP
#define NCASP_WORD_HPP

#include <cstdint>
#include <vector>

namespace ncasp {

/// A monomial over the free non-commutative generators: a finite sequence of
/// generator indices. The empty word is the unit of the algebra.
using Word = std::vector<std::uint32_t>;

/// Graded lexicographic order: shorter words first, ties broken by the letter
/// sequence. This is the canonical term order used for serialization and for
/// the coefficient-vector layout of trainable filters.
struct GradedLexLess {
  bool operator()(const Word& a, const Word& b) const noexcept {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

inline Word concat(const Word& u, const Word& v) {
  Word w;
  w.reserve(u.size() + v.size());
  w.insert(w.end(), u.begin(), u.end());
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

/// Number of letters equal to `generator` in `w`.
inline int count_occurrences(const Word& w, std::uint32_t generator) noexcept {
  int c = 0;
  for (std::uint32_t letter : w) {
    if (letter == generator) ++c;
  }
  return c;
}

/// All words of length <= max_degree over m generators, in graded-lex order.
std::vector<Word> words_up_to_degree(std::uint32_t num_generators, int max_degree);

/// The unit word plus pure powers g_i^d for d <= max_degree ("path" tap set).
std::vector<Word> power_words_up_to_degree(std::uint32_t num_generators, int max_degree);

}  // namespace ncasp

#endif  // NCASP_WORD_HPP
