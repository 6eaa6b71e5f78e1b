#include "ncasp/nc_polynomial.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ncasp/errors.hpp"
#include "ncasp/linalg.hpp"

namespace ncasp {

namespace {

void check_word(const Word& w, std::uint32_t num_generators) {
  for (std::uint32_t letter : w) {
    if (letter >= num_generators) {
      throw std::invalid_argument("word letter " + std::to_string(letter) +
                                  " out of range for " + std::to_string(num_generators) +
                                  " generators");
    }
  }
}

void check_same_generators(const NcPolynomial& p, const NcPolynomial& q) {
  if (p.num_generators() != q.num_generators()) {
    throw std::invalid_argument("generator-count mismatch: " +
                                std::to_string(p.num_generators()) + " vs " +
                                std::to_string(q.num_generators()));
  }
}

}  // namespace

std::vector<Word> words_up_to_degree(std::uint32_t num_generators, int max_degree) {
  std::vector<Word> out{Word{}};
  std::vector<Word> frontier{Word{}};
  for (int d = 1; d <= max_degree; ++d) {
    std::vector<Word> next;
    next.reserve(frontier.size() * num_generators);
    for (const Word& w : frontier) {
      for (std::uint32_t g = 0; g < num_generators; ++g) {
        Word e = w;
        e.push_back(g);
        next.push_back(std::move(e));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::vector<Word> power_words_up_to_degree(std::uint32_t num_generators, int max_degree) {
  std::vector<Word> out{Word{}};
  for (int d = 1; d <= max_degree; ++d) {
    for (std::uint32_t g = 0; g < num_generators; ++g) {
      out.push_back(Word(static_cast<std::size_t>(d), g));
    }
  }
  return out;
}

NcPolynomial::NcPolynomial(std::uint32_t num_generators, TermMap terms)
    : num_generators_(num_generators) {
  for (auto& [w, c] : terms) {
    check_word(w, num_generators_);
    if (c != 0.0) terms_.emplace(w, c);
  }
}

NcPolynomial NcPolynomial::unit(std::uint32_t num_generators) {
  return monomial(num_generators, Word{}, 1.0);
}

NcPolynomial NcPolynomial::generator(std::uint32_t num_generators, std::uint32_t index) {
  return monomial(num_generators, Word{index}, 1.0);
}

NcPolynomial NcPolynomial::monomial(std::uint32_t num_generators, Word w, double coefficient) {
  check_word(w, num_generators);
  NcPolynomial p(num_generators);
  if (coefficient != 0.0) p.terms_.emplace(std::move(w), coefficient);
  return p;
}

int NcPolynomial::degree() const noexcept {
  if (terms_.empty()) return 0;
  // Graded-lex keys: the last term has the longest word.
  return static_cast<int>(terms_.rbegin()->first.size());
}

double NcPolynomial::coefficient(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? 0.0 : it->second;
}

NcPolynomial NcPolynomial::with_term(Word w, double coefficient) const {
  check_word(w, num_generators_);
  NcPolynomial out = *this;
  if (coefficient == 0.0) {
    out.terms_.erase(w);
  } else {
    out.terms_[std::move(w)] = coefficient;
  }
  return out;
}

NcPolynomial add(const NcPolynomial& p, const NcPolynomial& q) {
  check_same_generators(p, q);
  NcPolynomial::TermMap sum = p.terms();
  for (const auto& [w, c] : q.terms()) {
    auto [it, inserted] = sum.emplace(w, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) sum.erase(it);
    }
  }
  return NcPolynomial(p.num_generators(), std::move(sum));
}

NcPolynomial multiply(const NcPolynomial& p, const NcPolynomial& q) {
  check_same_generators(p, q);
  NcPolynomial::TermMap prod;
  for (const auto& [u, cu] : p.terms()) {
    for (const auto& [v, cv] : q.terms()) {
      Word w = concat(u, v);
      auto [it, inserted] = prod.emplace(std::move(w), cu * cv);
      if (!inserted) {
        it->second += cu * cv;
        if (it->second == 0.0) prod.erase(it);
      }
    }
  }
  return NcPolynomial(p.num_generators(), std::move(prod));
}

NcPolynomial scale(const NcPolynomial& p, double factor) {
  NcPolynomial::TermMap out;
  if (factor != 0.0) {
    for (const auto& [w, c] : p.terms()) out.emplace(w, c * factor);
  }
  return NcPolynomial(p.num_generators(), std::move(out));
}

std::map<Word, int, GradedLexLess> generator_occurrences(const NcPolynomial& p,
                                                         std::uint32_t index) {
  if (index >= p.num_generators()) {
    throw std::invalid_argument("generator index out of range");
  }
  std::map<Word, int, GradedLexLess> out;
  for (const auto& [w, c] : p.terms()) {
    out.emplace(w, count_occurrences(w, index));
  }
  return out;
}

std::string to_text(const NcPolynomial& p) {
  std::string out;
  for (const auto& [w, c] : p.terms()) {
    out += format_double(c);
    out += ':';
    if (w.empty()) {
      out += " e";
    } else {
      for (std::uint32_t letter : w) {
        out += ' ';
        out += std::to_string(letter);
      }
    }
    out += '\n';
  }
  return out;
}

NcPolynomial from_text(const std::string& text, std::optional<std::uint32_t> num_generators) {
  struct Term {
    Word word;
    double coefficient;
  };
  std::vector<Term> parsed;
  std::uint32_t max_letter_plus_1 = 0;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw IoError("polynomial text line " + std::to_string(line_no) + ": missing ':'");
    }
    bool ok = false;
    const double c = parse_double(line.substr(0, colon), &ok);
    if (!ok) {
      throw IoError("polynomial text line " + std::to_string(line_no) + ": bad coefficient");
    }
    Word w;
    std::istringstream rest(line.substr(colon + 1));
    std::string tok;
    bool unit = false;
    while (rest >> tok) {
      if (tok == "e") {
        unit = true;
        continue;
      }
      try {
        const unsigned long v = std::stoul(tok);
        w.push_back(static_cast<std::uint32_t>(v));
        max_letter_plus_1 = std::max(max_letter_plus_1, static_cast<std::uint32_t>(v) + 1);
      } catch (const std::exception&) {
        throw IoError("polynomial text line " + std::to_string(line_no) + ": bad letter '" +
                      tok + "'");
      }
    }
    if (unit && !w.empty()) {
      throw IoError("polynomial text line " + std::to_string(line_no) +
                    ": 'e' mixed with letters");
    }
    parsed.push_back({std::move(w), c});
  }

  const std::uint32_t m = num_generators.value_or(std::max<std::uint32_t>(max_letter_plus_1, 1));
  NcPolynomial::TermMap terms;
  for (auto& t : parsed) {
    auto [it, inserted] = terms.emplace(std::move(t.word), t.coefficient);
    if (!inserted) it->second += t.coefficient;
  }
  return NcPolynomial(m, std::move(terms));
}

NcPolynomial load_polynomial(const std::string& path,
                             std::optional<std::uint32_t> num_generators) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open polynomial file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return from_text(buf.str(), num_generators);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void save_polynomial(const std::string& path, const NcPolynomial& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write polynomial file: " + path);
  out << to_text(p);
}

}  // namespace ncasp
