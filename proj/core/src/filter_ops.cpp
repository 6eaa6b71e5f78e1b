#include "ncasp/filter_ops.hpp"

#include <stdexcept>
#include <string>

namespace ncasp {

namespace {

void check_compatible(const NcPolynomial& p, const ShiftSet& shifts) {
  if (p.num_generators() != shifts.num_generators()) {
    throw std::invalid_argument("filter has " + std::to_string(p.num_generators()) +
                                " generators but shift set has " +
                                std::to_string(shifts.num_generators()));
  }
}

}  // namespace

WordMatrixCache::WordMatrixCache(const ShiftSet& shifts) : shifts_(shifts) {
  cache_.emplace(Word{}, Matrix::Identity(shifts.dim(), shifts.dim()));
}

const Matrix& WordMatrixCache::product(const Word& w) {
  auto it = cache_.find(w);
  if (it != cache_.end()) return it->second;
  // Longest cached proper prefix, extended one letter at a time by right
  // multiplication.
  Word prefix = w;
  prefix.pop_back();
  while (!prefix.empty() && cache_.find(prefix) == cache_.end()) prefix.pop_back();
  Matrix acc = cache_.at(prefix);
  for (std::size_t j = prefix.size(); j < w.size(); ++j) {
    acc = acc * shifts_.shift(w[j]);
    prefix.push_back(w[j]);
    cache_.emplace(prefix, acc);
  }
  return cache_.at(w);
}

WordVectorCache::WordVectorCache(const ShiftSet& shifts, Vector x) : shifts_(shifts) {
  cache_.emplace(Word{}, std::move(x));
}

const Vector& WordVectorCache::action(const Word& w) {
  auto it = cache_.find(w);
  if (it != cache_.end()) return it->second;
  // Longest cached proper suffix; each missing letter is applied on the left.
  std::size_t start = 1;
  Word suffix(w.begin() + 1, w.end());
  while (!suffix.empty() && cache_.find(suffix) == cache_.end()) {
    suffix.erase(suffix.begin());
    ++start;
  }
  Vector acc = cache_.at(suffix);
  for (std::size_t j = start; j-- > 0;) {
    acc = shifts_.shift(w[j]) * acc;
    suffix.insert(suffix.begin(), w[j]);
    cache_.emplace(suffix, acc);
  }
  return cache_.at(w);
}

FilterOperator instantiate(const NcPolynomial& p, const ShiftSet& shifts, int dense_cap) {
  check_compatible(p, shifts);
  if (shifts.dim() > dense_cap) {
    throw std::invalid_argument("dimension " + std::to_string(shifts.dim()) +
                                " exceeds dense materialization cap " +
                                std::to_string(dense_cap));
  }
  Matrix acc = Matrix::Zero(shifts.dim(), shifts.dim());
  WordMatrixCache cache(shifts);
  for (const auto& [w, c] : p.terms()) {
    acc += c * cache.product(w);
  }
  return FilterOperator{std::move(acc), p};
}

Vector apply(const FilterOperator& f, const Vector& x) {
  if (f.matrix.cols() != x.size()) {
    throw std::invalid_argument("filter operator is " + std::to_string(f.matrix.rows()) + "x" +
                                std::to_string(f.matrix.cols()) + " but signal has length " +
                                std::to_string(x.size()));
  }
  return f.matrix * x;
}

Vector apply_streaming(const NcPolynomial& p, const ShiftSet& shifts, const Vector& x) {
  check_compatible(p, shifts);
  if (x.size() != shifts.dim()) {
    throw std::invalid_argument("signal length " + std::to_string(x.size()) +
                                " does not match shift dimension " +
                                std::to_string(shifts.dim()));
  }
  Vector acc = Vector::Zero(x.size());
  WordVectorCache cache(shifts, x);
  for (const auto& [w, c] : p.terms()) {
    acc += c * cache.action(w);
  }
  return acc;
}

Vector apply_streaming_adjoint(const NcPolynomial& p, const ShiftSet& shifts, const Vector& y) {
  check_compatible(p, shifts);
  if (y.size() != shifts.dim()) {
    throw std::invalid_argument("adjoint input length " + std::to_string(y.size()) +
                                " does not match shift dimension " +
                                std::to_string(shifts.dim()));
  }
  // (S_{w1}...S_{wk})^T y = S_{wk}^T ... S_{w1}^T y: evaluate left-to-right
  // with transposed shifts, memoized on word prefixes.
  std::map<Word, Vector, GradedLexLess> cache;
  cache.emplace(Word{}, y);
  Vector acc = Vector::Zero(y.size());
  for (const auto& [w, c] : p.terms()) {
    auto it = cache.find(w);
    if (it == cache.end()) {
      Word prefix = w;
      prefix.pop_back();
      while (!prefix.empty() && cache.find(prefix) == cache.end()) prefix.pop_back();
      Vector v = cache.at(prefix);
      for (std::size_t j = prefix.size(); j < w.size(); ++j) {
        v = shifts.shift(w[j]).transpose() * v;
        prefix.push_back(w[j]);
        cache.emplace(prefix, v);
      }
      it = cache.find(w);
    }
    acc += c * it->second;
  }
  return acc;
}

double recompute_error(const FilterOperator& f, const ShiftSet& shifts) {
  const FilterOperator fresh = instantiate(f.source, shifts);
  const double scale = std::max(fresh.matrix.norm(), 1e-300);
  return (f.matrix - fresh.matrix).norm() / scale;
}

OperatorNormBound operator_norm_bound(const NcPolynomial& p, const ShiftSet& shifts,
                                      int dense_cap) {
  check_compatible(p, shifts);
  std::vector<double> shift_norms(shifts.num_generators());
  for (std::uint32_t i = 0; i < shifts.num_generators(); ++i) {
    shift_norms[i] = spectral_norm(shifts.shift(i));
  }
  OperatorNormBound out;
  for (const auto& [w, c] : p.terms()) {
    double word_norm = 1.0;
    for (std::uint32_t letter : w) word_norm *= shift_norms[letter];
    out.bound += std::abs(c) * word_norm;
  }
  if (shifts.dim() <= dense_cap) {
    out.exact = spectral_norm(instantiate(p, shifts).matrix);
  }
  return out;
}

}  // namespace ncasp
