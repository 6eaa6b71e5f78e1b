#ifndef NCASP_SHIFT_SET_HPP
#define NCASP_SHIFT_SET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ncasp/linalg.hpp"

namespace ncasp {

/// The concrete shift operators of a signal model: an ordered list of m
/// square matrices sharing one dimension. Immutable after construction.
class ShiftSet {
 public:
  ShiftSet(int dim, std::vector<Matrix> shifts);

  int dim() const noexcept { return dim_; }
  std::uint32_t num_generators() const noexcept {
    return static_cast<std::uint32_t>(shifts_.size());
  }
  const Matrix& shift(std::size_t i) const { return shifts_.at(i); }
  const std::vector<Matrix>& shifts() const noexcept { return shifts_; }

  /// max_i ||S_i||_2.
  double max_shift_norm() const;

 private:
  int dim_;
  std::vector<Matrix> shifts_;
};

/// Directory layout: shift_0.csv ... shift_{m-1}.csv plus meta.json with
/// fields {dim, num_generators}.
ShiftSet load_shift_set(const std::string& dir);
void save_shift_set(const std::string& dir, const ShiftSet& s);

}  // namespace ncasp

#endif  // NCASP_SHIFT_SET_HPP
