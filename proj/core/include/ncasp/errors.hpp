#ifndef NCASP_ERRORS_HPP
#define NCASP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ncasp {

/// File or format problem (missing file, malformed CSV/JSON). Messages carry
/// the offending path and, for parse errors, a 1-based line number.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical procedure failed to reach its documented tolerance
/// (e.g. unstable null-space rank estimation in the joint block
/// diagonalization).
class NonConvergence : public std::runtime_error {
 public:
  explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// Training loss became NaN/inf; the message records the epoch and the
/// last finite loss seen.
class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ncasp

#endif  // NCASP_ERRORS_HPP
