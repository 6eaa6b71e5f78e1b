#include "ncasp/shift_set.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ncasp/errors.hpp"

namespace ncasp {

ShiftSet::ShiftSet(int dim, std::vector<Matrix> shifts) : dim_(dim), shifts_(std::move(shifts)) {
  if (dim_ <= 0) throw std::invalid_argument("shift dimension must be positive");
  if (shifts_.empty()) throw std::invalid_argument("a shift set needs at least one generator");
  for (const Matrix& s : shifts_) {
    if (s.rows() != dim_ || s.cols() != dim_) {
      throw std::invalid_argument("all shifts must be square of dimension " +
                                  std::to_string(dim_));
    }
  }
}

double ShiftSet::max_shift_norm() const {
  double best = 0.0;
  for (const Matrix& s : shifts_) best = std::max(best, spectral_norm(s));
  return best;
}

ShiftSet load_shift_set(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  const fs::path meta_path = root / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IoError("cannot open " + meta_path.string());

  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(meta_path.string() + ": " + e.what());
  }
  if (!meta.contains("dim") || !meta.contains("num_generators")) {
    throw IoError(meta_path.string() + ": expected fields {dim, num_generators}");
  }
  const int dim = meta["dim"].get<int>();
  const int m = meta["num_generators"].get<int>();
  if (m <= 0) throw IoError(meta_path.string() + ": num_generators must be positive");

  std::vector<Matrix> shifts;
  shifts.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const fs::path p = root / ("shift_" + std::to_string(i) + ".csv");
    Matrix s = load_matrix_csv(p.string());
    if (s.rows() != dim || s.cols() != dim) {
      throw IoError(p.string() + ": expected " + std::to_string(dim) + "x" +
                    std::to_string(dim) + " matrix");
    }
    shifts.push_back(std::move(s));
  }
  return ShiftSet(dim, std::move(shifts));
}

void save_shift_set(const std::string& dir, const ShiftSet& s) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create directory " + root.string() + ": " + ec.message());

  for (std::uint32_t i = 0; i < s.num_generators(); ++i) {
    save_matrix_csv((root / ("shift_" + std::to_string(i) + ".csv")).string(), s.shift(i));
  }
  nlohmann::ordered_json meta;
  meta["dim"] = s.dim();
  meta["num_generators"] = s.num_generators();
  std::ofstream out(root / "meta.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (root / "meta.json").string());
  out << meta.dump(2) << '\n';
}

}  // namespace ncasp
