#include "ncasp/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ncasp/errors.hpp"
#include "ncasp/rng.hpp"

namespace ncasp {

namespace {

// Shared sparsify/normalize tail: clamp negatives, keep the k strongest
// off-diagonal entries per row, max-symmetrize, zero the diagonal, scale the
// largest |eigenvalue| to 1.
Matrix sparsify_and_normalize(Matrix sim, const MultigraphSpec& spec) {
  const int n = static_cast<int>(sim.rows());
  sim = sim.cwiseMax(0.0);
  sim.diagonal().setZero();

  Matrix kept = Matrix::Zero(n, n);
  std::vector<std::pair<double, int>> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i && sim(i, j) > 0.0) row.emplace_back(sim(i, j), j);
    }
    const auto k = static_cast<std::size_t>(spec.top_k);
    if (row.size() > k) {
      std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end(),
                        [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                        });
      row.resize(k);
    }
    for (const auto& [v, j] : row) kept(i, j) = v;
  }

  Matrix sym = kept.cwiseMax(kept.transpose());
  sym.diagonal().setZero();

  if (spec.normalization == ShiftNormalization::spectral) {
    const double radius = spectral_norm(sym);
    if (radius > 0.0) sym /= radius;
  }
  return sym;
}

void check_spec(const MultigraphSpec& spec) {
  if (spec.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

}  // namespace

ShiftBuildResult rating_similarity_shift(const RatingsTable& table,
                                         const std::vector<int>& user_subset,
                                         const MultigraphSpec& spec) {
  check_spec(spec);
  if (user_subset.empty()) throw std::invalid_argument("user subset is empty");
  for (int u : user_subset) {
    if (u < 0 || u >= table.num_users()) {
      throw std::invalid_argument("user index " + std::to_string(u) + " out of range");
    }
  }
  const int n = table.num_items();
  ShiftBuildResult result;
  std::vector<bool> constant_flagged(static_cast<std::size_t>(n), false);

  Matrix sim = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      int count = 0;
      for (int u : user_subset) {
        if (!table.observed(u, a) || !table.observed(u, b)) continue;
        const double x = table.values(u, a);
        const double y = table.values(u, b);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        ++count;
      }
      if (count < 2) continue;
      const double inv = 1.0 / count;
      const double vx = sxx - sx * sx * inv;
      const double vy = syy - sy * sy * inv;
      if (vx <= 0.0 || vy <= 0.0) {
        for (int item : {a, b}) {
          if (((item == a && vx <= 0.0) || (item == b && vy <= 0.0)) &&
              !constant_flagged[static_cast<std::size_t>(item)]) {
            constant_flagged[static_cast<std::size_t>(item)] = true;
            result.warnings.push_back("item " + std::to_string(item) +
                                      " is constant over co-rated users; similarity set to 0");
          }
        }
        continue;
      }
      const double r = (sxy - sx * sy * inv) / std::sqrt(vx * vy);
      sim(a, b) = r;
      sim(b, a) = r;
    }
  }
  result.shift = sparsify_and_normalize(std::move(sim), spec);
  return result;
}

ShiftBuildResult feature_similarity_shift(const RatingsTable& table,
                                          const MultigraphSpec& spec) {
  check_spec(spec);
  if (!table.has_features || table.item_features.rows() != table.num_items()) {
    throw std::invalid_argument("ratings table has no item features");
  }
  const int n = table.num_items();
  ShiftBuildResult result;

  Vector norms(n);
  for (int i = 0; i < n; ++i) {
    norms(i) = table.item_features.row(i).norm();
    if (norms(i) == 0.0) {
      result.warnings.push_back("item " + std::to_string(i) +
                                " has a zero feature vector; similarity set to 0");
    }
  }
  Matrix sim = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    if (norms(a) == 0.0) continue;
    for (int b = a + 1; b < n; ++b) {
      if (norms(b) == 0.0) continue;
      const double cosine =
          table.item_features.row(a).dot(table.item_features.row(b)) / (norms(a) * norms(b));
      sim(a, b) = cosine;
      sim(b, a) = cosine;
    }
  }
  result.shift = sparsify_and_normalize(std::move(sim), spec);
  return result;
}

std::vector<EstimatedShifts> estimation_protocol(const RatingsTable& table,
                                                 const std::vector<int>& base_subset,
                                                 const ShiftSet& baseline,
                                                 const std::vector<double>& fractions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const MultigraphSpec& spec) {
  if (baseline.num_generators() != 2) {
    throw std::invalid_argument("baseline shift set must hold {rating, feature} shifts");
  }
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0) {
      throw std::invalid_argument("fractions must lie in (0, 1]");
    }
  }

  std::vector<EstimatedShifts> out;
  out.reserve(fractions.size() * seeds.size());
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const double fraction = fractions[fi];
    for (std::uint64_t seed : seeds) {
      EstimatedShifts entry{fraction, seed, baseline, 0.0, false, ""};
      std::vector<int> subset;
      if (fraction >= 1.0) {
        subset = base_subset;
      } else {
        const auto size = static_cast<std::size_t>(
            std::lround(fraction * static_cast<double>(base_subset.size())));
        std::vector<int> pool = base_subset;
        Rng rng(Rng::mix(seed, fi));
        rng.shuffle(pool);
        subset.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(
                                                       std::min(size, pool.size())));
      }
      if (subset.size() < 2) {
        entry.skipped = true;
        entry.warning = "subset of " + std::to_string(subset.size()) +
                        " users is too small for any correlation";
        out.push_back(std::move(entry));
        continue;
      }
      if (fraction >= 1.0) {
        // Exact reuse of the baseline estimate.
        out.push_back(std::move(entry));
        continue;
      }
      const ShiftBuildResult est = rating_similarity_shift(table, subset, spec);
      entry.deviation = spectral_norm(baseline.shift(0) - est.shift);
      entry.shifts = ShiftSet(baseline.dim(), {est.shift, baseline.shift(1)});
      out.push_back(std::move(entry));
    }
  }
  return out;
}

RatingsTable synthesize_dataset(int num_items, int num_users, double noise,
                                std::uint64_t seed) {
  if (num_items < 1 || num_users < 1) {
    throw std::invalid_argument("dataset sizes must be positive");
  }
  constexpr int kRank = 3;
  constexpr double kMissing = 0.30;
  Rng rng(seed);

  Matrix user_factors(num_users, kRank);
  for (int r = 0; r < num_users; ++r) {
    for (int c = 0; c < kRank; ++c) user_factors(r, c) = rng.gaussian();
  }
  Matrix item_factors(num_items, kRank);
  for (int r = 0; r < num_items; ++r) {
    for (int c = 0; c < kRank; ++c) item_factors(r, c) = rng.gaussian();
  }

  RatingsTable table;
  table.values = user_factors * item_factors.transpose();
  if (noise > 0.0) {
    for (int r = 0; r < num_users; ++r) {
      for (int c = 0; c < num_items; ++c) table.values(r, c) += noise * rng.gaussian();
    }
  }
  table.mask.assign(static_cast<std::size_t>(num_users),
                    std::vector<bool>(static_cast<std::size_t>(num_items), false));
  for (int r = 0; r < num_users; ++r) {
    for (int c = 0; c < num_items; ++c) {
      table.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
          rng.uniform() >= kMissing;
    }
  }
  table.item_features = item_factors;
  if (noise > 0.0) {
    for (int r = 0; r < num_items; ++r) {
      for (int c = 0; c < kRank; ++c) table.item_features(r, c) += noise * rng.gaussian();
    }
  }
  table.has_features = true;
  return table;
}

RatingsTable load_ratings_csv(const std::string& ratings_path,
                              const std::string& features_path) {
  std::ifstream in(ratings_path);
  if (!in) throw IoError("cannot open ratings file: " + ratings_path);

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw IoError(ratings_path + ": empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user_id,item_id,rating") {
    throw IoError(ratings_path + ":1: expected header 'user_id,item_id,rating'");
  }

  std::map<std::string, int> user_index, item_index;
  struct Entry {
    int user, item;
    double rating;
  };
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string user_id, item_id, rating_tok;
    if (!std::getline(row, user_id, ',') || !std::getline(row, item_id, ',') ||
        !std::getline(row, rating_tok)) {
      throw IoError(ratings_path + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    bool ok = false;
    const double rating = parse_double(rating_tok, &ok);
    if (!ok) {
      throw IoError(ratings_path + ":" + std::to_string(line_no) + ": bad rating '" +
                    rating_tok + "'");
    }
    const int u =
        user_index.emplace(user_id, static_cast<int>(user_index.size())).first->second;
    const int i =
        item_index.emplace(item_id, static_cast<int>(item_index.size())).first->second;
    entries.push_back({u, i, rating});
  }
  if (entries.empty()) throw IoError(ratings_path + ": no ratings");

  RatingsTable table;
  const int num_users = static_cast<int>(user_index.size());
  const int num_items = static_cast<int>(item_index.size());
  table.values = Matrix::Zero(num_users, num_items);
  table.mask.assign(static_cast<std::size_t>(num_users),
                    std::vector<bool>(static_cast<std::size_t>(num_items), false));
  for (const Entry& e : entries) {
    table.values(e.user, e.item) = e.rating;
    table.mask[static_cast<std::size_t>(e.user)][static_cast<std::size_t>(e.item)] = true;
  }

  if (!features_path.empty()) {
    std::ifstream fin(features_path);
    if (!fin) throw IoError("cannot open features file: " + features_path);
    int fline_no = 0;
    if (!std::getline(fin, line)) throw IoError(features_path + ": empty file");
    ++fline_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("item_id,", 0) != 0) {
      throw IoError(features_path + ":1: expected header 'item_id,f0,f1,...'");
    }
    const auto feature_dim = static_cast<Eigen::Index>(
        std::count(line.begin(), line.end(), ',')); // columns after item_id
    table.item_features = Matrix::Zero(num_items, feature_dim);
    std::vector<bool> seen(static_cast<std::size_t>(num_items), false);
    while (std::getline(fin, line)) {
      ++fline_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string item_id;
      if (!std::getline(row, item_id, ',')) {
        throw IoError(features_path + ":" + std::to_string(fline_no) + ": missing item_id");
      }
      const auto it = item_index.find(item_id);
      if (it == item_index.end()) continue;  // features for unrated items are ignored
      std::string tok;
      for (Eigen::Index c = 0; c < feature_dim; ++c) {
        if (!std::getline(row, tok, ',')) {
          throw IoError(features_path + ":" + std::to_string(fline_no) + ": expected " +
                        std::to_string(feature_dim + 1) + " fields");
        }
        bool ok = false;
        table.item_features(it->second, c) = parse_double(tok, &ok);
        if (!ok) {
          throw IoError(features_path + ":" + std::to_string(fline_no) + ": bad value '" +
                        tok + "'");
        }
      }
      seen[static_cast<std::size_t>(it->second)] = true;
    }
    for (int i = 0; i < num_items; ++i) {
      if (!seen[static_cast<std::size_t>(i)]) {
        throw IoError(features_path + ": missing feature row for item index " +
                      std::to_string(i));
      }
    }
    table.has_features = true;
  }
  return table;
}

void save_ratings_csv(const std::string& ratings_path, const RatingsTable& table) {
  std::ofstream out(ratings_path, std::ios::binary);
  if (!out) throw IoError("cannot write ratings file: " + ratings_path);
  out << "user_id,item_id,rating\n";
  for (int u = 0; u < table.num_users(); ++u) {
    for (int i = 0; i < table.num_items(); ++i) {
      if (!table.observed(u, i)) continue;
      out << u << ',' << i << ',' << format_double(table.values(u, i)) << '\n';
    }
  }
}

}  // namespace ncasp
