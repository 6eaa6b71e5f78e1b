#ifndef NCASP_DATAIO_HPP
#define NCASP_DATAIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ncasp/linalg.hpp"
#include "ncasp/shift_set.hpp"

namespace ncasp {

/// users x items ratings with an observation mask, plus optional item
/// feature vectors (items x d).
struct RatingsTable {
  Matrix values;                       // users x items
  std::vector<std::vector<bool>> mask; // observed flags, same shape
  Matrix item_features;                // items x d, empty when absent
  bool has_features = false;

  int num_users() const { return static_cast<int>(values.rows()); }
  int num_items() const { return static_cast<int>(values.cols()); }
  bool observed(int user, int item) const {
    return mask[static_cast<std::size_t>(user)][static_cast<std::size_t>(item)];
  }
};

enum class ShiftNormalization { spectral, none };

struct MultigraphSpec {
  int top_k = 20;
  ShiftNormalization normalization = ShiftNormalization::spectral;
  std::uint64_t seed = 0;
};

struct ShiftBuildResult {
  Matrix shift;
  std::vector<std::string> warnings;
};

/// Item-item similarity from Pearson correlation of co-rated columns over
/// the user subset (pairs with < 2 co-ratings get similarity 0). Negatives
/// clamped, top-k per row, max-symmetrized, zero diagonal, then spectral
/// normalization when requested.
ShiftBuildResult rating_similarity_shift(const RatingsTable& table,
                                         const std::vector<int>& user_subset,
                                         const MultigraphSpec& spec);

/// Cosine similarity of item feature vectors, same sparsify/normalize path.
ShiftBuildResult feature_similarity_shift(const RatingsTable& table,
                                          const MultigraphSpec& spec);

struct EstimatedShifts {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  ShiftSet shifts;     // re-estimated rating shift + unchanged feature shift
  double deviation = 0.0;  // ||S - S~||_2 of the rating shift
  bool skipped = false;
  std::string warning;
};

/// Shift-estimation stability protocol: for every (fraction, seed) pair the
/// rating-similarity shift is recomputed from a random user subset of that
/// size drawn from base_subset; the feature shift is left untouched.
/// fraction 1.0 reuses base_subset verbatim, so the result is exact.
std::vector<EstimatedShifts> estimation_protocol(const RatingsTable& table,
                                                 const std::vector<int>& base_subset,
                                                 const ShiftSet& baseline,
                                                 const std::vector<double>& fractions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const MultigraphSpec& spec);

/// Rank-3 planted ratings matrix plus Gaussian noise, a 30% i.i.d. missing
/// mask, and item features equal to the true latent item factors plus noise.
RatingsTable synthesize_dataset(int num_items, int num_users, double noise,
                                std::uint64_t seed);

/// Long-format ratings CSV with header `user_id,item_id,rating`; ids become
/// dense indices in first-seen order. Feature CSV header `item_id,f0,f1,...`.
RatingsTable load_ratings_csv(const std::string& ratings_path,
                              const std::string& features_path = "");
void save_ratings_csv(const std::string& ratings_path, const RatingsTable& table);

}  // namespace ncasp

#endif  // NCASP_DATAIO_HPP
