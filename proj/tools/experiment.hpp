#ifndef NCASP_TOOLS_EXPERIMENT_HPP
#define NCASP_TOOLS_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ncasp/algnn.hpp"
#include "ncasp/dataio.hpp"
#include "run_config.hpp"

namespace ncasp::tools {

/// Architectures of the rating-prediction comparison: a learned linear
/// multigraph filter, a multigraph neural network, and its integral-
/// Lipschitz-penalized variant.
enum class Architecture { mfilter, mgnn, mgnn_il };

Architecture architecture_from_string(const std::string& s);
std::string to_string(Architecture a);

struct ExperimentSettings {
  // dataset
  std::string ratings_csv;   // empty -> synthetic
  std::string features_csv;
  int synth_items = 60;
  int synth_users = 400;
  double synth_noise = 0.1;
  std::uint64_t synth_seed = 7;
  int target_item = 0;
  double test_fraction = 0.25;
  double train_shift_fraction = 0.9;
  int top_k = 20;
  // architecture
  int taps = 3;
  std::string taps_mode = "degree";  // degree | path
  // training
  int epochs = 40;
  double learning_rate = 0.01;
  int batch_size = 16;
  double il_weight = 0.05;
  // protocol
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int num_seeds = 5;
  std::uint64_t seed = 1;
};

void declare_experiment_keys(RunConfig& config);
ExperimentSettings settings_from_config(const RunConfig& config);

struct ExperimentRow {
  Architecture arch;
  double fraction;
  std::uint64_t seed;
  double rmse_train;
  double rmse_eval;
  double delta;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> warnings;
};

/// One train/evaluate split for a single architecture; returns the trained
/// network and the RMSE of the unperturbed evaluation. Used by `train`.
struct SingleRun {
  AlgNN net;
  std::vector<EpochStats> history;
  double rmse_train = 0.0;
  double rmse_test = 0.0;
  std::uint64_t train_seed = 0;
  std::shared_ptr<const ShiftSet> shifts;
};

/// Builds the two-generator multigraph net for one architecture.
AlgNN build_architecture(Architecture arch, std::shared_ptr<const ShiftSet> shifts,
                         const ExperimentSettings& settings);

SingleRun run_single_training(const RatingsTable& table, Architecture arch,
                              const ExperimentSettings& settings, std::uint64_t split_seed);

/// Full protocol: per seed, split users, build shifts from 90% of the
/// training users, train the three architectures, then evaluate them across
/// the re-estimation fractions.
ExperimentResult run_experiment(const RatingsTable& table, const ExperimentSettings& settings);

/// results.csv with the exact column contract
/// `arch,fraction,seed,rmse_train,rmse_eval,delta`.
void write_results_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

/// medians.csv: per-architecture, per-fraction median and spread of |delta|
/// (plot-ready companion to results.csv).
void write_medians_csv(const std::string& path, const std::vector<ExperimentRow>& rows);

/// summary.json: per-architecture, per-fraction medians and spreads of
/// |delta| plus provenance (config echo, hash, seeds).
void write_summary_json(const std::string& path, const std::vector<ExperimentRow>& rows,
                        const RunConfig& config, const std::string& toolkit_version);

}  // namespace ncasp::tools

#endif  // NCASP_TOOLS_EXPERIMENT_HPP
