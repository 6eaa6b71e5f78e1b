#include "experiment.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "ncasp/rng.hpp"

namespace ncasp::tools {

namespace {

std::vector<double> parse_fraction_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

struct SplitData {
  std::vector<int> train_users;
  std::vector<int> test_users;
  std::vector<int> shift_users;  // the 90% of train users that build the shifts
};

SplitData split_users(const RatingsTable& table, const ExperimentSettings& s,
                      std::uint64_t split_seed) {
  std::vector<int> users(static_cast<std::size_t>(table.num_users()));
  std::iota(users.begin(), users.end(), 0);
  Rng rng(Rng::mix(split_seed, 0x5011));
  rng.shuffle(users);

  const auto test_count = static_cast<std::size_t>(
      std::lround(s.test_fraction * static_cast<double>(users.size())));
  SplitData split;
  split.test_users.assign(users.begin(), users.begin() + static_cast<std::ptrdiff_t>(test_count));
  split.train_users.assign(users.begin() + static_cast<std::ptrdiff_t>(test_count), users.end());

  const auto shift_count = static_cast<std::size_t>(
      std::lround(s.train_shift_fraction * static_cast<double>(split.train_users.size())));
  split.shift_users.assign(split.train_users.begin(),
                           split.train_users.begin() +
                               static_cast<std::ptrdiff_t>(
                                   std::min(shift_count, split.train_users.size())));
  std::sort(split.shift_users.begin(), split.shift_users.end());
  return split;
}

// A sample per user with an observed target rating: the input is the user's
// rating row with unobserved entries and the target item zeroed.
std::vector<TrainSample> make_samples(const RatingsTable& table, const std::vector<int>& users,
                                      int target_item) {
  std::vector<TrainSample> out;
  for (int u : users) {
    if (!table.observed(u, target_item)) continue;
    Vector x = Vector::Zero(table.num_items());
    for (int i = 0; i < table.num_items(); ++i) {
      if (i != target_item && table.observed(u, i)) x(i) = table.values(u, i);
    }
    Vector y(1);
    y << table.values(u, target_item);
    out.push_back({std::move(x), std::move(y)});
  }
  return out;
}

ShiftSet build_baseline_shifts(const RatingsTable& table, const std::vector<int>& shift_users,
                               const ExperimentSettings& s,
                               std::vector<std::string>* warnings) {
  MultigraphSpec spec;
  spec.top_k = s.top_k;
  const ShiftBuildResult rating = rating_similarity_shift(table, shift_users, spec);
  const ShiftBuildResult feature = feature_similarity_shift(table, spec);
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), rating.warnings.begin(), rating.warnings.end());
    warnings->insert(warnings->end(), feature.warnings.begin(), feature.warnings.end());
  }
  return ShiftSet(table.num_items(), {rating.shift, feature.shift});
}

TrainConfig train_config_for(Architecture arch, const ExperimentSettings& s,
                             std::uint64_t train_seed) {
  TrainConfig cfg;
  cfg.epochs = s.epochs;
  cfg.learning_rate = s.learning_rate;
  cfg.batch_size = s.batch_size;
  cfg.il_weight = arch == Architecture::mgnn_il ? s.il_weight : 0.0;
  cfg.seed = train_seed;
  cfg.optimizer = Optimizer::adam;
  return cfg;
}

}  // namespace

Architecture architecture_from_string(const std::string& s) {
  if (s == "mfilter") return Architecture::mfilter;
  if (s == "mgnn") return Architecture::mgnn;
  if (s == "mgnn_il") return Architecture::mgnn_il;
  throw std::invalid_argument("unknown architecture '" + s +
                              "' (expected mfilter|mgnn|mgnn_il)");
}

std::string to_string(Architecture a) {
  switch (a) {
    case Architecture::mfilter:
      return "mfilter";
    case Architecture::mgnn:
      return "mgnn";
    case Architecture::mgnn_il:
      return "mgnn_il";
  }
  return "?";
}

void declare_experiment_keys(RunConfig& config) {
  config.declare("ratings_csv", "");
  config.declare("features_csv", "");
  config.declare("synth_items", "60");
  config.declare("synth_users", "400");
  config.declare("synth_noise", "0.1");
  config.declare("synth_seed", "7");
  config.declare("target_item", "0");
  config.declare("test_fraction", "0.25");
  config.declare("train_shift_fraction", "0.9");
  config.declare("top_k", "20");
  config.declare("taps", "3");
  config.declare("taps_mode", "degree");
  config.declare("epochs", "40");
  config.declare("learning_rate", "0.01");
  config.declare("batch_size", "16");
  config.declare("il_weight", "0.05");
  config.declare("fractions", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0");
  config.declare("num_seeds", "5");
  config.declare("seed", "1");
  config.declare("arch", "mgnn");  // used by `train` only
}

ExperimentSettings settings_from_config(const RunConfig& config) {
  ExperimentSettings s;
  s.ratings_csv = config.path("ratings_csv");
  s.features_csv = config.path("features_csv");
  s.synth_items = static_cast<int>(config.integer("synth_items"));
  s.synth_users = static_cast<int>(config.integer("synth_users"));
  s.synth_noise = config.real("synth_noise");
  s.synth_seed = config.seed("synth_seed");
  s.target_item = static_cast<int>(config.integer("target_item"));
  s.test_fraction = config.real("test_fraction");
  s.train_shift_fraction = config.real("train_shift_fraction");
  s.top_k = static_cast<int>(config.integer("top_k"));
  s.taps = static_cast<int>(config.integer("taps"));
  s.taps_mode = config.str("taps_mode");
  s.epochs = static_cast<int>(config.integer("epochs"));
  s.learning_rate = config.real("learning_rate");
  s.batch_size = static_cast<int>(config.integer("batch_size"));
  s.il_weight = config.real("il_weight");
  s.fractions = parse_fraction_list(config.str("fractions"));
  s.num_seeds = static_cast<int>(config.integer("num_seeds"));
  s.seed = config.seed("seed");
  return s;
}

AlgNN build_architecture(Architecture arch, std::shared_ptr<const ShiftSet> shifts,
                         const ExperimentSettings& settings) {
  const int n = shifts->dim();
  const int max_degree = std::max(0, settings.taps - 1);
  std::vector<Word> words =
      settings.taps_mode == "path"
          ? power_words_up_to_degree(shifts->num_generators(), max_degree)
          : words_up_to_degree(shifts->num_generators(), max_degree);
  const Nonlinearity nl =
      arch == Architecture::mfilter ? Nonlinearity::identity : Nonlinearity::relu;
  const double radius = std::max(shifts->max_shift_norm(), 1e-12);

  AlgNN net;
  net.layers.emplace_back(shifts, std::move(words), 1, 1, nl, Matrix::Identity(n, n), radius);
  net.readout_weight = Matrix(1, n);
  net.readout_bias = Vector(1);
  return net;
}

SingleRun run_single_training(const RatingsTable& table, Architecture arch,
                              const ExperimentSettings& settings, std::uint64_t split_seed) {
  const SplitData split = split_users(table, settings, split_seed);
  std::vector<std::string> warnings;
  auto shifts = std::make_shared<ShiftSet>(
      build_baseline_shifts(table, split.shift_users, settings, &warnings));

  const auto train_set = make_samples(table, split.train_users, settings.target_item);
  const auto test_set = make_samples(table, split.test_users, settings.target_item);
  if (train_set.empty() || test_set.empty()) {
    throw std::invalid_argument("target item has too few observed ratings for this split");
  }

  SingleRun run;
  run.train_seed = Rng::mix(split_seed, static_cast<std::uint64_t>(arch) + 101);
  AlgNN net = build_architecture(arch, shifts, settings);
  initialize_parameters(net, run.train_seed);
  TrainResult trained = train(std::move(net), train_set,
                              train_config_for(arch, settings, run.train_seed));
  run.rmse_train = evaluate_rmse(trained.net, train_set);
  run.rmse_test = evaluate_rmse(trained.net, test_set);
  run.history = std::move(trained.history);
  run.net = std::move(trained.net);
  run.shifts = shifts;
  return run;
}

ExperimentResult run_experiment(const RatingsTable& table, const ExperimentSettings& settings) {
  ExperimentResult result;
  MultigraphSpec spec;
  spec.top_k = settings.top_k;

  for (int si = 0; si < settings.num_seeds; ++si) {
    const std::uint64_t split_seed = Rng::mix(settings.seed, static_cast<std::uint64_t>(si));
    const SplitData split = split_users(table, settings, split_seed);
    auto shifts = std::make_shared<ShiftSet>(
        build_baseline_shifts(table, split.shift_users, settings, &result.warnings));

    const auto train_set = make_samples(table, split.train_users, settings.target_item);
    const auto test_set = make_samples(table, split.test_users, settings.target_item);
    if (train_set.empty() || test_set.empty()) {
      result.warnings.push_back("seed " + std::to_string(si) +
                                ": no usable samples, split skipped");
      continue;
    }

    const auto estimates = estimation_protocol(table, split.shift_users, *shifts,
                                               settings.fractions, {split_seed}, spec);

    for (Architecture arch :
         {Architecture::mfilter, Architecture::mgnn, Architecture::mgnn_il}) {
      const std::uint64_t train_seed =
          Rng::mix(split_seed, static_cast<std::uint64_t>(arch) + 101);
      AlgNN net = build_architecture(arch, shifts, settings);
      initialize_parameters(net, train_seed);
      const TrainResult trained =
          train(std::move(net), train_set, train_config_for(arch, settings, train_seed));

      const double rmse_train = evaluate_rmse(trained.net, test_set);
      for (const EstimatedShifts& est : estimates) {
        if (est.skipped) {
          result.warnings.push_back("seed " + std::to_string(si) + " fraction " +
                                    format_double(est.fraction) + ": " + est.warning);
          continue;
        }
        const std::vector<ShiftSet> override_shifts{est.shifts};
        const double rmse_eval = evaluate_rmse(trained.net, test_set, &override_shifts);
        result.rows.push_back({arch, est.fraction, static_cast<std::uint64_t>(si), rmse_train,
                               rmse_eval, rmse_eval - rmse_train});
      }
    }
  }
  return result;
}

void write_results_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "arch,fraction,seed,rmse_train,rmse_eval,delta\n";
  for (const ExperimentRow& row : rows) {
    out << to_string(row.arch) << ',' << format_double(row.fraction) << ',' << row.seed << ','
        << format_double(row.rmse_train) << ',' << format_double(row.rmse_eval) << ','
        << format_double(row.delta) << '\n';
  }
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::map<Architecture, std::map<double, std::vector<double>>> abs_deltas_by_arch(
    const std::vector<ExperimentRow>& rows) {
  std::map<Architecture, std::map<double, std::vector<double>>> out;
  for (const ExperimentRow& row : rows) {
    out[row.arch][row.fraction].push_back(std::abs(row.delta));
  }
  return out;
}

}  // namespace

void write_medians_csv(const std::string& path, const std::vector<ExperimentRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "arch,fraction,median_abs_delta,min_abs_delta,max_abs_delta,count\n";
  for (const auto& [arch, by_fraction] : abs_deltas_by_arch(rows)) {
    for (const auto& [fraction, deltas] : by_fraction) {
      std::vector<double> sorted = deltas;
      std::sort(sorted.begin(), sorted.end());
      out << to_string(arch) << ',' << format_double(fraction) << ','
          << format_double(median_of(deltas)) << ',' << format_double(sorted.front()) << ','
          << format_double(sorted.back()) << ',' << sorted.size() << '\n';
    }
  }
}

void write_summary_json(const std::string& path, const std::vector<ExperimentRow>& rows,
                        const RunConfig& config, const std::string& toolkit_version) {
  auto median = median_of;

  nlohmann::ordered_json summary;
  summary["toolkit_version"] = toolkit_version;
  summary["config"] = config.resolved();
  summary["config_hash"] = config.content_hash();

  std::set<std::uint64_t> seeds;
  for (const ExperimentRow& row : rows) seeds.insert(row.seed);
  summary["seeds"] = seeds;

  nlohmann::ordered_json per_arch = nlohmann::ordered_json::object();
  for (Architecture arch :
       {Architecture::mfilter, Architecture::mgnn, Architecture::mgnn_il}) {
    std::map<double, std::vector<double>> by_fraction;
    for (const ExperimentRow& row : rows) {
      if (row.arch == arch) by_fraction[row.fraction].push_back(std::abs(row.delta));
    }
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& [fraction, deltas] : by_fraction) {
      std::vector<double> sorted = deltas;
      std::sort(sorted.begin(), sorted.end());
      nlohmann::ordered_json e;
      e["fraction"] = fraction;
      e["median_abs_delta"] = median(deltas);
      e["min_abs_delta"] = sorted.front();
      e["max_abs_delta"] = sorted.back();
      e["count"] = sorted.size();
      entries.push_back(e);
    }
    per_arch[to_string(arch)] = entries;
  }
  summary["architectures"] = per_arch;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << summary.dump(2) << '\n';
}

}  // namespace ncasp::tools
