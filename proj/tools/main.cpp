#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ncasp/algnn.hpp"
#include "ncasp/dataio.hpp"
#include "ncasp/errors.hpp"
#include "ncasp/filter_ops.hpp"
#include "ncasp/lipschitz.hpp"
#include "ncasp/perturbation.hpp"
#include "ncasp/rng.hpp"
#include "ncasp/spectral.hpp"
#include "ncasp/stability.hpp"
#include "ncasp/version.hpp"
#include "experiment.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace ncasp;
using tools::RunConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitViolated = 4;
constexpr int kExitDiverged = 5;

std::vector<double> parse_epsilons(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::ordered_json provenance(const RunConfig& config) {
  nlohmann::ordered_json j;
  j["toolkit_version"] = kVersion;
  j["config"] = config.resolved();
  j["config_hash"] = config.content_hash();
  return j;
}

PerturbationModel load_perturbation_spec(const std::string& path, int dim,
                                         std::uint64_t seed_override, bool has_override,
                                         nlohmann::ordered_json* echo) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open perturbation spec: " + path);
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  const std::string kind = spec.value("kind", "mixed");
  const double magnitude = spec.value("magnitude", 0.05);
  const double delta_cap = spec.value("delta_cap", 2.0);
  const std::uint64_t seed =
      has_override ? seed_override : spec.value("seed", std::uint64_t{1});
  if (echo != nullptr) {
    (*echo)["kind"] = kind;
    (*echo)["magnitude"] = magnitude;
    (*echo)["delta_cap"] = delta_cap;
    (*echo)["seed"] = seed;
  }
  if (magnitude == 0.0) {
    // The null perturbation is a legal spec even though the sampler's
    // magnitude contract is (0, 0.5].
    return PerturbationModel{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim), 1.0};
  }
  return sample_perturbation(dim, perturbation_kind_from_string(kind), magnitude, delta_cap,
                             seed);
}

double auto_radius(const ShiftSet& shifts, const PerturbationModel& perturbation,
                   double eps_max) {
  double radius = shifts.max_shift_norm();
  const ShiftSet perturbed = perturb_shifts(shifts, perturbation.scaled(eps_max));
  radius = std::max(radius, perturbed.max_shift_norm());
  return radius * (1.0 + 1e-9);
}

void write_stability_jsonl(const std::string& path, const StabilityReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const StabilityProbe& probe : report.probes) {
    nlohmann::ordered_json line;
    line["epsilon"] = probe.epsilon;
    line["lhs"] = probe.lhs;
    line["rhs_first_order"] = probe.rhs;
    line["residual"] = probe.residual;
    out << line.dump() << '\n';
  }
  nlohmann::ordered_json summary;
  summary["c2_fit"] = report.quadratic_slack;
  summary["verdict"] = to_string(report.verdict);
  summary["constants"] = {{"m", report.constants.m},       {"delta", report.constants.delta},
                          {"L0", report.constants.l0},     {"L1", report.constants.l1},
                          {"sup_T", report.constants.sup_t}, {"sup_DT", report.constants.sup_dt}};
  summary["rhs_slope"] = report.rhs_slope;
  summary["max_ratio"] = report.max_ratio;
  out << summary.dump() << '\n';
}

int verdict_exit_code(const StabilityReport& report) {
  switch (report.verdict) {
    case StabilityVerdict::bounded:
      return kExitOk;
    case StabilityVerdict::violated:
      return kExitViolated;
    case StabilityVerdict::inconclusive:
      return kExitNonConvergence;
  }
  return kExitNonConvergence;
}

int cmd_spectra(const std::string& shifts_dir, const std::string& out, double tol,
                double gap_tol, std::uint64_t seed) {
  ensure_out_dir(out);
  const ShiftSet shifts = load_shift_set(shifts_dir);
  JbdOptions opts;
  opts.tol = tol;
  opts.gap_tol = gap_tol;
  opts.seed = seed;
  const SpectralDecomposition d = joint_block_diagonalize(shifts, opts);

  const std::string basis_file = (fs::path(out) / "basis.csv").string();
  save_matrix_csv(basis_file, d.basis);

  RunConfig params;
  params.declare("shifts", shifts_dir);
  params.declare("tol", format_double(tol));
  params.declare("seed", std::to_string(seed));

  nlohmann::ordered_json report = provenance(params);
  std::vector<int> sizes;
  for (const BlockRange& b : d.blocks) sizes.push_back(b.size);
  report["block_sizes"] = sizes;
  report["offblock_residual"] = d.offblock_residual;
  report["basis_file"] = basis_file;
  write_json((fs::path(out) / "spectra.json").string(), report);

  std::cout << "blocks:";
  for (int s : sizes) std::cout << ' ' << s;
  std::cout << "\noffblock_residual: " << format_double(d.offblock_residual) << '\n';
  return kExitOk;
}

int cmd_filter(const std::string& filter_file, const std::string& shifts_dir,
               const std::string& signal_file, const std::string& out, bool streaming,
               bool dump_operator) {
  ensure_out_dir(out);
  const ShiftSet shifts = load_shift_set(shifts_dir);
  const NcPolynomial p = load_polynomial(filter_file, shifts.num_generators());
  const Matrix signal = load_matrix_csv(signal_file);
  if (signal.cols() != 1) {
    throw IoError(signal_file + ": a signal must be a single-column CSV");
  }

  Vector y;
  if (streaming) {
    y = apply_streaming(p, shifts, signal.col(0));
  } else {
    const FilterOperator f = instantiate(p, shifts);
    y = apply(f, signal.col(0));
    if (dump_operator) {
      save_matrix_csv((fs::path(out) / "operator.csv").string(), f.matrix);
    }
  }
  save_matrix_csv((fs::path(out) / "output.csv").string(), y);
  std::cout << "output written to " << (fs::path(out) / "output.csv").string() << '\n';
  return kExitOk;
}

int cmd_lip(const std::string& filter_file, double radius, int trials, std::uint64_t seed,
            std::uint32_t generators, const std::string& shifts_dir, bool at_blocks,
            const std::string& out) {
  ensure_out_dir(out);
  NcPolynomial p =
      generators > 0 ? load_polynomial(filter_file, generators) : load_polynomial(filter_file);
  if (!shifts_dir.empty() && generators == 0) {
    p = load_polynomial(filter_file, load_shift_set(shifts_dir).num_generators());
  }

  RunConfig params;
  params.declare("filter", filter_file);
  params.declare("radius", format_double(radius));
  params.declare("trials", std::to_string(trials));
  params.declare("seed", std::to_string(seed));
  params.declare("domain", at_blocks ? "spectral_blocks" : "ball");

  double effective_radius = radius;
  LipschitzCertificate empirical;
  if (at_blocks) {
    if (shifts_dir.empty()) throw IoError("--at-blocks needs --shifts");
    const ShiftSet shifts = load_shift_set(shifts_dir);
    const SpectralDecomposition d = joint_block_diagonalize(shifts);
    empirical = block_certificate(p, d, trials, seed);
    effective_radius = std::max(empirical.radius, 1e-12);
  } else {
    empirical = empirical_certificate(p, radius, trials, seed);
  }
  const LipschitzCertificate analytic = analytic_certificate(p, effective_radius);

  nlohmann::ordered_json report = provenance(params);
  report["radius"] = effective_radius;
  report["domain"] = at_blocks ? "spectral_blocks" : "ball";
  report["l0_analytic"] = analytic.l0_bound;
  report["l1_analytic"] = analytic.l1_bounds;
  report["l0_empirical"] = empirical.l0_bound;
  report["l1_empirical"] = empirical.l1_bounds;
  report["trials"] = trials;
  report["seed"] = seed;
  write_json((fs::path(out) / "certificate.json").string(), report);

  std::cout << "L0 analytic " << format_double(analytic.l0_bound) << ", empirical "
            << format_double(empirical.l0_bound) << '\n';
  return kExitOk;
}

int cmd_perturb(int dim, const std::string& spec_file, const std::string& kind,
                double magnitude, double delta_cap, std::uint64_t seed, bool seed_given,
                const std::string& out) {
  ensure_out_dir(out);
  nlohmann::ordered_json echo;
  PerturbationModel model;
  if (!spec_file.empty()) {
    model = load_perturbation_spec(spec_file, dim, seed, seed_given, &echo);
  } else {
    model = sample_perturbation(dim, perturbation_kind_from_string(kind), magnitude,
                                delta_cap, seed);
    echo["kind"] = kind;
    echo["magnitude"] = magnitude;
    echo["delta_cap"] = delta_cap;
    echo["seed"] = seed;
  }
  for (const std::string& w : validate(model)) std::cerr << "warning: " << w << '\n';

  save_matrix_csv((fs::path(out) / "t0.csv").string(), model.t0);
  save_matrix_csv((fs::path(out) / "t1.csv").string(), model.t1);

  RunConfig params;
  params.declare("dim", std::to_string(dim));
  params.declare("spec", echo.dump());
  nlohmann::ordered_json report = provenance(params);
  report["kind"] = echo["kind"];
  report["magnitude"] = echo["magnitude"];
  report["delta_cap"] = echo["delta_cap"];
  report["seed"] = echo["seed"];
  report["delta"] = model.delta;
  write_json((fs::path(out) / "perturbation.json").string(), report);

  std::cout << "realized delta " << format_double(model.delta) << '\n';
  return kExitOk;
}

int cmd_verify(const std::string& filter_file, const std::string& shifts_dir,
               const std::string& spec_file, const std::string& epsilons_csv,
               const std::string& x_mode, double radius, std::uint64_t seed, bool seed_given,
               const std::string& out) {
  ensure_out_dir(out);
  const ShiftSet shifts = load_shift_set(shifts_dir);
  const NcPolynomial p = load_polynomial(filter_file, shifts.num_generators());
  const std::vector<double> epsilons = parse_epsilons(epsilons_csv);

  nlohmann::ordered_json spec_echo;
  const PerturbationModel perturbation =
      load_perturbation_spec(spec_file, shifts.dim(), seed, seed_given, &spec_echo);

  Vector x;
  if (x_mode == "adversarial") {
    x = adversarial_signal(
        p, shifts, perturb_shifts(shifts, perturbation.scaled(epsilons.front())));
  } else {
    Rng rng(seed_given ? seed : 0x51D);
    x = Vector(shifts.dim());
    for (int i = 0; i < shifts.dim(); ++i) x(i) = rng.gaussian();
    x.normalize();
  }

  const double effective_radius =
      radius > 0.0 ? radius : auto_radius(shifts, perturbation, epsilons.front());
  const StabilityReport report =
      verify_filter_stability(p, shifts, perturbation, x, epsilons, effective_radius);
  write_stability_jsonl((fs::path(out) / "verify.jsonl").string(), report);

  std::cout << "verdict: " << to_string(report.verdict) << " (max lhs/rhs "
            << format_double(report.max_ratio) << ")\n";
  return verdict_exit_code(report);
}

int cmd_verify_net(const std::string& model_dir, const std::vector<std::string>& shift_dirs,
                   const std::string& spec_file, const std::string& epsilons_csv,
                   std::uint64_t seed, bool seed_given, const std::string& out) {
  ensure_out_dir(out);
  if (shift_dirs.empty()) throw IoError("verify-net needs at least one --shifts directory");

  // Peek at the manifest for the layer count, then assign shift dirs:
  // one shared directory or one per layer.
  std::ifstream manifest_in(fs::path(model_dir) / "model.json");
  if (!manifest_in) throw IoError("cannot open " + model_dir + "/model.json");
  nlohmann::json manifest;
  manifest_in >> manifest;
  const auto num_layers = manifest.at("num_layers").get<std::size_t>();

  std::vector<std::shared_ptr<const ShiftSet>> shifts;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::string& dir =
        shift_dirs.size() == 1 ? shift_dirs.front() : shift_dirs.at(l);
    shifts.push_back(std::make_shared<ShiftSet>(load_shift_set(dir)));
  }
  const AlgNN net = load_model(model_dir, shifts);

  std::vector<PerturbationModel> perturbations;
  for (std::size_t l = 0; l < num_layers; ++l) {
    nlohmann::ordered_json echo;
    perturbations.push_back(load_perturbation_spec(
        spec_file, net.layers[l].dim_in(),
        Rng::mix(seed_given ? seed : 1, l), true, &echo));
  }

  Rng rng(seed_given ? seed : 0x51D);
  std::vector<Vector> features;
  for (int g = 0; g < net.input_features(); ++g) {
    Vector x(net.input_dim());
    for (int i = 0; i < net.input_dim(); ++i) x(i) = rng.gaussian();
    x.normalize();
    features.push_back(std::move(x));
  }

  const StabilityReport report = verify_network_stability(
      net, perturbations, features, parse_epsilons(epsilons_csv));
  write_stability_jsonl((fs::path(out) / "verify_net.jsonl").string(), report);

  std::cout << "verdict: " << to_string(report.verdict) << '\n';
  return verdict_exit_code(report);
}

RatingsTable load_experiment_table(const tools::ExperimentSettings& settings) {
  if (!settings.ratings_csv.empty()) {
    return load_ratings_csv(settings.ratings_csv, settings.features_csv);
  }
  return synthesize_dataset(settings.synth_items, settings.synth_users, settings.synth_noise,
                            settings.synth_seed);
}

int cmd_train(const RunConfig& config, const std::string& out) {
  ensure_out_dir(out);
  const tools::ExperimentSettings settings = tools::settings_from_config(config);
  const tools::Architecture arch = tools::architecture_from_string(config.str("arch"));
  const RatingsTable table = load_experiment_table(settings);

  const tools::SingleRun run =
      tools::run_single_training(table, arch, settings, settings.seed);
  save_model((fs::path(out) / "model").string(), run.net, run.train_seed);
  save_shift_set((fs::path(out) / "shifts").string(), *run.shifts);

  nlohmann::ordered_json report = provenance(config);
  report["architecture"] = tools::to_string(arch);
  report["rmse_train"] = run.rmse_train;
  report["rmse_test"] = run.rmse_test;
  report["train_seed"] = run.train_seed;
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  for (const EpochStats& e : run.history) {
    history.push_back({{"mse", e.mse}, {"penalty", e.penalty}});
  }
  report["history"] = history;
  write_json((fs::path(out) / "train_report.json").string(), report);

  std::cout << "rmse_train " << format_double(run.rmse_train) << ", rmse_test "
            << format_double(run.rmse_test) << '\n';
  return kExitOk;
}

int cmd_experiment(const RunConfig& config, const std::string& out) {
  ensure_out_dir(out);
  const tools::ExperimentSettings settings = tools::settings_from_config(config);
  const RatingsTable table = load_experiment_table(settings);

  const tools::ExperimentResult result = tools::run_experiment(table, settings);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';

  tools::write_results_csv((fs::path(out) / "results.csv").string(), result.rows);
  tools::write_medians_csv((fs::path(out) / "medians.csv").string(), result.rows);
  tools::write_summary_json((fs::path(out) / "summary.json").string(), result.rows, config,
                            kVersion);
  std::cout << "wrote " << result.rows.size() << " rows to "
            << (fs::path(out) / "results.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-commutative convolutional signal model toolkit"};
  app.require_subcommand(1);

  // spectra
  auto* spectra = app.add_subcommand("spectra", "joint block diagonalization of a shift set");
  std::string sp_shifts, sp_out = "out";
  double sp_tol = 1e-8, sp_gap_tol = 1e-10;
  std::uint64_t sp_seed = 0xA15E;
  spectra->add_option("--shifts", sp_shifts, "shift set directory")->required();
  spectra->add_option("--out", sp_out, "output directory");
  spectra->add_option("--tol", sp_tol, "off-block residual tolerance");
  spectra->add_option("--gap-tol", sp_gap_tol, "null-space rank stability threshold");
  spectra->add_option("--seed", sp_seed, "seed for the random commutant element");

  // filter
  auto* filter = app.add_subcommand("filter", "instantiate a filter and apply it to a signal");
  std::string fl_filter, fl_shifts, fl_signal, fl_out = "out";
  bool fl_streaming = false, fl_dump_operator = false;
  filter->add_option("--filter", fl_filter, "polynomial text file")->required();
  filter->add_option("--shifts", fl_shifts, "shift set directory")->required();
  filter->add_option("--signal", fl_signal, "signal CSV (single column)")->required();
  filter->add_option("--out", fl_out, "output directory");
  filter->add_flag("--streaming", fl_streaming, "avoid materializing the operator");
  filter->add_flag("--dump-operator", fl_dump_operator, "also write operator.csv");

  // lip
  auto* lip = app.add_subcommand("lip", "Lipschitz certificates for a filter");
  std::string lp_filter, lp_shifts, lp_out = "out";
  double lp_radius = 1.0;
  int lp_trials = 200;
  std::uint64_t lp_seed = 1;
  std::uint32_t lp_generators = 0;
  bool lp_at_blocks = false;
  lip->add_option("--filter", lp_filter, "polynomial text file")->required();
  lip->add_option("--radius", lp_radius, "norm-ball radius B");
  lip->add_option("--trials", lp_trials, "empirical estimator trials");
  lip->add_option("--seed", lp_seed, "empirical estimator seed");
  lip->add_option("--generators", lp_generators, "generator count (0 = infer)");
  lip->add_option("--shifts", lp_shifts, "shift set directory (for --at-blocks)");
  lip->add_flag("--at-blocks", lp_at_blocks,
                "estimate at the realized block frequencies instead of the ball");
  lip->add_option("--out", lp_out, "output directory");

  // perturb
  auto* perturb = app.add_subcommand("perturb", "sample and dump a perturbation model");
  std::string pb_spec, pb_kind = "mixed", pb_out = "out";
  int pb_dim = 0;
  double pb_magnitude = 0.05, pb_delta_cap = 2.0;
  std::uint64_t pb_seed = 1;
  perturb->add_option("--dim", pb_dim, "operator dimension")->required();
  perturb->add_option("--spec", pb_spec, "perturbation spec JSON");
  perturb->add_option("--kind", pb_kind, "absolute|relative|mixed");
  perturb->add_option("--magnitude", pb_magnitude, "spectral norm of the sampled matrices");
  perturb->add_option("--delta-cap", pb_delta_cap, "cap on ||T||_F / ||T||_2");
  auto* pb_seed_opt = perturb->add_option("--seed", pb_seed, "sampling seed");
  perturb->add_option("--out", pb_out, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "epsilon-sweep check of the filter bound");
  std::string vf_filter, vf_shifts, vf_spec, vf_out = "out";
  std::string vf_epsilons = "1e-1,3e-2,1e-2,3e-3,1e-3";
  std::string vf_x_mode = "random";
  double vf_radius = 0.0;
  std::uint64_t vf_seed = 1;
  verify->add_option("--filter", vf_filter, "polynomial text file")->required();
  verify->add_option("--shifts", vf_shifts, "shift set directory")->required();
  verify->add_option("--perturbation", vf_spec, "perturbation spec JSON")->required();
  verify->add_option("--epsilons", vf_epsilons, "descending sweep, comma separated");
  verify->add_option("--x-mode", vf_x_mode, "random|adversarial");
  verify->add_option("--radius", vf_radius, "certificate radius (0 = auto)");
  auto* vf_seed_opt = verify->add_option("--seed", vf_seed, "seed");
  verify->add_option("--out", vf_out, "output directory");

  // verify-net
  auto* verify_net = app.add_subcommand("verify-net", "epsilon-sweep check of the network bound");
  std::string vn_model, vn_spec, vn_out = "out";
  std::string vn_epsilons = "1e-1,3e-2,1e-2,3e-3,1e-3";
  std::vector<std::string> vn_shifts;
  std::uint64_t vn_seed = 1;
  verify_net->add_option("--model", vn_model, "checkpoint directory")->required();
  verify_net->add_option("--shifts", vn_shifts,
                         "shift set directory (repeat for per-layer sets)")
      ->required();
  verify_net->add_option("--perturbation", vn_spec, "perturbation spec JSON")->required();
  verify_net->add_option("--epsilons", vn_epsilons, "descending sweep, comma separated");
  auto* vn_seed_opt = verify_net->add_option("--seed", vn_seed, "seed");
  verify_net->add_option("--out", vn_out, "output directory");

  // train / experiment
  auto* train_cmd = app.add_subcommand("train", "train one architecture");
  auto* experiment_cmd =
      app.add_subcommand("experiment", "full RMSE-delta comparison across architectures");
  std::string tr_config, tr_out = "out", ex_config, ex_out = "out";
  std::vector<std::string> tr_sets, ex_sets;
  train_cmd->add_option("--config", tr_config, "JSON config file");
  train_cmd->add_option("--set", tr_sets, "override: key=value")->expected(-1);
  train_cmd->add_option("--out", tr_out, "output directory");
  experiment_cmd->add_option("--config", ex_config, "JSON config file");
  experiment_cmd->add_option("--set", ex_sets, "override: key=value")->expected(-1);
  experiment_cmd->add_option("--out", ex_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (spectra->parsed()) return cmd_spectra(sp_shifts, sp_out, sp_tol, sp_gap_tol, sp_seed);
    if (filter->parsed()) {
      return cmd_filter(fl_filter, fl_shifts, fl_signal, fl_out, fl_streaming,
                        fl_dump_operator);
    }
    if (lip->parsed()) {
      return cmd_lip(lp_filter, lp_radius, lp_trials, lp_seed, lp_generators,
                     lp_shifts, lp_at_blocks, lp_out);
    }
    if (perturb->parsed()) {
      return cmd_perturb(pb_dim, pb_spec, pb_kind, pb_magnitude, pb_delta_cap, pb_seed,
                         pb_seed_opt->count() > 0, pb_out);
    }
    if (verify->parsed()) {
      return cmd_verify(vf_filter, vf_shifts, vf_spec, vf_epsilons, vf_x_mode, vf_radius,
                        vf_seed, vf_seed_opt->count() > 0, vf_out);
    }
    if (verify_net->parsed()) {
      return cmd_verify_net(vn_model, vn_shifts, vn_spec, vn_epsilons, vn_seed,
                            vn_seed_opt->count() > 0, vn_out);
    }
    if (train_cmd->parsed() || experiment_cmd->parsed()) {
      const bool is_train = train_cmd->parsed();
      RunConfig config;
      tools::declare_experiment_keys(config);
      const std::string& cfg_path = is_train ? tr_config : ex_config;
      if (!cfg_path.empty()) config.load_file(cfg_path);
      for (const std::string& kv : is_train ? tr_sets : ex_sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw IoError("--set expects key=value, got '" + kv + "'");
        config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      return is_train ? cmd_train(config, tr_out) : cmd_experiment(config, ex_out);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
