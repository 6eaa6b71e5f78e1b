// Acceptance suite: every release-gating property of the toolkit, one
// pass/fail line each, with wall-clock budgets. Run via ctest or directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ncasp/algnn.hpp"
#include "ncasp/dataio.hpp"
#include "ncasp/filter_ops.hpp"
#include "ncasp/lipschitz.hpp"
#include "ncasp/perturbation.hpp"
#include "ncasp/rng.hpp"
#include "ncasp/spectral.hpp"
#include "ncasp/stability.hpp"

namespace fs = std::filesystem;
using namespace ncasp;

namespace {

struct Criterion {
  int number;
  std::string description;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

Matrix random_matrix(int n, Rng& rng) {
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m(r, c) = rng.gaussian();
  }
  return m;
}

Matrix random_symmetric(int n, Rng& rng) {
  const Matrix g = random_matrix(n, rng);
  return 0.5 * (g + g.transpose());
}

Matrix random_orthogonal(int n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, rng));
  return qr.householderQ();
}

ShiftSet random_shift_set(int n, std::uint32_t m, Rng& rng) {
  std::vector<Matrix> shifts;
  for (std::uint32_t i = 0; i < m; ++i) {
    Matrix s = random_symmetric(n, rng);
    const double norm = spectral_norm(s);
    if (norm > 0.0) s /= norm;
    shifts.push_back(std::move(s));
  }
  return ShiftSet(n, std::move(shifts));
}

NcPolynomial random_polynomial(std::uint32_t m, int max_degree, int terms, Rng& rng) {
  NcPolynomial::TermMap map;
  for (int t = 0; t < terms; ++t) {
    const int deg = static_cast<int>(rng.index(static_cast<std::uint64_t>(max_degree + 1)));
    Word w;
    for (int j = 0; j < deg; ++j) w.push_back(static_cast<std::uint32_t>(rng.index(m)));
    double c = rng.gaussian();
    if (c == 0.0) c = 1.0;
    map[w] += c;
  }
  return NcPolynomial(m, std::move(map));
}

Vector random_vector(int n, Rng& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

// ---------------------------------------------------------------------------
// 1. Homomorphism property of rho.
bool criterion_homomorphism(std::string& detail) {
  Rng rng(0xAC01);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(11));           // n <= 12
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));  // m <= 3
    const ShiftSet s = random_shift_set(n, m, rng);
    const NcPolynomial p = random_polynomial(m, 4, 5, rng);
    const NcPolynomial q = random_polynomial(m, 4, 5, rng);

    const Matrix lhs = instantiate(multiply(p, q), s).matrix;
    const Matrix rhs = instantiate(p, s).matrix * instantiate(q, s).matrix;
    const double rel = (lhs - rhs).norm() / std::max(lhs.norm(), 1e-300);
    worst = std::max(worst, rel);
  }
  detail = "max relative Frobenius error " + format_double(worst);
  return worst <= 1e-10;
}

// 2. Streaming application agrees with dense instantiation.
bool criterion_streaming(std::string& detail) {
  Rng rng(0xAC02);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(15));           // n <= 16
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));
    const ShiftSet s = random_shift_set(n, m, rng);
    const NcPolynomial p = random_polynomial(m, 4, 6, rng);
    const Vector x = random_vector(n, rng);

    const Vector dense = apply(instantiate(p, s), x);
    const Vector streamed = apply_streaming(p, s, x);
    worst = std::max(worst, (dense - streamed).norm() / std::max(dense.norm(), 1e-300));
  }
  detail = "max relative error " + format_double(worst);
  return worst <= 1e-10;
}

// 3. Joint block diagonalization recovers planted block structures.
bool criterion_jbd(std::string& detail) {
  Rng rng(0xAC03);
  double worst_residual = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> sizes;
    int n = 0;
    const int pieces = 2 + static_cast<int>(rng.index(5));
    for (int i = 0; i < pieces && n < 21; ++i) {
      const int size = 1 + static_cast<int>(rng.index(3));  // blocks from {1,2,3}
      sizes.push_back(size);
      n += size;
    }
    const Matrix q = random_orthogonal(n, rng);
    std::vector<Matrix> shifts;
    for (int g = 0; g < 2; ++g) {
      Matrix s = Matrix::Zero(n, n);
      int offset = 0;
      for (int size : sizes) {
        s.block(offset, offset, size, size) = random_symmetric(size, rng);
        offset += size;
      }
      shifts.push_back(q * s * q.transpose());
    }

    const SpectralDecomposition d = joint_block_diagonalize(ShiftSet(n, shifts));
    worst_residual = std::max(worst_residual, d.offblock_residual);

    std::vector<int> got;
    for (const BlockRange& b : d.blocks) got.push_back(b.size);
    std::vector<int> want = sizes;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) {
      detail = "trial " + std::to_string(trial) + ": block multiset mismatch";
      return false;
    }
  }
  detail = "worst off-block residual " + format_double(worst_residual);
  return worst_residual <= 1e-8;
}

// 4. Filtering commutes with the Fourier transform blockwise.
bool criterion_fourier_commutation(std::string& detail) {
  Rng rng(0xAC04);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> sizes{1 + static_cast<int>(rng.index(3)),
                           1 + static_cast<int>(rng.index(3)),
                           1 + static_cast<int>(rng.index(3))};
    int n = 0;
    for (int s : sizes) n += s;
    const Matrix q = random_orthogonal(n, rng);
    std::vector<Matrix> shifts;
    for (int g = 0; g < 2; ++g) {
      Matrix s = Matrix::Zero(n, n);
      int offset = 0;
      for (int size : sizes) {
        s.block(offset, offset, size, size) = random_symmetric(size, rng);
        offset += size;
      }
      shifts.push_back(q * s * q.transpose());
    }
    const ShiftSet shift_set(n, shifts);
    const SpectralDecomposition d = joint_block_diagonalize(shift_set);
    const NcPolynomial p = random_polynomial(2, 3, 5, rng);
    const Vector x = random_vector(n, rng);

    const Vector filtered = apply_streaming(p, shift_set, x);
    const auto filtered_hat = fourier_transform(filtered, d);
    const auto x_hat = fourier_transform(x, d);
    const auto responses = frequency_response(p, d);
    const double scale = std::max(filtered.norm(), 1e-300);
    for (std::size_t j = 0; j < d.blocks.size(); ++j) {
      worst = std::max(worst, (filtered_hat[j] - responses[j] * x_hat[j]).norm() / scale);
    }
  }
  detail = "max relative error " + format_double(worst);
  return worst <= 1e-8;
}

// 5. Empirical Lipschitz estimates never exceed the analytic certificates.
bool criterion_certificates(std::string& detail) {
  Rng rng(0xAC05);
  double worst_margin = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));
    const NcPolynomial p = random_polynomial(m, 3, 4, rng);
    const double radius = rng.uniform(0.5, 1.5);
    const std::uint64_t seed = 0x500 + static_cast<std::uint64_t>(trial);

    const double l0_emp = empirical_l0(p, radius, 200, seed);
    const double l0_ana = analytic_l0(p, radius);
    if (l0_emp > l0_ana * (1.0 + 1e-9) + 1e-12) {
      detail = "L0 violation at trial " + std::to_string(trial);
      return false;
    }
    if (l0_ana > 0.0) worst_margin = std::max(worst_margin, l0_emp / l0_ana);

    const auto l1_emp = empirical_l1(p, radius, 200, seed);
    const auto l1_ana = analytic_l1(p, radius);
    for (std::uint32_t i = 0; i < m; ++i) {
      if (l1_emp[i] > l1_ana[i] * (1.0 + 1e-9) + 1e-12) {
        detail = "L1 violation at trial " + std::to_string(trial);
        return false;
      }
    }
  }
  detail = "max empirical/analytic L0 ratio " + format_double(worst_margin);
  return true;
}

// 6. The first-order filter bound holds on an epsilon sweep, and the
//    linear witness shows it is not vacuous.
bool criterion_filter_bound(std::string& detail) {
  Rng rng(0xAC06);
  const std::vector<double> sweep{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(6));  // n <= 8
    const ShiftSet s = random_shift_set(n, 2, rng);
    const NcPolynomial p = random_polynomial(2, 3, 4, rng);
    const Vector x = random_vector(n, rng);
    const PerturbationModel pert = sample_perturbation(
        n, PerturbationKind::mixed, 0.2, 2.0, 0x600 + static_cast<std::uint64_t>(trial));
    const double radius = 1.0 + s.max_shift_norm();

    const StabilityReport report = verify_filter_stability(p, s, pert, x, sweep, radius);
    if (report.verdict != StabilityVerdict::bounded) {
      detail = "trial " + std::to_string(trial) + " verdict " + to_string(report.verdict);
      return false;
    }
  }

  // Non-vacuity witness: p = g1 with a rank-one absolute perturbation.
  const int n = 6;
  const ShiftSet s = random_shift_set(n, 1, rng);
  Matrix t0 = Matrix::Zero(n, n);
  t0(0, 0) = 1.0;
  const PerturbationModel pert{t0, Matrix::Zero(n, n), 1.0};
  const Vector x = random_vector(n, rng);
  const StabilityReport witness = verify_filter_stability(
      NcPolynomial::generator(1, 0), s, pert, x, sweep, 1.0 + s.max_shift_norm());
  detail = "witness lhs/rhs " + format_double(witness.max_ratio);
  return witness.verdict == StabilityVerdict::bounded && witness.max_ratio >= 0.01;
}

// 7. Network sweeps stay bounded; at unit constants the
//    single-layer network bound coincides with the layer bound.
bool criterion_network_bound(std::string& detail) {
  Rng rng(0xAC07);
  const std::vector<double> sweep{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng.index(4));
    auto shifts = std::make_shared<ShiftSet>(random_shift_set(n, 2, rng));
    const int layers = 2 + static_cast<int>(rng.index(2));

    AlgNN net;
    for (int l = 0; l < layers; ++l) {
      Layer layer = Layer::dense_template(shifts, 2, 1, 1, Nonlinearity::relu);
      layer.set_filter(0, 0, scale(random_polynomial(2, 2, 4, rng), 0.5));
      net.layers.push_back(std::move(layer));
    }
    net.readout_weight = Matrix::Identity(n, n);
    net.readout_bias = Vector::Zero(n);

    std::vector<PerturbationModel> perts;
    for (int l = 0; l < layers; ++l) {
      perts.push_back(sample_perturbation(
          n, PerturbationKind::mixed, 0.1, 2.0,
          0x700 + static_cast<std::uint64_t>(10 * trial + l)));
    }
    const std::vector<Vector> x{random_vector(n, rng)};
    const StabilityReport report = verify_network_stability(net, perts, x, sweep);
    if (report.verdict != StabilityVerdict::bounded) {
      detail = "trial " + std::to_string(trial) + " verdict " + to_string(report.verdict);
      return false;
    }
  }

  // Single layer with C = 1: the network bound must equal the layer bound.
  const int n = 5;
  auto shifts = std::make_shared<ShiftSet>(random_shift_set(n, 2, rng));
  Layer layer = Layer::dense_template(shifts, 2, 1, 1, Nonlinearity::relu);
  layer.set_filter(0, 0, random_polynomial(2, 2, 4, rng));
  AlgNN net;
  net.layers.push_back(std::move(layer));
  net.readout_weight = Matrix::Identity(n, n);
  net.readout_bias = Vector::Zero(n);
  const PerturbationModel pert =
      sample_perturbation(n, PerturbationKind::mixed, 0.1, 2.0, 0x777);
  const double network = network_deviation_bound(net, {pert}, 1.0);
  const double single_layer = layer_deviation_bound(net.layers[0], pert, 1.0);
  detail = "network vs layer bound " + format_double(network) + " / " +
           format_double(single_layer);
  return network == single_layer;
}

// 8. Reverse-mode gradients match central finite differences everywhere.
bool criterion_gradients(std::string& detail) {
  Rng rng(0xAC08);
  const int n = 8;
  auto shifts = std::make_shared<ShiftSet>(random_shift_set(n, 2, rng));
  AlgNN net;
  net.layers.push_back(Layer::dense_template(shifts, 2, 1, 2, Nonlinearity::tanh));
  net.layers.push_back(Layer::dense_template(shifts, 2, 2, 1, Nonlinearity::tanh));
  net.readout_weight = Matrix(1, n);
  net.readout_bias = Vector(1);
  initialize_parameters(net, 0xAC08);

  const std::vector<Vector> x{random_vector(n, rng)};
  const Vector target = random_vector(1, rng);
  const auto loss_of = [&]() {
    return 0.5 * (forward(net, x).output - target).squaredNorm();
  };

  const ForwardResult fwd = forward(net, x);
  Gradients grads = zero_gradients(net);
  backward(net, fwd, fwd.output - target, grads);

  const double h = 1e-5;
  double worst = 0.0;
  auto compare = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss_of();
    param = saved - h;
    const double dn = loss_of();
    param = saved;
    const double fd = (up - dn) / (2.0 * h);
    const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic),
                                                           1e-6});
    worst = std::max(worst, rel);
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    for (int f = 0; f < layer.features_out(); ++f) {
      for (int g = 0; g < layer.features_in(); ++g) {
        for (std::size_t k = 0; k < layer.words().size(); ++k) {
          double value = layer.coefficient(f, g, k);
          const double analytic =
              grads.filter_coeffs[l][static_cast<std::size_t>(f) * layer.features_in() + g][k];
          layer.set_coefficient(f, g, k, value + h);
          const double up = loss_of();
          layer.set_coefficient(f, g, k, value - h);
          const double dn = loss_of();
          layer.set_coefficient(f, g, k, value);
          const double fd = (up - dn) / (2.0 * h);
          const double rel =
              std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
          worst = std::max(worst, rel);
        }
      }
    }
  }
  for (Eigen::Index i = 0; i < net.readout_weight.size(); ++i) {
    compare(net.readout_weight.data()[i], grads.readout_weight.data()[i]);
  }
  for (Eigen::Index i = 0; i < net.readout_bias.size(); ++i) {
    compare(net.readout_bias.data()[i], grads.readout_bias.data()[i]);
  }
  detail = "max relative gradient error " + format_double(worst);
  return worst <= 1e-5;
}

// ---------------------------------------------------------------------------
// Criteria 9 and 10 drive the CLI end to end.

int run_command(const std::string& cmd) { return std::system(cmd.c_str()); }

struct ExperimentTable {
  // medians of |delta| per fraction for each architecture
  std::map<std::string, std::map<std::string, std::vector<double>>> deltas;
  std::map<std::string, std::vector<double>> fraction_one_deltas;
};

bool parse_results_csv(const fs::path& path, ExperimentTable& table, std::string& detail) {
  std::ifstream in(path);
  if (!in) {
    detail = "missing " + path.string();
    return false;
  }
  std::string line;
  std::getline(in, line);
  if (line != "arch,fraction,seed,rmse_train,rmse_eval,delta") {
    detail = "unexpected CSV header: " + line;
    return false;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string arch, fraction, seed, rmse_train, rmse_eval, delta;
    std::getline(ss, arch, ',');
    std::getline(ss, fraction, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, rmse_train, ',');
    std::getline(ss, rmse_eval, ',');
    std::getline(ss, delta, ',');
    const double d = std::stod(delta);
    if (fraction == "1") {
      table.fraction_one_deltas[arch].push_back(d);
    } else {
      table.deltas[arch][fraction].push_back(std::abs(d));
    }
  }
  return true;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

fs::path experiment_dir(const std::string& name) {
  return fs::temp_directory_path() / ("ncasp_acceptance_" + name);
}

bool criterion_trend(std::string& detail) {
  const fs::path out = experiment_dir("exp1");
  fs::remove_all(out);
  const std::string cmd = std::string(NCASP_CLI_PATH) + " experiment --out " + out.string() +
                          " > " + (out.string() + ".log") + " 2>&1";
  fs::create_directories(out);
  if (run_command(cmd) != 0) {
    detail = "experiment exited nonzero";
    return false;
  }

  ExperimentTable table;
  if (!parse_results_csv(out / "results.csv", table, detail)) return false;

  for (const auto& [arch, deltas] : table.fraction_one_deltas) {
    for (double d : deltas) {
      if (d != 0.0) {
        detail = arch + " fraction-1.0 delta " + format_double(d) + " is not exactly 0";
        return false;
      }
    }
  }
  if (table.fraction_one_deltas.size() != 3) {
    detail = "expected fraction-1.0 rows for all three architectures";
    return false;
  }

  const auto& il = table.deltas.at("mgnn_il");
  const auto& plain = table.deltas.at("mgnn");
  if (il.size() != 9 || plain.size() != 9) {
    detail = "expected 9 sub-unit fractions, got " + std::to_string(il.size());
    return false;
  }
  int wins = 0;
  for (const auto& [fraction, values] : il) {
    if (median(values) <= median(plain.at(fraction))) ++wins;
  }
  detail = "IL not worse on " + std::to_string(wins) + "/9 fractions";
  return wins >= 7;
}

bool criterion_determinism(std::string& detail) {
  const fs::path out1 = experiment_dir("exp1");
  const fs::path out2 = experiment_dir("exp2");
  fs::remove_all(out2);
  fs::create_directories(out2);
  const std::string cmd = std::string(NCASP_CLI_PATH) + " experiment --out " + out2.string() +
                          " > " + (out2.string() + ".log") + " 2>&1";
  if (run_command(cmd) != 0) {
    detail = "experiment exited nonzero";
    return false;
  }
  for (const char* name : {"results.csv", "summary.json"}) {
    std::ifstream a(out1 / name, std::ios::binary);
    std::ifstream b(out2 / name, std::ios::binary);
    if (!a || !b) {
      detail = std::string("missing report file ") + name;
      return false;
    }
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() != sb.str()) {
      detail = std::string(name) + " differs between identical runs";
      return false;
    }
  }
  detail = "reports byte-identical";
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "homomorphism rho(pq) = rho(p)rho(q) within 1e-10 (200 instances)", 10.0,
       criterion_homomorphism},
      {2, "streaming application matches dense instantiation within 1e-10", 5.0,
       criterion_streaming},
      {3, "joint block diagonalization recovers planted blocks, residual <= 1e-8", 30.0,
       criterion_jbd},
      {4, "filtering commutes with the Fourier transform within 1e-8", 10.0,
       criterion_fourier_commutation},
      {5, "empirical Lipschitz estimates never exceed analytic certificates", 60.0,
       criterion_certificates},
      {6, "filter stability bound holds on epsilon sweeps and is non-vacuous", 60.0,
       criterion_filter_bound},
      {7, "network stability bound holds; single layer equals the layer bound", 120.0,
       criterion_network_bound},
      {8, "gradients match central finite differences within 1e-5", 30.0,
       criterion_gradients},
      {9, "desk-scale experiment reproduces the penalized-stability trend", 300.0,
       criterion_trend},
      {10, "repeated experiment runs emit byte-identical reports", 360.0,
       criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) {
      ok = false;
      detail += " [exceeded " + format_double(c.budget_seconds) + "s budget]";
    }
    std::printf("[%s] criterion %2d: %s (%.2fs%s%s)\n", ok ? "PASS" : "FAIL", c.number,
                c.description.c_str(), seconds, detail.empty() ? "" : "; ",
                detail.c_str());
    if (!ok) ++failures;
  }
  if (failures == 0) {
    std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
