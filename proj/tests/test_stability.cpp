#include <doctest.h>

#include <cmath>
#include <memory>

#include "ncasp/filter_ops.hpp"
#include "ncasp/lipschitz.hpp"
#include "ncasp/stability.hpp"
#include "test_helpers.hpp"

using namespace ncasp;

namespace {

const std::vector<double> kSweep{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

// Rank-one absolute perturbation with realized delta exactly 1.
PerturbationModel rank_one_absolute(int n, double eps) {
  Matrix t0 = Matrix::Zero(n, n);
  t0(0, 0) = eps;
  return {t0, Matrix::Zero(n, n), 1.0};
}

AlgNN single_filter_net(std::shared_ptr<const ShiftSet> shifts, const NcPolynomial& p,
                        Nonlinearity nl, double radius) {
  const int n = shifts->dim();
  std::vector<Word> words = words_up_to_degree(shifts->num_generators(),
                                               std::max(1, p.degree()));
  Layer layer(shifts, std::move(words), 1, 1, nl, Matrix::Identity(n, n), radius);
  layer.set_filter(0, 0, p);
  AlgNN net;
  net.layers.push_back(std::move(layer));
  net.readout_weight = Matrix::Identity(n, n);
  net.readout_bias = Vector::Zero(n);
  return net;
}

}  // namespace

TEST_CASE("filter_deviation: zero for identical shifts and for the unit filter") {
  Rng rng(301);
  const ShiftSet s = test::random_shift_set(5, 2, rng);
  const Vector x = test::random_vector(5, rng);
  const auto p = test::random_polynomial(2, 3, 4, rng);
  CHECK(filter_deviation(p, s, s, x) == 0.0);

  const ShiftSet perturbed = perturb_shifts(s, rank_one_absolute(5, 0.01));
  CHECK(filter_deviation(NcPolynomial::unit(2), s, perturbed, x) == 0.0);
}

TEST_CASE("filter_deviation: linear filter under identity offset is exactly eps||x||") {
  Rng rng(302);
  const ShiftSet s = test::random_shift_set(4, 1, rng);
  const Vector x = test::random_vector(4, rng);
  const double eps = 1e-3;
  const Matrix eye = Matrix::Identity(4, 4);
  const ShiftSet perturbed = perturb_shifts(s, {eps * eye, Matrix::Zero(4, 4), 2.0});
  const double dev = filter_deviation(NcPolynomial::generator(1, 0), s, perturbed, x);
  CHECK(dev == doctest::Approx(eps * x.norm()).epsilon(1e-12));
}

TEST_CASE("filter_stability_bound: zero perturbation gives a zero bound") {
  Rng rng(303);
  const ShiftSet s = test::random_shift_set(4, 2, rng);
  const auto p = test::random_polynomial(2, 3, 4, rng);
  const PerturbationModel zero{Matrix::Zero(4, 4), Matrix::Zero(4, 4), 1.0};
  CHECK(filter_stability_bound(p, s, zero, 1.0, 2.0) == 0.0);
}

TEST_CASE("filter_stability_bound: fully explicit linear witness") {
  // m = 1, p = g1, rank-one T0 with delta = 1, T1 = 0, ||x|| = 1:
  // L0 = 1 independent of B, sup||T|| = eps, so the bound is exactly eps.
  Rng rng(304);
  const ShiftSet s = test::random_shift_set(4, 1, rng);
  const double eps = 0.02;
  const PerturbationModel p = rank_one_absolute(4, eps);
  const double bound = filter_stability_bound(NcPolynomial::generator(1, 0), s, p, 1.0, 2.0);
  CHECK(bound == doctest::Approx(eps).epsilon(1e-12));
}

TEST_CASE("filter_stability_bound equals m*delta*(L0 supT + L1 supDT)*||x|| by construction") {
  Rng rng(305);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(4));
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.index(3));
    const ShiftSet s = test::random_shift_set(n, m, rng);
    const auto p = test::random_polynomial(m, 3, 4, rng);
    const PerturbationModel pert =
        sample_perturbation(n, PerturbationKind::mixed, 0.05, 2.0, 400 + trial);
    const double radius = 2.0 + s.max_shift_norm();
    const double x_norm = rng.uniform(0.5, 2.0);

    const double got = filter_stability_bound(p, s, pert, x_norm, radius);
    const auto norms = perturbation_norms(s, pert);
    const double l0 = analytic_l0(p, radius);
    double l1 = 0.0;
    for (double v : analytic_l1(p, radius)) l1 = std::max(l1, v);
    const double c0 = m * pert.delta * l0;
    const double c1 = m * pert.delta * l1;
    CHECK(got == doctest::Approx((c0 * norms.sup_t + c1 * norms.sup_dt) * x_norm));
  }
}

TEST_CASE("filter_stability_bound is monotone in its constants") {
  Rng rng(306);
  const ShiftSet s = test::random_shift_set(4, 2, rng);
  const auto p = test::random_polynomial(2, 2, 3, rng);
  const PerturbationModel pert =
      sample_perturbation(4, PerturbationKind::mixed, 0.05, 2.0, 11);
  const double radius = 1.0 + s.max_shift_norm();

  const double base = filter_stability_bound(p, s, pert, 1.0, radius);
  CHECK(filter_stability_bound(p, s, pert, 2.0, radius) >= base);           // ||x||
  CHECK(filter_stability_bound(scale(p, 2.0), s, pert, 1.0, radius) >= base);  // L0, L1
  PerturbationModel bigger_delta = pert;
  bigger_delta.delta *= 3.0;
  CHECK(filter_stability_bound(p, s, bigger_delta, 1.0, radius) >= base);   // delta
}

TEST_CASE("filter_stability_bound rejects a radius below the realized shift norms") {
  Rng rng(307);
  const ShiftSet s = test::random_shift_set(4, 2, rng);
  const auto p = test::random_polynomial(2, 2, 3, rng);
  const PerturbationModel pert = rank_one_absolute(4, 0.05);
  CHECK_THROWS_AS(filter_stability_bound(p, s, pert, 1.0, 1e-6), std::invalid_argument);
}

TEST_CASE("verify_filter_stability: certified random instances are bounded") {
  Rng rng(308);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(6));
    const ShiftSet s = test::random_shift_set(n, 2, rng);
    const auto p = test::random_polynomial(2, 3, 4, rng);
    const Vector x = test::random_vector(n, rng);
    const PerturbationModel pert =
        sample_perturbation(n, PerturbationKind::mixed, 0.2, 2.0, 500 + trial);
    const double radius = 1.0 + s.max_shift_norm();

    const StabilityReport report = verify_filter_stability(p, s, pert, x, kSweep, radius);
    CHECK(report.verdict == StabilityVerdict::bounded);
    CHECK(report.probes.size() == kSweep.size());
    CHECK(report.constants.m == 2);
  }
}

TEST_CASE("verify_filter_stability: unit filter has identically zero deviation") {
  Rng rng(309);
  const ShiftSet s = test::random_shift_set(4, 2, rng);
  const Vector x = test::random_vector(4, rng);
  const PerturbationModel pert =
      sample_perturbation(4, PerturbationKind::mixed, 0.1, 2.0, 17);
  const StabilityReport report = verify_filter_stability(
      NcPolynomial::unit(2), s, pert, x, kSweep, 1.0 + s.max_shift_norm());
  CHECK(report.verdict == StabilityVerdict::bounded);
  for (const StabilityProbe& probe : report.probes) CHECK(probe.lhs == 0.0);
}

TEST_CASE("verify_filter_stability: linear witness is non-vacuous") {
  Rng rng(310);
  const int n = 6;
  const ShiftSet s = test::random_shift_set(n, 1, rng);
  const Vector x = test::random_vector(n, rng);
  const PerturbationModel pert = rank_one_absolute(n, 1.0);  // scaled by the sweep

  const StabilityReport report = verify_filter_stability(
      NcPolynomial::generator(1, 0), s, pert, x, kSweep, 1.0 + s.max_shift_norm());
  CHECK(report.verdict == StabilityVerdict::bounded);
  CHECK(report.max_ratio >= 0.01);
}

TEST_CASE("layer_deviation_bound: ReLU layer matches the filter bound") {
  Rng rng(311);
  const int n = 5;
  auto shifts = std::make_shared<ShiftSet>(test::random_shift_set(n, 2, rng));
  const auto p = test::random_polynomial(2, 2, 3, rng);
  const double radius = 1.0 + shifts->max_shift_norm();
  AlgNN net = single_filter_net(shifts, p, Nonlinearity::relu, radius);

  const PerturbationModel pert =
      sample_perturbation(n, PerturbationKind::mixed, 0.05, 2.0, 23);
  const double layer_bound = layer_deviation_bound(net.layers[0], pert, 1.0);
  const double filter_bound = filter_stability_bound(p, *shifts, pert, 1.0, radius);
  CHECK(layer_bound == doctest::Approx(filter_bound).epsilon(1e-12));

  const PerturbationModel zero{Matrix::Zero(n, n), Matrix::Zero(n, n), 1.0};
  CHECK(layer_deviation_bound(net.layers[0], zero, 1.0) == 0.0);
}

TEST_CASE("network_deviation_bound: single layer reduces to the layer bound") {
  Rng rng(312);
  const int n = 4;
  auto shifts = std::make_shared<ShiftSet>(test::random_shift_set(n, 2, rng));
  const auto p = test::random_polynomial(2, 2, 3, rng);
  AlgNN net = single_filter_net(shifts, p, Nonlinearity::relu,
                                1.0 + shifts->max_shift_norm());
  const PerturbationModel pert =
      sample_perturbation(n, PerturbationKind::mixed, 0.05, 2.0, 29);

  const double network = network_deviation_bound(net, {pert}, 1.5);
  const double layer = layer_deviation_bound(net.layers[0], pert, 1.5);
  CHECK(network == doctest::Approx(layer).epsilon(1e-12));

  const PerturbationModel zero{Matrix::Zero(n, n), Matrix::Zero(n, n), 1.0};
  CHECK(network_deviation_bound(net, {zero}, 1.5) == 0.0);
}

TEST_CASE("network_deviation_bound: two unit-constant layers add their Deltas") {
  // Orthogonal shift with norm 1, filter g1 (L0 = 1, L1 = 1 at B = 1, B_l = 1,
  // C_l = 1), rank-one absolute perturbation (delta = 1, sup_T = eps):
  // Delta_l = eps, so the Eq. (8) sum collapses to 2 eps ||x||.
  const int n = 3;
  Matrix rot = Matrix::Zero(n, n);
  rot(0, 1) = 1.0;
  rot(1, 0) = -1.0;
  rot(2, 2) = 1.0;
  auto shifts = std::make_shared<ShiftSet>(ShiftSet(n, {rot}));
  const auto p = NcPolynomial::generator(1, 0);

  AlgNN net;
  for (int l = 0; l < 2; ++l) {
    Layer layer(shifts, words_up_to_degree(1, 1), 1, 1, Nonlinearity::relu,
                Matrix::Identity(n, n), 1.0);
    layer.set_filter(0, 0, p);
    net.layers.push_back(std::move(layer));
  }
  net.readout_weight = Matrix::Identity(n, n);
  net.readout_bias = Vector::Zero(n);

  const double eps = 0.01;
  const PerturbationModel pert = rank_one_absolute(n, eps);
  const double x_norm = 2.0;
  CHECK(network_deviation_bound(net, {pert, pert}, x_norm) ==
        doctest::Approx(2.0 * eps * x_norm).epsilon(1e-12));

  // Bound hierarchy at unit constants: the network total equals the sum of
  // the per-layer bounds.
  const double sum_layers = layer_deviation_bound(net.layers[0], pert, x_norm) +
                            layer_deviation_bound(net.layers[1], pert, x_norm);
  CHECK(network_deviation_bound(net, {pert, pert}, x_norm) ==
        doctest::Approx(sum_layers).epsilon(1e-12));
}

TEST_CASE("verify_network_stability: zero perturbation, identity filters") {
  Rng rng(313);
  const int n = 4;
  auto shifts = std::make_shared<ShiftSet>(test::random_shift_set(n, 2, rng));
  AlgNN net = single_filter_net(shifts, NcPolynomial::unit(2), Nonlinearity::relu,
                                1.0 + shifts->max_shift_norm());
  const PerturbationModel pert =
      sample_perturbation(n, PerturbationKind::mixed, 0.1, 2.0, 31);

  const std::vector<Vector> x{test::random_vector(n, rng)};
  const StabilityReport report = verify_network_stability(net, {pert}, x, kSweep);
  CHECK(report.verdict == StabilityVerdict::bounded);
  for (const StabilityProbe& probe : report.probes) CHECK(probe.lhs == 0.0);
}

TEST_CASE("verify_network_stability: random two-layer nets are bounded") {
  Rng rng(314);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4 + static_cast<int>(rng.index(3));
    auto shifts = std::make_shared<ShiftSet>(test::random_shift_set(n, 2, rng));
    AlgNN net;
    for (int l = 0; l < 2; ++l) {
      Layer layer = Layer::dense_template(shifts, 2, 1, 1, Nonlinearity::relu);
      layer.set_filter(0, 0, test::random_polynomial(2, 2, 3, rng, 0.5));
      net.layers.push_back(std::move(layer));
    }
    net.readout_weight = Matrix::Identity(n, n);
    net.readout_bias = Vector::Zero(n);

    std::vector<PerturbationModel> perts;
    for (int l = 0; l < 2; ++l) {
      perts.push_back(sample_perturbation(n, PerturbationKind::mixed, 0.1, 2.0,
                                          600 + 10 * trial + l));
    }
    const std::vector<Vector> x{test::random_vector(n, rng)};
    const StabilityReport report = verify_network_stability(net, perts, x, kSweep);
    CHECK(report.verdict == StabilityVerdict::bounded);
  }
}

TEST_CASE("an understated delta certificate is caught as violated") {
  // Claiming a tiny delta shrinks the first-order bound below the observed
  // deviation; the slope test must flag it.
  Rng rng(316);
  const int n = 5;
  const ShiftSet s = test::random_shift_set(n, 2, rng);
  const auto p = test::random_polynomial(2, 3, 4, rng);
  const Vector x = test::random_vector(n, rng);
  PerturbationModel pert = sample_perturbation(n, PerturbationKind::mixed, 0.2, 2.0, 41);
  pert.delta = 1e-6;  // dishonest: the realized ratio is >= 1

  const StabilityReport report = verify_filter_stability(
      p, s, pert, x, kSweep, 1.0 + s.max_shift_norm());
  CHECK(report.verdict == StabilityVerdict::violated);
}

TEST_CASE("adversarial_signal saturates the operator deviation") {
  Rng rng(315);
  const ShiftSet s = test::random_shift_set(5, 2, rng);
  const auto p = test::random_polynomial(2, 3, 4, rng);
  const PerturbationModel pert =
      sample_perturbation(5, PerturbationKind::mixed, 0.05, 2.0, 37);
  const ShiftSet perturbed = perturb_shifts(s, pert);

  const Vector adv = adversarial_signal(p, s, perturbed);
  CHECK(adv.norm() == doctest::Approx(1.0).epsilon(1e-10));
  const double adv_dev = filter_deviation(p, s, perturbed, adv);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x = test::random_vector(5, rng);
    x.normalize();
    CHECK(filter_deviation(p, s, perturbed, x) <= adv_dev * (1.0 + 1e-9));
  }
}
