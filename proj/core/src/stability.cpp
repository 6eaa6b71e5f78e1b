#include "ncasp/stability.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "ncasp/filter_ops.hpp"
#include "ncasp/lipschitz.hpp"

namespace ncasp {

namespace {

void check_epsilons(const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw std::invalid_argument("epsilon sweep is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw std::invalid_argument("epsilons must be positive");
    if (i > 0 && epsilons[i] >= epsilons[i - 1]) {
      throw std::invalid_argument("epsilons must be strictly descending");
    }
  }
  if (epsilons.back() > 1e-3 * (1.0 + 1e-12)) {
    throw std::invalid_argument("epsilon sweep must descend to <= 1e-3");
  }
}

// Shared fit/verdict logic for filter and network sweeps. `lhs_of` and
// `rhs_of` evaluate one probe; rhs must be linear in epsilon.
StabilityReport run_sweep(const std::vector<double>& epsilons,
                          const std::function<double(double)>& lhs_of,
                          const std::function<double(double)>& rhs_of,
                          const VerifyOptions& opts) {
  StabilityReport report;
  report.probes.reserve(epsilons.size());

  bool degenerate = false;
  for (double eps : epsilons) {
    StabilityProbe probe;
    probe.epsilon = eps;
    probe.lhs = lhs_of(eps);
    probe.rhs = rhs_of(eps);
    probe.residual = std::max(0.0, probe.lhs - probe.rhs);
    if (!std::isfinite(probe.lhs) || !std::isfinite(probe.rhs)) degenerate = true;
    report.probes.push_back(probe);
  }

  const StabilityProbe& largest = report.probes.front();
  report.lhs = largest.lhs;
  report.rhs_first_order = largest.rhs;
  report.rhs_slope = largest.rhs / largest.epsilon;

  for (const StabilityProbe& probe : report.probes) {
    if (probe.rhs > 0.0) report.max_ratio = std::max(report.max_ratio, probe.lhs / probe.rhs);
  }

  if (degenerate) {
    report.verdict = StabilityVerdict::inconclusive;
    return report;
  }

  // Least-squares fit of residual = c2 * eps^2, then enlarged so the fitted
  // constant covers every probe.
  double num = 0.0, den = 0.0, c2_cover = 0.0;
  for (const StabilityProbe& probe : report.probes) {
    num += probe.residual * probe.epsilon * probe.epsilon;
    den += std::pow(probe.epsilon, 4.0);
    c2_cover = std::max(c2_cover, probe.residual / (probe.epsilon * probe.epsilon));
  }
  const double c2_fit = den > 0.0 ? num / den : 0.0;
  report.quadratic_slack = std::max(c2_fit, c2_cover);

  const double c2_cap = opts.c2_cap_factor * report.rhs_slope;
  const StabilityProbe& smallest = report.probes.back();

  bool bounded = report.quadratic_slack <= c2_cap;
  if (report.rhs_slope == 0.0) {
    // A zero first-order bound tolerates no deviation at all.
    for (const StabilityProbe& probe : report.probes) {
      if (probe.lhs != 0.0) bounded = false;
    }
  } else {
    const double lhs_slope = smallest.lhs / smallest.epsilon;
    if (lhs_slope > report.rhs_slope * (1.0 + opts.slope_slack)) bounded = false;
  }
  report.verdict = bounded ? StabilityVerdict::bounded : StabilityVerdict::violated;
  return report;
}

struct LayerStabilityData {
  double l0 = 0.0;      // aggregated over the feature grid
  double l1 = 0.0;
  double b = 0.0;       // operator bound of the stacked filter bank
  double c = 1.0;       // Lipschitz constant of sigma
  double sup_t = 0.0;   // at unit perturbation scale
  double sup_dt = 0.0;
  double delta = 0.0;
  int m = 0;
};

// Aggregated certificates: per out-feature row sums, stacked in l2. For a
// single-feature layer these are exactly the filter's L0 / max-generator L1.
LayerStabilityData layer_stability_data(const Layer& layer,
                                        const PerturbationModel& perturbation) {
  LayerStabilityData data;
  double l0_sq = 0.0, l1_sq = 0.0;
  for (int f = 0; f < layer.features_out(); ++f) {
    double l0_row = 0.0, l1_row = 0.0;
    for (int g = 0; g < layer.features_in(); ++g) {
      const NcPolynomial p = layer.filter(f, g);
      l0_row += analytic_l0(p, layer.certificate_radius());
      const std::vector<double> l1 = analytic_l1(p, layer.certificate_radius());
      double l1_max = 0.0;
      for (double v : l1) l1_max = std::max(l1_max, v);
      l1_row += l1_max;
    }
    l0_sq += l0_row * l0_row;
    l1_sq += l1_row * l1_row;
  }
  data.l0 = std::sqrt(l0_sq);
  data.l1 = std::sqrt(l1_sq);
  data.b = layer_operator_bound(layer);
  data.c = nonlinearity_lipschitz(layer.nonlinearity());
  const PerturbationNorms norms = perturbation_norms(layer.shifts(), perturbation);
  data.sup_t = norms.sup_t;
  data.sup_dt = norms.sup_dt;
  data.delta = perturbation.delta;
  data.m = static_cast<int>(layer.shifts().num_generators());
  return data;
}

void check_radius_covers(const ShiftSet& shifts, const ShiftSet& perturbed, double radius) {
  double needed = 0.0;
  for (const Matrix& s : shifts.shifts()) needed = std::max(needed, spectral_norm(s));
  for (const Matrix& s : perturbed.shifts()) needed = std::max(needed, spectral_norm(s));
  if (radius < needed * (1.0 - 1e-12)) {
    throw std::invalid_argument("certificate radius " + format_double(radius) +
                                " is smaller than the realized shift norm " +
                                format_double(needed));
  }
}

}  // namespace

std::string to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::bounded:
      return "bounded";
    case StabilityVerdict::violated:
      return "violated";
    case StabilityVerdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

double filter_deviation(const NcPolynomial& p, const ShiftSet& shifts,
                        const ShiftSet& perturbed, const Vector& x) {
  if (shifts.dim() != perturbed.dim() ||
      shifts.num_generators() != perturbed.num_generators()) {
    throw std::invalid_argument("original and perturbed shift sets are incompatible");
  }
  return (apply_streaming(p, shifts, x) - apply_streaming(p, perturbed, x)).norm();
}

double filter_stability_bound(const NcPolynomial& p, const ShiftSet& shifts,
                      const PerturbationModel& perturbation, double x_norm, double radius) {
  const ShiftSet perturbed = perturb_shifts(shifts, perturbation);
  check_radius_covers(shifts, perturbed, radius);

  const double l0 = analytic_l0(p, radius);
  const std::vector<double> l1 = analytic_l1(p, radius);
  double l1_max = 0.0;
  for (double v : l1) l1_max = std::max(l1_max, v);

  const PerturbationNorms norms = perturbation_norms(shifts, perturbation);
  const double m = static_cast<double>(shifts.num_generators());
  const double c0 = m * perturbation.delta * l0;
  const double c1 = m * perturbation.delta * l1_max;
  return (c0 * norms.sup_t + c1 * norms.sup_dt) * x_norm;
}

StabilityReport verify_filter_stability(const NcPolynomial& p, const ShiftSet& shifts,
                                        const PerturbationModel& perturbation, const Vector& x,
                                        const std::vector<double>& epsilons, double radius,
                                        const VerifyOptions& opts) {
  check_epsilons(epsilons);
  const double x_norm = x.norm();

  StabilityReport report = run_sweep(
      epsilons,
      [&](double eps) {
        return filter_deviation(p, shifts, perturb_shifts(shifts, perturbation.scaled(eps)), x);
      },
      [&](double eps) {
        return filter_stability_bound(p, shifts, perturbation.scaled(eps), x_norm, radius);
      },
      opts);

  const PerturbationNorms norms = perturbation_norms(shifts, perturbation);
  const std::vector<double> l1 = analytic_l1(p, radius);
  double l1_max = 0.0;
  for (double v : l1) l1_max = std::max(l1_max, v);
  report.constants = StabilityConstants{static_cast<int>(shifts.num_generators()),
                                        perturbation.delta,
                                        analytic_l0(p, radius),
                                        l1_max,
                                        norms.sup_t,
                                        norms.sup_dt};
  return report;
}

double layer_deviation_bound(const Layer& layer, const PerturbationModel& perturbation,
                             double x_norm) {
  const LayerStabilityData d = layer_stability_data(layer, perturbation);
  return d.c * d.delta * x_norm * static_cast<double>(d.m) *
         (d.l0 * d.sup_t + d.l1 * d.sup_dt);
}

double network_deviation_bound(const AlgNN& net,
                               const std::vector<PerturbationModel>& perturbations,
                               double x_norm) {
  const std::size_t num_layers = net.layers.size();
  if (perturbations.size() != num_layers) {
    throw std::invalid_argument("need one perturbation model per layer");
  }
  std::vector<LayerStabilityData> data;
  data.reserve(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    data.push_back(layer_stability_data(net.layers[l], perturbations[l]));
  }

  double total = 0.0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const double delta_l = data[l].delta * static_cast<double>(data[l].m) *
                           (data[l].l0 * data[l].sup_t + data[l].l1 * data[l].sup_dt);
    double factor = 1.0;
    for (std::size_t r = l; r < num_layers; ++r) factor *= data[r].c;
    for (std::size_t r = l + 1; r < num_layers; ++r) factor *= data[r].b;
    for (std::size_t r = 0; r < l; ++r) factor *= data[r].c * data[r].b;
    total += delta_l * factor;
  }
  return total * x_norm;
}

StabilityReport verify_network_stability(const AlgNN& net,
                                         const std::vector<PerturbationModel>& perturbations,
                                         const std::vector<Vector>& features,
                                         const std::vector<double>& epsilons,
                                         const VerifyOptions& opts) {
  check_epsilons(epsilons);
  if (perturbations.size() != net.layers.size()) {
    throw std::invalid_argument("need one perturbation model per layer");
  }
  double x_norm_sq = 0.0;
  for (const Vector& f : features) x_norm_sq += f.squaredNorm();
  const double x_norm = std::sqrt(x_norm_sq);

  const Vector baseline = forward(net, features).output;

  StabilityReport report = run_sweep(
      epsilons,
      [&](double eps) {
        std::vector<ShiftSet> perturbed;
        perturbed.reserve(net.layers.size());
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
          perturbed.push_back(
              perturb_shifts(net.layers[l].shifts(), perturbations[l].scaled(eps)));
        }
        return (forward(net, features, &perturbed).output - baseline).norm();
      },
      [&](double eps) {
        std::vector<PerturbationModel> scaled;
        scaled.reserve(perturbations.size());
        for (const PerturbationModel& p : perturbations) scaled.push_back(p.scaled(eps));
        return network_deviation_bound(net, scaled, x_norm);
      },
      opts);

  // Constants of the first layer stand in for the report summary; per-layer
  // data is recoverable from layer_deviation_bound.
  const LayerStabilityData d0 = layer_stability_data(net.layers.front(), perturbations.front());
  report.constants =
      StabilityConstants{d0.m, d0.delta, d0.l0, d0.l1, d0.sup_t, d0.sup_dt};
  return report;
}

Vector adversarial_signal(const NcPolynomial& p, const ShiftSet& shifts,
                          const ShiftSet& perturbed) {
  const Matrix diff = instantiate(p, shifts).matrix - instantiate(p, perturbed).matrix;
  Eigen::BDCSVD<Matrix> svd(diff, Eigen::ComputeThinV);
  return svd.matrixV().col(0);
}

}  // namespace ncasp
