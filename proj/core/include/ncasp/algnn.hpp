#ifndef NCASP_ALGNN_HPP
#define NCASP_ALGNN_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ncasp/linalg.hpp"
#include "ncasp/nc_polynomial.hpp"
#include "ncasp/shift_set.hpp"
#include "ncasp/word.hpp"

namespace ncasp {

enum class Nonlinearity { relu, tanh, identity };

Nonlinearity nonlinearity_from_string(const std::string& s);
std::string to_string(Nonlinearity nl);

/// All supported nonlinearities are 1-Lipschitz and fix zero.
inline double nonlinearity_lipschitz(Nonlinearity) { return 1.0; }
double apply_nonlinearity(Nonlinearity nl, double x);
/// Derivative at a pre-activation value; ReLU uses subgradient 0 at 0.
double nonlinearity_derivative(Nonlinearity nl, double x);

/// One convolutional layer: a features_out x features_in bank of filters
/// over a fixed word template, a shared shift set, a pointwise nonlinearity,
/// and a pooling matrix with operator norm <= 1. Coefficients are stored
/// densely over the template so training can move them through zero; the
/// canonical NcPolynomial view prunes zeros.
class Layer {
 public:
  Layer(std::shared_ptr<const ShiftSet> shifts, std::vector<Word> word_template,
        int features_in, int features_out, Nonlinearity nonlinearity, Matrix pooling,
        double certificate_radius);

  /// Convenience: identity pooling, radius = max shift norm.
  static Layer dense_template(std::shared_ptr<const ShiftSet> shifts, int max_degree,
                              int features_in, int features_out, Nonlinearity nonlinearity);

  const ShiftSet& shifts() const { return *shifts_; }
  std::shared_ptr<const ShiftSet> shifts_ptr() const { return shifts_; }
  const std::vector<Word>& words() const { return words_; }
  int features_in() const { return features_in_; }
  int features_out() const { return features_out_; }
  int dim_in() const { return shifts_->dim(); }
  int dim_out() const { return static_cast<int>(pooling_.rows()); }
  Nonlinearity nonlinearity() const { return nonlinearity_; }
  const Matrix& pooling() const { return pooling_; }
  double certificate_radius() const { return certificate_radius_; }

  double coefficient(int out_f, int in_g, std::size_t word_idx) const;
  void set_coefficient(int out_f, int in_g, std::size_t word_idx, double value);
  std::vector<double>& coefficients(int out_f, int in_g);
  const std::vector<double>& coefficients(int out_f, int in_g) const;

  /// Canonical sparse view of one filter (zeros pruned).
  NcPolynomial filter(int out_f, int in_g) const;
  /// Writes p onto the dense template; words outside the template are
  /// rejected.
  void set_filter(int out_f, int in_g, const NcPolynomial& p);

 private:
  std::shared_ptr<const ShiftSet> shifts_;
  std::vector<Word> words_;
  int features_in_;
  int features_out_;
  Nonlinearity nonlinearity_;
  Matrix pooling_;
  double certificate_radius_;
  std::vector<std::vector<double>> coeffs_;  // [f * features_in + g][word_idx]
};

/// Layered network plus an affine readout from the flattened final features.
struct AlgNN {
  std::vector<Layer> layers;
  Matrix readout_weight;
  Vector readout_bias;

  int input_dim() const { return layers.empty() ? 0 : layers.front().dim_in(); }
  int input_features() const { return layers.empty() ? 0 : layers.front().features_in(); }
};

struct LayerCache {
  std::vector<Vector> inputs;                   // per in-feature
  std::vector<std::vector<Vector>> word_vecs;   // [in-feature][word_idx]
  std::vector<Vector> preact;                   // per out-feature
  std::vector<Vector> pooled;                   // per out-feature
};

struct ForwardResult {
  Vector output;
  std::vector<LayerCache> cache;
};

/// Forward pass; when override_shifts is non-null it supplies one shift set
/// per layer (the perturbed-network evaluation path).
ForwardResult forward(const AlgNN& net, const std::vector<Vector>& features,
                      const std::vector<ShiftSet>* override_shifts = nullptr);
ForwardResult forward(const AlgNN& net, const Vector& x,
                      const std::vector<ShiftSet>* override_shifts = nullptr);

struct Gradients {
  std::vector<std::vector<std::vector<double>>> filter_coeffs;  // mirrors Layer storage
  Matrix readout_weight;
  Vector readout_bias;
};

Gradients zero_gradients(const AlgNN& net);

/// Exact reverse-mode gradients for every filter coefficient and readout
/// parameter, given d(loss)/d(output). Accumulates into `grads`.
void backward(const AlgNN& net, const ForwardResult& fwd, const Vector& output_grad,
              Gradients& grads);

struct TrainSample {
  Vector input;
  Vector target;
};

enum class Optimizer { sgd, adam };

struct TrainConfig {
  int epochs = 40;
  double learning_rate = 1e-2;
  int batch_size = 16;
  double il_weight = 0.0;
  double il_tau = 0.01;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adam;
};

struct EpochStats {
  double mse = 0.0;
  double penalty = 0.0;
};

struct TrainResult {
  AlgNN net;
  std::vector<EpochStats> history;
};

/// Uniform init on [-1/sqrt(W*F_in), +1/sqrt(W*F_in)] per coefficient
/// (W = template size), readout rows likewise; deterministic given seed.
void initialize_parameters(AlgNN& net, std::uint64_t seed);

/// Minimizes mean squared error + il_weight * sum of per-filter integral-
/// Lipschitz penalties. Deterministic given cfg.seed. Throws
/// TrainingDiverged when the loss leaves the finite range.
TrainResult train(AlgNN net, const std::vector<TrainSample>& dataset, const TrainConfig& cfg);

double evaluate_rmse(const AlgNN& net, const std::vector<TrainSample>& dataset,
                     const std::vector<ShiftSet>* override_shifts = nullptr);

/// Upper bound on the layer's stacked linear map: sqrt(sum_f (sum_g B_fg)^2)
/// with B_fg = operator_norm_bound of the (f,g) filter. Equals the filter
/// bound for single-feature layers.
double layer_operator_bound(const Layer& layer);

struct SpectralDecomposition;

/// Dimension-reducing pooling onto the leading dim_out spectral coordinates
/// of the decomposition's basis (rows of U^T, so the operator norm is 1).
Matrix spectral_pooling(const SpectralDecomposition& d, int dim_out);

/// Plain coordinate truncation [I 0], the fallback when no decomposition is
/// available.
Matrix truncation_pooling(int dim_in, int dim_out);

/// Checkpoint directory: per-layer filter text files, pooling CSVs, readout
/// CSVs, and model.json manifest.
void save_model(const std::string& dir, const AlgNN& net, std::uint64_t seed);
/// Loads a checkpoint; shift sets are external and supplied per layer.
AlgNN load_model(const std::string& dir, std::vector<std::shared_ptr<const ShiftSet>> shifts);

}  // namespace ncasp

#endif  // NCASP_ALGNN_HPP
