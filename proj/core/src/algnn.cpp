#include "ncasp/algnn.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ncasp/errors.hpp"
#include "ncasp/filter_ops.hpp"
#include "ncasp/lipschitz.hpp"
#include "ncasp/rng.hpp"
#include "ncasp/spectral.hpp"

namespace ncasp {

namespace {

// Word-action table over a fixed template: vec[w] = S_w x. Shared suffixes
// are applied once (the dense analogue of WordVectorCache).
std::vector<Vector> word_actions(const ShiftSet& shifts, const std::vector<Word>& words,
                                 const Vector& x) {
  WordVectorCache cache(shifts, x);
  std::vector<Vector> out;
  out.reserve(words.size());
  for (const Word& w : words) out.push_back(cache.action(w));
  return out;
}

// Adjoint table: adj[w] = (S_w)^T y = S_wk^T ... S_w1^T y, built by prefix
// extension with transposed shifts.
std::vector<Vector> word_adjoint_actions(const ShiftSet& shifts, const std::vector<Word>& words,
                                         const Vector& y) {
  std::map<Word, Vector, GradedLexLess> cache;
  cache.emplace(Word{}, y);
  std::vector<Vector> out;
  out.reserve(words.size());
  for (const Word& w : words) {
    auto it = cache.find(w);
    if (it == cache.end()) {
      Word prefix = w;
      prefix.pop_back();
      while (!prefix.empty() && cache.find(prefix) == cache.end()) prefix.pop_back();
      Vector v = cache.at(prefix);
      for (std::size_t j = prefix.size(); j < w.size(); ++j) {
        v = shifts.shift(w[j]).transpose() * v;
        prefix.push_back(w[j]);
        cache.emplace(prefix, v);
      }
      it = cache.find(w);
    }
    out.push_back(it->second);
  }
  return out;
}

void check_features(const AlgNN& net, const std::vector<Vector>& features) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  const Layer& first = net.layers.front();
  if (static_cast<int>(features.size()) != first.features_in()) {
    throw std::invalid_argument("expected " + std::to_string(first.features_in()) +
                                " input features, got " + std::to_string(features.size()));
  }
  for (const Vector& f : features) {
    if (f.size() != first.dim_in()) {
      throw std::invalid_argument("input feature length " + std::to_string(f.size()) +
                                  " does not match layer dimension " +
                                  std::to_string(first.dim_in()));
    }
  }
}

const ShiftSet& layer_shifts(const Layer& layer, const std::vector<ShiftSet>* override_shifts,
                             std::size_t index) {
  if (override_shifts == nullptr) return layer.shifts();
  const ShiftSet& s = override_shifts->at(index);
  if (s.dim() != layer.dim_in() || s.num_generators() != layer.shifts().num_generators()) {
    throw std::invalid_argument("override shift set " + std::to_string(index) +
                                " does not match layer geometry");
  }
  return s;
}

}  // namespace

Nonlinearity nonlinearity_from_string(const std::string& s) {
  if (s == "relu") return Nonlinearity::relu;
  if (s == "tanh") return Nonlinearity::tanh;
  if (s == "identity") return Nonlinearity::identity;
  throw std::invalid_argument("unknown nonlinearity '" + s + "'");
}

std::string to_string(Nonlinearity nl) {
  switch (nl) {
    case Nonlinearity::relu:
      return "relu";
    case Nonlinearity::tanh:
      return "tanh";
    case Nonlinearity::identity:
      return "identity";
  }
  return "?";
}

double apply_nonlinearity(Nonlinearity nl, double x) {
  switch (nl) {
    case Nonlinearity::relu:
      return x > 0.0 ? x : 0.0;
    case Nonlinearity::tanh:
      return std::tanh(x);
    case Nonlinearity::identity:
      return x;
  }
  return x;
}

double nonlinearity_derivative(Nonlinearity nl, double x) {
  switch (nl) {
    case Nonlinearity::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Nonlinearity::identity:
      return 1.0;
  }
  return 1.0;
}

Layer::Layer(std::shared_ptr<const ShiftSet> shifts, std::vector<Word> word_template,
             int features_in, int features_out, Nonlinearity nonlinearity, Matrix pooling,
             double certificate_radius)
    : shifts_(std::move(shifts)),
      words_(std::move(word_template)),
      features_in_(features_in),
      features_out_(features_out),
      nonlinearity_(nonlinearity),
      pooling_(std::move(pooling)),
      certificate_radius_(certificate_radius) {
  if (!shifts_) throw std::invalid_argument("layer needs a shift set");
  if (features_in_ < 1 || features_out_ < 1) {
    throw std::invalid_argument("feature counts must be positive");
  }
  if (words_.empty()) throw std::invalid_argument("word template must be nonempty");
  std::sort(words_.begin(), words_.end(), GradedLexLess{});
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  for (const Word& w : words_) {
    for (std::uint32_t letter : w) {
      if (letter >= shifts_->num_generators()) {
        throw std::invalid_argument("template word uses generator outside the shift set");
      }
    }
  }
  if (pooling_.cols() != shifts_->dim()) {
    throw std::invalid_argument("pooling matrix columns must equal the shift dimension");
  }
  if (spectral_norm(pooling_) > 1.0 + 1e-9) {
    throw std::invalid_argument("pooling operator norm must be <= 1");
  }
  if (!(certificate_radius_ > 0.0)) {
    throw std::invalid_argument("certificate radius must be positive");
  }
  coeffs_.assign(static_cast<std::size_t>(features_in_) * features_out_,
                 std::vector<double>(words_.size(), 0.0));
}

Layer Layer::dense_template(std::shared_ptr<const ShiftSet> shifts, int max_degree,
                            int features_in, int features_out, Nonlinearity nonlinearity) {
  const int dim = shifts->dim();
  std::vector<Word> words = words_up_to_degree(shifts->num_generators(), max_degree);
  const double radius = std::max(shifts->max_shift_norm(), 1e-12);
  return Layer(std::move(shifts), std::move(words), features_in, features_out, nonlinearity,
               Matrix::Identity(dim, dim), radius);
}

double Layer::coefficient(int out_f, int in_g, std::size_t word_idx) const {
  return coefficients(out_f, in_g).at(word_idx);
}

void Layer::set_coefficient(int out_f, int in_g, std::size_t word_idx, double value) {
  coefficients(out_f, in_g).at(word_idx) = value;
}

std::vector<double>& Layer::coefficients(int out_f, int in_g) {
  if (out_f < 0 || out_f >= features_out_ || in_g < 0 || in_g >= features_in_) {
    throw std::out_of_range("filter index out of range");
  }
  return coeffs_[static_cast<std::size_t>(out_f) * features_in_ + in_g];
}

const std::vector<double>& Layer::coefficients(int out_f, int in_g) const {
  if (out_f < 0 || out_f >= features_out_ || in_g < 0 || in_g >= features_in_) {
    throw std::out_of_range("filter index out of range");
  }
  return coeffs_[static_cast<std::size_t>(out_f) * features_in_ + in_g];
}

NcPolynomial Layer::filter(int out_f, int in_g) const {
  const std::vector<double>& c = coefficients(out_f, in_g);
  NcPolynomial::TermMap terms;
  for (std::size_t k = 0; k < words_.size(); ++k) {
    if (c[k] != 0.0) terms.emplace(words_[k], c[k]);
  }
  return NcPolynomial(shifts_->num_generators(), std::move(terms));
}

void Layer::set_filter(int out_f, int in_g, const NcPolynomial& p) {
  if (p.num_generators() != shifts_->num_generators()) {
    throw std::invalid_argument("filter generator count does not match the layer");
  }
  std::vector<double>& c = coefficients(out_f, in_g);
  std::fill(c.begin(), c.end(), 0.0);
  for (const auto& [w, value] : p.terms()) {
    const auto it = std::lower_bound(words_.begin(), words_.end(), w, GradedLexLess{});
    if (it == words_.end() || *it != w) {
      throw std::invalid_argument("filter word is outside the layer's template");
    }
    c[static_cast<std::size_t>(it - words_.begin())] = value;
  }
}

ForwardResult forward(const AlgNN& net, const std::vector<Vector>& features,
                      const std::vector<ShiftSet>* override_shifts) {
  check_features(net, features);
  if (override_shifts != nullptr && override_shifts->size() != net.layers.size()) {
    throw std::invalid_argument("override shift list must have one entry per layer");
  }

  ForwardResult result;
  result.cache.resize(net.layers.size());
  std::vector<Vector> current = features;

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    if (static_cast<int>(current.size()) != layer.features_in()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " expects " +
                                  std::to_string(layer.features_in()) + " features");
    }
    const ShiftSet& shifts = layer_shifts(layer, override_shifts, l);
    LayerCache& cache = result.cache[l];
    cache.inputs = current;
    cache.word_vecs.resize(current.size());
    for (std::size_t g = 0; g < current.size(); ++g) {
      if (current[g].size() != layer.dim_in()) {
        throw std::invalid_argument("feature length does not match layer " + std::to_string(l));
      }
      cache.word_vecs[g] = word_actions(shifts, layer.words(), current[g]);
    }

    cache.preact.resize(static_cast<std::size_t>(layer.features_out()));
    cache.pooled.resize(static_cast<std::size_t>(layer.features_out()));
    std::vector<Vector> next(static_cast<std::size_t>(layer.features_out()));
    for (int f = 0; f < layer.features_out(); ++f) {
      Vector z = Vector::Zero(layer.dim_in());
      for (int g = 0; g < layer.features_in(); ++g) {
        const std::vector<double>& c = layer.coefficients(f, g);
        const auto& vecs = cache.word_vecs[static_cast<std::size_t>(g)];
        for (std::size_t k = 0; k < c.size(); ++k) {
          if (c[k] != 0.0) z += c[k] * vecs[k];
        }
      }
      Vector u(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        u(i) = apply_nonlinearity(layer.nonlinearity(), z(i));
      }
      cache.preact[static_cast<std::size_t>(f)] = std::move(z);
      Vector y = layer.pooling() * u;
      cache.pooled[static_cast<std::size_t>(f)] = y;
      next[static_cast<std::size_t>(f)] = std::move(y);
    }
    current = std::move(next);
  }

  const Layer& last = net.layers.back();
  const Eigen::Index flat_size =
      static_cast<Eigen::Index>(last.features_out()) * last.dim_out();
  if (net.readout_weight.cols() != flat_size) {
    throw std::invalid_argument("readout expects " + std::to_string(net.readout_weight.cols()) +
                                " inputs but the final layer produces " +
                                std::to_string(flat_size));
  }
  Vector flat(flat_size);
  for (int f = 0; f < last.features_out(); ++f) {
    flat.segment(static_cast<Eigen::Index>(f) * last.dim_out(), last.dim_out()) =
        current[static_cast<std::size_t>(f)];
  }
  result.output = net.readout_weight * flat + net.readout_bias;
  return result;
}

ForwardResult forward(const AlgNN& net, const Vector& x,
                      const std::vector<ShiftSet>* override_shifts) {
  return forward(net, std::vector<Vector>{x}, override_shifts);
}

Gradients zero_gradients(const AlgNN& net) {
  Gradients g;
  g.filter_coeffs.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    g.filter_coeffs[l].assign(
        static_cast<std::size_t>(layer.features_in()) * layer.features_out(),
        std::vector<double>(layer.words().size(), 0.0));
  }
  g.readout_weight = Matrix::Zero(net.readout_weight.rows(), net.readout_weight.cols());
  g.readout_bias = Vector::Zero(net.readout_bias.size());
  return g;
}

void backward(const AlgNN& net, const ForwardResult& fwd, const Vector& output_grad,
              Gradients& grads) {
  if (fwd.cache.size() != net.layers.size()) {
    throw std::invalid_argument("stale cache: layer count mismatch");
  }
  if (output_grad.size() != net.readout_weight.rows()) {
    throw std::invalid_argument("output gradient length does not match readout");
  }

  const Layer& last = net.layers.back();
  const Eigen::Index flat_size =
      static_cast<Eigen::Index>(last.features_out()) * last.dim_out();
  Vector flat(flat_size);
  for (int f = 0; f < last.features_out(); ++f) {
    flat.segment(static_cast<Eigen::Index>(f) * last.dim_out(), last.dim_out()) =
        fwd.cache.back().pooled[static_cast<std::size_t>(f)];
  }
  grads.readout_weight += output_grad * flat.transpose();
  grads.readout_bias += output_grad;

  const Vector flat_grad = net.readout_weight.transpose() * output_grad;
  std::vector<Vector> grad_pooled(static_cast<std::size_t>(last.features_out()));
  for (int f = 0; f < last.features_out(); ++f) {
    grad_pooled[static_cast<std::size_t>(f)] =
        flat_grad.segment(static_cast<Eigen::Index>(f) * last.dim_out(), last.dim_out());
  }

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Layer& layer = net.layers[l];
    const LayerCache& cache = fwd.cache[l];
    if (cache.preact.size() != static_cast<std::size_t>(layer.features_out()) ||
        cache.word_vecs.size() != static_cast<std::size_t>(layer.features_in())) {
      throw std::invalid_argument("stale cache: layer " + std::to_string(l) +
                                  " geometry mismatch");
    }

    std::vector<Vector> grad_inputs(static_cast<std::size_t>(layer.features_in()),
                                    Vector::Zero(layer.dim_in()));
    for (int f = 0; f < layer.features_out(); ++f) {
      const Vector grad_post =
          layer.pooling().transpose() * grad_pooled[static_cast<std::size_t>(f)];
      const Vector& z = cache.preact[static_cast<std::size_t>(f)];
      Vector grad_pre(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        grad_pre(i) = grad_post(i) * nonlinearity_derivative(layer.nonlinearity(), z(i));
      }

      for (int g = 0; g < layer.features_in(); ++g) {
        const auto& vecs = cache.word_vecs[static_cast<std::size_t>(g)];
        auto& cg = grads.filter_coeffs[l][static_cast<std::size_t>(f) * layer.features_in() + g];
        for (std::size_t k = 0; k < vecs.size(); ++k) {
          cg[k] += grad_pre.dot(vecs[k]);
        }
      }

      if (l > 0) {
        const std::vector<Vector> adj =
            word_adjoint_actions(layer.shifts(), layer.words(), grad_pre);
        for (int g = 0; g < layer.features_in(); ++g) {
          const std::vector<double>& c = layer.coefficients(f, g);
          Vector& gi = grad_inputs[static_cast<std::size_t>(g)];
          for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k] != 0.0) gi += c[k] * adj[k];
          }
        }
      }
    }
    grad_pooled = std::move(grad_inputs);
  }
}

void initialize_parameters(AlgNN& net, std::uint64_t seed) {
  Rng rng(seed);
  for (Layer& layer : net.layers) {
    const double bound =
        1.0 / std::sqrt(static_cast<double>(layer.words().size()) * layer.features_in());
    for (int f = 0; f < layer.features_out(); ++f) {
      for (int g = 0; g < layer.features_in(); ++g) {
        for (std::size_t k = 0; k < layer.words().size(); ++k) {
          layer.set_coefficient(f, g, k, rng.uniform(-bound, bound));
        }
      }
    }
  }
  const double rbound = 1.0 / std::sqrt(static_cast<double>(net.readout_weight.cols()));
  for (Eigen::Index c = 0; c < net.readout_weight.cols(); ++c) {
    for (Eigen::Index r = 0; r < net.readout_weight.rows(); ++r) {
      net.readout_weight(r, c) = rng.uniform(-rbound, rbound);
    }
  }
  net.readout_bias.setZero();
}

namespace {

// Fixed walk order over every trainable scalar; params and grads share it.
template <typename Fn>
void for_each_parameter(AlgNN& net, Gradients& grads, Fn&& fn) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    for (int f = 0; f < layer.features_out(); ++f) {
      for (int g = 0; g < layer.features_in(); ++g) {
        std::vector<double>& c = layer.coefficients(f, g);
        auto& cg = grads.filter_coeffs[l][static_cast<std::size_t>(f) * layer.features_in() + g];
        for (std::size_t k = 0; k < c.size(); ++k) fn(c[k], cg[k]);
      }
    }
  }
  for (Eigen::Index i = 0; i < net.readout_weight.size(); ++i) {
    fn(net.readout_weight.data()[i], grads.readout_weight.data()[i]);
  }
  for (Eigen::Index i = 0; i < net.readout_bias.size(); ++i) {
    fn(net.readout_bias.data()[i], grads.readout_bias.data()[i]);
  }
}

std::size_t parameter_count(const AlgNN& net) {
  std::size_t count = 0;
  for (const Layer& layer : net.layers) {
    count += static_cast<std::size_t>(layer.features_in()) * layer.features_out() *
             layer.words().size();
  }
  count += static_cast<std::size_t>(net.readout_weight.size());
  count += static_cast<std::size_t>(net.readout_bias.size());
  return count;
}

void set_zero(Gradients& g) {
  for (auto& per_layer : g.filter_coeffs) {
    for (auto& c : per_layer) std::fill(c.begin(), c.end(), 0.0);
  }
  g.readout_weight.setZero();
  g.readout_bias.setZero();
}

double accumulate_penalty_and_gradient(AlgNN& net, Gradients& grads, double il_weight,
                                       double tau) {
  double total = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Layer& layer = net.layers[l];
    for (int f = 0; f < layer.features_out(); ++f) {
      for (int g = 0; g < layer.features_in(); ++g) {
        const IlPenalty pen =
            il_penalty(layer.filter(f, g), layer.certificate_radius(), tau);
        total += pen.value;
        if (il_weight == 0.0) continue;
        auto& cg = grads.filter_coeffs[l][static_cast<std::size_t>(f) * layer.features_in() + g];
        const std::vector<Word>& words = layer.words();
        for (std::size_t k = 0; k < words.size(); ++k) {
          const auto it = pen.gradient.find(words[k]);
          if (it != pen.gradient.end()) cg[k] += il_weight * it->second;
        }
      }
    }
  }
  return total;
}

}  // namespace

TrainResult train(AlgNN net, const std::vector<TrainSample>& dataset, const TrainConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
  if (cfg.epochs < 1 || !(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("epochs and learning rate must be positive");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be positive");

  Rng rng(cfg.seed);
  Gradients grads = zero_gradients(net);

  const std::size_t n_params = parameter_count(net);
  std::vector<double> m1(n_params, 0.0), m2(n_params, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));
  double last_finite = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = rng.derive(static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      set_zero(grads);

      for (std::size_t i = start; i < stop; ++i) {
        const TrainSample& sample = dataset[order[i]];
        const ForwardResult fwd = forward(net, sample.input);
        const Vector residual = fwd.output - sample.target;
        const double loss = residual.squaredNorm();
        epoch_loss += loss;
        if (!std::isfinite(loss)) {
          throw TrainingDiverged("epoch " + std::to_string(epoch) +
                                 ": loss became non-finite (last finite epoch loss " +
                                 format_double(last_finite) + ")");
        }
        backward(net, fwd, (2.0 * inv_batch) * residual, grads);
      }
      accumulate_penalty_and_gradient(net, grads, cfg.il_weight, cfg.il_tau);

      ++step;
      if (cfg.optimizer == Optimizer::sgd) {
        for_each_parameter(net, grads, [&](double& p, double& g) {
          p -= cfg.learning_rate * g;
        });
      } else {
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        std::size_t idx = 0;
        for_each_parameter(net, grads, [&](double& p, double& g) {
          m1[idx] = beta1 * m1[idx] + (1.0 - beta1) * g;
          m2[idx] = beta2 * m2[idx] + (1.0 - beta2) * g * g;
          p -= cfg.learning_rate * (m1[idx] / c1) / (std::sqrt(m2[idx] / c2) + adam_eps);
          ++idx;
        });
      }
    }

    EpochStats stats;
    stats.mse = epoch_loss / static_cast<double>(dataset.size());
    Gradients sink = zero_gradients(net);
    stats.penalty = accumulate_penalty_and_gradient(net, sink, 0.0, cfg.il_tau);
    if (!std::isfinite(stats.mse) || !std::isfinite(stats.penalty)) {
      throw TrainingDiverged("epoch " + std::to_string(epoch) +
                             ": epoch statistics became non-finite");
    }
    last_finite = stats.mse;
    result.history.push_back(stats);
  }
  result.net = std::move(net);
  return result;
}

double evaluate_rmse(const AlgNN& net, const std::vector<TrainSample>& dataset,
                     const std::vector<ShiftSet>* override_shifts) {
  if (dataset.empty()) throw std::invalid_argument("evaluation dataset is empty");
  double sum = 0.0;
  long count = 0;
  for (const TrainSample& sample : dataset) {
    const ForwardResult fwd = forward(net, sample.input, override_shifts);
    sum += (fwd.output - sample.target).squaredNorm();
    count += sample.target.size();
  }
  return std::sqrt(sum / static_cast<double>(count));
}

Matrix spectral_pooling(const SpectralDecomposition& d, int dim_out) {
  if (dim_out < 1 || dim_out > d.basis.cols()) {
    throw std::invalid_argument("pooling output dimension out of range");
  }
  return d.basis.leftCols(dim_out).transpose();
}

Matrix truncation_pooling(int dim_in, int dim_out) {
  if (dim_out < 1 || dim_out > dim_in) {
    throw std::invalid_argument("pooling output dimension out of range");
  }
  Matrix p = Matrix::Zero(dim_out, dim_in);
  p.topLeftCorner(dim_out, dim_out).setIdentity();
  return p;
}

double layer_operator_bound(const Layer& layer) {
  double sum_sq = 0.0;
  for (int f = 0; f < layer.features_out(); ++f) {
    double row = 0.0;
    for (int g = 0; g < layer.features_in(); ++g) {
      row += operator_norm_bound(layer.filter(f, g), layer.shifts(), 0).bound;
    }
    sum_sq += row * row;
  }
  return std::sqrt(sum_sq);
}

void save_model(const std::string& dir, const AlgNN& net, std::uint64_t seed) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create directory " + root.string() + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["seed"] = seed;
  manifest["num_layers"] = net.layers.size();
  manifest["layers"] = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    nlohmann::ordered_json jl;
    jl["features_in"] = layer.features_in();
    jl["features_out"] = layer.features_out();
    jl["dim_in"] = layer.dim_in();
    jl["dim_out"] = layer.dim_out();
    jl["num_generators"] = layer.shifts().num_generators();
    jl["nonlinearity"] = to_string(layer.nonlinearity());
    jl["certificate_radius"] = layer.certificate_radius();
    jl["operator_bound"] = layer_operator_bound(layer);
    jl["words"] = layer.words();
    manifest["layers"].push_back(jl);

    save_matrix_csv((root / ("layer" + std::to_string(l) + "_pooling.csv")).string(),
                    layer.pooling());
    for (int f = 0; f < layer.features_out(); ++f) {
      for (int g = 0; g < layer.features_in(); ++g) {
        save_polynomial((root / ("layer" + std::to_string(l) + "_filter_" + std::to_string(f) +
                                 "_" + std::to_string(g) + ".txt"))
                            .string(),
                        layer.filter(f, g));
      }
    }
  }
  manifest["readout"] = {{"outputs", net.readout_weight.rows()},
                         {"inputs", net.readout_weight.cols()}};
  save_matrix_csv((root / "readout_weight.csv").string(), net.readout_weight);
  save_matrix_csv((root / "readout_bias.csv").string(), net.readout_bias);

  std::ofstream out(root / "model.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (root / "model.json").string());
  out << manifest.dump(2) << '\n';
}

AlgNN load_model(const std::string& dir, std::vector<std::shared_ptr<const ShiftSet>> shifts) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::ifstream in(root / "model.json");
  if (!in) throw IoError("cannot open " + (root / "model.json").string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError((root / "model.json").string() + ": " + e.what());
  }

  const std::size_t num_layers = manifest.at("num_layers").get<std::size_t>();
  if (shifts.size() != num_layers) {
    throw std::invalid_argument("expected " + std::to_string(num_layers) +
                                " shift sets, got " + std::to_string(shifts.size()));
  }

  AlgNN net;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const auto& jl = manifest.at("layers").at(l);
    std::vector<Word> words;
    for (const auto& jw : jl.at("words")) {
      words.push_back(jw.get<Word>());
    }
    const int dim_in = jl.at("dim_in").get<int>();
    const auto num_gen = jl.at("num_generators").get<std::uint32_t>();
    if (shifts[l]->dim() != dim_in || shifts[l]->num_generators() != num_gen) {
      throw std::invalid_argument("shift set " + std::to_string(l) +
                                  " does not match the checkpoint manifest");
    }
    Matrix pooling =
        load_matrix_csv((root / ("layer" + std::to_string(l) + "_pooling.csv")).string());
    Layer layer(shifts[l], words, jl.at("features_in").get<int>(),
                jl.at("features_out").get<int>(),
                nonlinearity_from_string(jl.at("nonlinearity").get<std::string>()),
                std::move(pooling), jl.at("certificate_radius").get<double>());
    for (int f = 0; f < layer.features_out(); ++f) {
      for (int g = 0; g < layer.features_in(); ++g) {
        const NcPolynomial p =
            load_polynomial((root / ("layer" + std::to_string(l) + "_filter_" +
                                     std::to_string(f) + "_" + std::to_string(g) + ".txt"))
                                .string(),
                            num_gen);
        layer.set_filter(f, g, p);
      }
    }
    net.layers.push_back(std::move(layer));
  }
  net.readout_weight = load_matrix_csv((root / "readout_weight.csv").string());
  net.readout_bias = load_matrix_csv((root / "readout_bias.csv").string()).col(0);
  return net;
}

}  // namespace ncasp
