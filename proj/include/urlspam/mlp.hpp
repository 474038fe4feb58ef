#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "urlspam/error.hpp"
#include "urlspam/logistic_regression.hpp"
#include "urlspam/matrix.hpp"
#include "urlspam/random.hpp"
#include "urlspam/serialization.hpp"

namespace urlspam {

struct MlpParams {
  std::vector<int> hidden_layer_sizes{14, 9};
  double l2_alpha = 0.1;
  double learning_rate_init = 1e-3;
  bool adaptive_rate = true;  // halve the step on a loss plateau
  int max_iter = 240;         // epochs
  double tol = 1e-4;
  int n_iter_no_change = 10;
  int batch_size = 200;       // capped at the row count; 0 means full batch
  double beta_1 = 0.9;
  double beta_2 = 0.999;
  double epsilon = 1e-8;
  int max_step_halvings = 3;
};

/// Fully connected ReLU network with one sigmoid output unit.
///
/// Parameters live in one flat vector: for each layer, the weight matrix
/// (row-major, fan_out x fan_in) followed by its bias vector.
class MlpNetwork {
 public:
  MlpNetwork() = default;
  explicit MlpNetwork(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2 || sizes_.back() != 1) throw Error(ErrorCode::InvalidParameter, "MLP needs >= 2 layers ending in 1");
    for (int s : sizes_) {
      if (s < 1) throw Error(ErrorCode::InvalidParameter, "MLP layer sizes must be >= 1");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      weight_offset_.push_back(offset);
      offset += static_cast<std::size_t>(sizes_[l]) * static_cast<std::size_t>(sizes_[l + 1]);
      bias_offset_.push_back(offset);
      offset += static_cast<std::size_t>(sizes_[l + 1]);
    }
    params_.assign(offset, 0.0);
  }

  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  std::size_t layers() const noexcept { return sizes_.size() - 1; }
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }
  std::size_t weight_offset(std::size_t l) const { return weight_offset_[l]; }
  std::size_t bias_offset(std::size_t l) const { return bias_offset_[l]; }
  std::size_t fan_in(std::size_t l) const { return static_cast<std::size_t>(sizes_[l]); }
  std::size_t fan_out(std::size_t l) const { return static_cast<std::size_t>(sizes_[l + 1]); }

  bool is_weight(std::size_t index) const {
    for (std::size_t l = 0; l < layers(); ++l) {
      if (index >= weight_offset_[l] && index < bias_offset_[l]) return true;
    }
    return false;
  }

  /// Glorot-style uniform initialisation of weights and biases.
  /// Bound sqrt(6 / (fan_in + fan_out)) for hidden layers and
  /// sqrt(2 / (fan_in + fan_out)) for the sigmoid output layer.
  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l < layers(); ++l) {
      const double factor = l + 1 == layers() ? 2.0 : 6.0;
      const double bound = std::sqrt(factor / static_cast<double>(fan_in(l) + fan_out(l)));
      const std::size_t end = bias_offset_[l] + fan_out(l);
      for (std::size_t i = weight_offset_[l]; i < end; ++i) params_[i] = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  }

  /// Output pre-activation; `activations` receives each layer's outputs.
  double forward(std::span<const double> x, std::vector<std::vector<double>>& activations) const {
    activations.resize(sizes_.size());
    activations[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers(); ++l) {
      const auto& in = activations[l];
      auto& out = activations[l + 1];
      out.assign(fan_out(l), 0.0);
      const double* w = params_.data() + weight_offset_[l];
      const double* b = params_.data() + bias_offset_[l];
      const bool hidden = l + 1 < layers();
      for (std::size_t o = 0; o < fan_out(l); ++o) {
        double s = b[o];
        const double* wr = w + o * fan_in(l);
        for (std::size_t i = 0; i < fan_in(l); ++i) s += wr[i] * in[i];
        out[o] = hidden ? std::max(0.0, s) : s;
      }
    }
    return activations.back()[0];
  }

  double predict_score(std::span<const double> x) const {
    std::vector<std::vector<double>> act;
    return sigmoid(forward(x, act));
  }

  void save(io::Writer& w) const {
    w.ints("layers", sizes_);
    w.doubles("params", params_);
  }

  static MlpNetwork load(io::Reader& r) {
    MlpNetwork net(r.ints("layers"));
    auto params = r.doubles("params");
    if (params.size() != net.params_.size()) throw Error(ErrorCode::ModelFormat, "MLP parameter count mismatch");
    net.params_ = std::move(params);
    return net;
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
  std::vector<double> params_;
};

/// Mean log loss over `rows` plus l2_alpha / (2 |rows|) times the squared
/// norm of all weights (biases unpenalised), with its exact gradient.
inline LossAndGradient mlp_loss_and_gradient(const MlpNetwork& net, const Matrix& x, std::span<const int> y,
                                             std::span<const std::size_t> rows, double l2_alpha) {
  LossAndGradient out;
  const auto& params = net.params();
  out.gradient.assign(params.size(), 0.0);
  const double n = static_cast<double>(rows.size());
  std::vector<std::vector<double>> act;
  std::vector<double> delta, prev_delta;
  for (auto r : rows) {
    const double f = net.forward(x.row(r), act);
    out.value += softplus(f) - static_cast<double>(y[r]) * f;
    delta.assign(1, sigmoid(f) - static_cast<double>(y[r]));
    for (std::size_t l = net.layers(); l-- > 0;) {
      const std::size_t in = net.fan_in(l), outs = net.fan_out(l);
      double* gw = out.gradient.data() + net.weight_offset(l);
      double* gb = out.gradient.data() + net.bias_offset(l);
      const auto& a_in = act[l];
      for (std::size_t o = 0; o < outs; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * a_in[i];
      }
      if (l == 0) break;
      prev_delta.assign(in, 0.0);
      const double* w = params.data() + net.weight_offset(l);
      for (std::size_t o = 0; o < outs; ++o) {
        for (std::size_t i = 0; i < in; ++i) prev_delta[i] += w[o * in + i] * delta[o];
      }
      for (std::size_t i = 0; i < in; ++i) {
        if (a_in[i] <= 0.0) prev_delta[i] = 0.0;  // ReLU
      }
      std::swap(delta, prev_delta);
    }
  }
  out.value /= n;
  for (auto& g : out.gradient) g /= n;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const std::size_t begin = net.weight_offset(l), end = net.bias_offset(l);
    for (std::size_t i = begin; i < end; ++i) {
      out.value += 0.5 * l2_alpha * params[i] * params[i] / n;
      out.gradient[i] += l2_alpha * params[i] / n;
    }
  }
  return out;
}

struct MlpModel {
  MlpNetwork network;
  int epochs = 0;

  double predict_score(std::span<const double> x) const { return network.predict_score(x); }

  void save(io::Writer& w) const {
    network.save(w);
    w.line("epochs", epochs);
  }

  static MlpModel load(io::Reader& r) {
    MlpModel m;
    m.network = MlpNetwork::load(r);
    m.epochs = static_cast<int>(r.integer("epochs"));
    return m;
  }
};

/// Mini-batch Adam on the loss above. Each epoch visits the rows in a fresh
/// seeded order. The epoch loss is the size-weighted mean of batch losses; when
/// it fails to improve on the best so far by tol for n_iter_no_change epochs
/// the step is halved (adaptive_rate), and once max_step_halvings halvings are
/// spent the next plateau ends training.
inline MlpModel mlp_fit(const Matrix& x, std::span<const int> y, const MlpParams& params, std::uint64_t seed) {
  require_fit_inputs(x, y);
  if (params.max_iter < 0) throw Error(ErrorCode::InvalidParameter, "max_iter must be >= 0");
  if (!(params.learning_rate_init > 0.0)) throw Error(ErrorCode::InvalidParameter, "learning_rate_init must be positive");
  if (!(params.l2_alpha >= 0.0)) throw Error(ErrorCode::InvalidParameter, "l2_alpha must be >= 0");
  std::vector<int> sizes{static_cast<int>(x.cols())};
  sizes.insert(sizes.end(), params.hidden_layer_sizes.begin(), params.hidden_layer_sizes.end());
  sizes.push_back(1);

  MlpModel model;
  model.network = MlpNetwork(sizes);
  model.network.initialize(derive_seed(seed, 0));
  Rng order_rng(derive_seed(seed, 1));

  auto& theta = model.network.params();
  std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
  const std::size_t n = x.rows();
  const std::size_t batch = params.batch_size <= 0 ? n : std::min<std::size_t>(static_cast<std::size_t>(params.batch_size), n);
  double rate = params.learning_rate_init;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  int halvings = 0;
  std::uint64_t step = 0;
  auto order = iota_indices(n);

  for (int epoch = 0; epoch < params.max_iter; ++epoch) {
    shuffle(order, order_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      const auto lg = mlp_loss_and_gradient(model.network, x, y, rows, params.l2_alpha);
      epoch_loss += lg.value * static_cast<double>(rows.size());
      ++step;
      const double correction = std::sqrt(1.0 - std::pow(params.beta_2, static_cast<double>(step))) /
                                (1.0 - std::pow(params.beta_1, static_cast<double>(step)));
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = lg.gradient[i];
        m1[i] = params.beta_1 * m1[i] + (1.0 - params.beta_1) * g;
        m2[i] = params.beta_2 * m2[i] + (1.0 - params.beta_2) * g * g;
        theta[i] -= rate * correction * m1[i] / (std::sqrt(m2[i]) + params.epsilon);
      }
    }
    epoch_loss /= static_cast<double>(n);
    model.epochs = epoch + 1;

    if (epoch_loss > best_loss - params.tol) {
      ++stale;
    } else {
      stale = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
    if (stale >= params.n_iter_no_change) {
      if (!params.adaptive_rate || halvings >= params.max_step_halvings) break;
      rate /= 2.0;
      ++halvings;
      stale = 0;
    }
  }
  return model;
}

}  // namespace urlspam
