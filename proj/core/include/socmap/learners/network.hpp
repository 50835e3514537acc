#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "socmap/learners/spec.hpp"
#include "socmap/matrix.hpp"
#include "socmap/random.hpp"

namespace socmap {

enum class Activation { sigmoid, relu };

/// Fully connected layer; weights are out x in, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

/// Per-row multipliers applied to hidden activations, concatenated over the
/// hidden layers (0 for a dropped unit, 1/(1-rate) for a kept one).
using DropoutMask = std::vector<double>;

/// Feed-forward regressor: hidden layers with a shared activation and a single
/// linear output unit.
class FeedForwardNet {
 public:
  FeedForwardNet() = default;
  FeedForwardNet(std::span<const std::size_t> widths, Activation hidden);

  static FeedForwardNet initialized(std::span<const std::size_t> widths, Activation hidden,
                                    WeightInit init, Rng& rng);

  double forward(std::span<const double> x, const DropoutMask* mask = nullptr) const;

  std::size_t parameter_count() const;
  std::size_t hidden_units() const;
  std::vector<double> parameters() const;  // per layer: weights, then bias
  void set_parameters(std::span<const double> theta);

  /// Mean squared error over `rows` plus decay * sum of squared weights
  /// (biases excluded). Gradient w.r.t. parameters() is written to `grad`
  /// when it is non-empty. `masks`, when given, aligns with `rows`.
  double loss_and_gradient(const Matrix& x, std::span<const double> y,
                           std::span<const std::size_t> rows, double decay, std::span<double> grad,
                           std::span<const DropoutMask> masks = {}) const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  Activation activation() const { return activation_; }

  bool operator==(const FeedForwardNet&) const = default;

 private:
  std::vector<DenseLayer> layers_;
  Activation activation_ = Activation::relu;
};

/// Network with the input and target standardization it was trained under.
struct NetworkModel {
  Standardizer scaler;
  double y_mean = 0.0;
  double y_scale = 1.0;
  FeedForwardNet net;

  double predict(std::span<const double> x) const;
  /// Mean squared error of the network on the standardized training scale.
  double loss(const Matrix& x, std::span<const double> y) const;

  bool operator==(const NetworkModel&) const = default;
};

struct NetworkFit {
  NetworkModel model;
  std::vector<double> loss_curve;
};

/// One sigmoid hidden layer, full-batch gradient descent with momentum on
/// MSE + decay * |W|^2.
NetworkFit fit_mlp(const Matrix& x, std::span<const double> y, const AnnParams& params,
                   std::uint64_t seed);

/// `hidden` rectifier layers of `size` units, mini-batch SGD with inverted
/// dropout on the hidden activations. Dropout is inactive at prediction.
NetworkFit fit_dnn(const Matrix& x, std::span<const double> y, const DnnParams& params,
                   std::uint64_t seed);

/// Draws an inverted-dropout mask for every hidden unit of `net`.
DropoutMask draw_dropout_mask(const FeedForwardNet& net, double rate, Rng& rng);

}  // namespace socmap
