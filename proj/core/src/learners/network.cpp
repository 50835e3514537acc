#include "socmap/learners/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "socmap/error.hpp"

namespace socmap {

namespace {

double activate(Activation a, double z) {
  return a == Activation::sigmoid ? 1.0 / (1.0 + std::exp(-z)) : (z > 0.0 ? z : 0.0);
}

// Derivative expressed through the pre-activation z and activation value h.
double activate_grad(Activation a, double z, double h) {
  return a == Activation::sigmoid ? h * (1.0 - h) : (z > 0.0 ? 1.0 : 0.0);
}

struct Standardized {
  Standardizer scaler;
  Matrix x;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<double> y;
};

Standardized standardize(const Matrix& x, std::span<const double> y) {
  Standardized s;
  s.scaler = Standardizer::fit(x);
  s.x = s.scaler.apply(x);
  const std::size_t n = y.size();
  for (double v : y) s.y_mean += v;
  s.y_mean /= static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : y) ss += (v - s.y_mean) * (v - s.y_mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd > 1e-12) s.y_scale = sd;
  }
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.y[i] = (y[i] - s.y_mean) / s.y_scale;
  return s;
}

void check_inputs(const Matrix& x, std::span<const double> y) {
  if (x.rows() != y.size()) fail(Errc::shape, "X rows and y length differ");
  if (x.rows() == 0 || x.cols() == 0) fail(Errc::insufficient_data, "network needs data");
}

}  // namespace

FeedForwardNet::FeedForwardNet(std::span<const std::size_t> widths, Activation hidden)
    : activation_(hidden) {
  if (widths.size() < 2 || widths.back() != 1) {
    fail(Errc::configuration, "network widths must run from inputs to a single output");
  }
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

FeedForwardNet FeedForwardNet::initialized(std::span<const std::size_t> widths, Activation hidden,
                                           WeightInit init, Rng& rng) {
  FeedForwardNet net(widths, hidden);
  for (auto& layer : net.layers_) {
    if (init == WeightInit::he_normal) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.in)));
      for (auto& w : layer.weights) w = dist(rng);
    } else {
      const double a = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
      std::uniform_real_distribution<double> dist(-a, a);
      for (auto& w : layer.weights) w = dist(rng);
    }
  }
  return net;
}

std::size_t FeedForwardNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::size_t FeedForwardNet::hidden_units() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) n += layers_[l].out;
  return n;
}

std::vector<double> FeedForwardNet::parameters() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  for (const auto& l : layers_) {
    theta.insert(theta.end(), l.weights.begin(), l.weights.end());
    theta.insert(theta.end(), l.bias.begin(), l.bias.end());
  }
  return theta;
}

void FeedForwardNet::set_parameters(std::span<const double> theta) {
  if (theta.size() != parameter_count()) fail(Errc::shape, "parameter vector has the wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (auto& w : l.weights) w = theta[k++];
    for (auto& b : l.bias) b = theta[k++];
  }
}

double FeedForwardNet::forward(std::span<const double> x, const DropoutMask* mask) const {
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> next;
  std::size_t unit = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const bool hidden = l + 1 < layers_.size();
    next.assign(layer.out, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double z = layer.bias[o];
      const double* w = layer.weights.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) z += w[i] * a[i];
      if (hidden) {
        z = activate(activation_, z);
        if (mask) z *= (*mask)[unit + o];
      }
      next[o] = z;
    }
    if (hidden) unit += layer.out;
    a.swap(next);
  }
  return a[0];
}

double FeedForwardNet::loss_and_gradient(const Matrix& x, std::span<const double> y,
                                         std::span<const std::size_t> rows, double decay,
                                         std::span<double> grad,
                                         std::span<const DropoutMask> masks) const {
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != parameter_count()) fail(Errc::shape, "gradient buffer has the wrong length");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  if (!masks.empty() && masks.size() != rows.size()) fail(Errc::shape, "one dropout mask per row");

  const std::size_t depth = layers_.size();
  std::vector<std::size_t> offset(depth);
  for (std::size_t l = 0, k = 0; l < depth; ++l) {
    offset[l] = k;
    k += layers_[l].weights.size() + layers_[l].bias.size();
  }

  // pre[l] / act[l] hold layer l outputs; act[-1] is the input row.
  std::vector<std::vector<double>> pre(depth), act(depth);
  std::vector<double> delta, prev_delta;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto input = x.row(rows[r]);
    const DropoutMask* mask = masks.empty() ? nullptr : &masks[r];
    std::size_t unit = 0;
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& layer = layers_[l];
      const bool hidden = l + 1 < depth;
      std::span<const double> in = l == 0 ? input : std::span<const double>(act[l - 1]);
      pre[l].assign(layer.out, 0.0);
      act[l].assign(layer.out, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        double z = layer.bias[o];
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) z += w[i] * in[i];
        pre[l][o] = z;
        double h = hidden ? activate(activation_, z) : z;
        if (hidden && mask) h *= (*mask)[unit + o];
        act[l][o] = h;
      }
      if (hidden) unit += layer.out;
    }
    const double err = act[depth - 1][0] - y[rows[r]];
    loss += err * err * inv_n;
    if (!want_grad) continue;

    delta.assign(1, 2.0 * err * inv_n);
    std::size_t unit_end = unit;
    for (std::size_t l = depth; l-- > 0;) {
      const auto& layer = layers_[l];
      std::span<const double> in = l == 0 ? input : std::span<const double>(act[l - 1]);
      double* gw = grad.data() + offset[l];
      double* gb = gw + layer.weights.size();
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        for (std::size_t i = 0; i < layer.in; ++i) gw[o * layer.in + i] += d * in[i];
        gb[o] += d;
      }
      if (l == 0) break;
      // Back through layer l-1's activation (and its dropout multipliers).
      const auto& below = layers_[l - 1];
      unit_end -= below.out;
      prev_delta.assign(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) prev_delta[i] += w[i] * d;
      }
      for (std::size_t i = 0; i < layer.in; ++i) {
        const double m = mask ? (*mask)[unit_end + i] : 1.0;
        const double h = activate(activation_, pre[l - 1][i]);
        prev_delta[i] *= activate_grad(activation_, pre[l - 1][i], h) * m;
      }
      delta.swap(prev_delta);
    }
  }

  if (decay > 0.0) {
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& w = layers_[l].weights;
      for (std::size_t k = 0; k < w.size(); ++k) {
        loss += decay * w[k] * w[k];
        if (want_grad) grad[offset[l] + k] += 2.0 * decay * w[k];
      }
    }
  }
  return loss;
}

DropoutMask draw_dropout_mask(const FeedForwardNet& net, double rate, Rng& rng) {
  DropoutMask mask(net.hidden_units(), 1.0);
  if (rate <= 0.0) return mask;
  std::bernoulli_distribution drop(rate);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& m : mask) m = drop(rng) ? 0.0 : keep_scale;
  return mask;
}

double NetworkModel::predict(std::span<const double> x) const {
  std::vector<double> xs(x.size());
  scaler.apply_row(x, xs);
  return y_mean + y_scale * net.forward(xs);
}

double NetworkModel::loss(const Matrix& x, std::span<const double> y) const {
  const Matrix xs = scaler.apply(x);
  std::vector<double> ys(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] = (y[i] - y_mean) / y_scale;
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  return net.loss_and_gradient(xs, ys, rows, 0.0, {});
}

NetworkFit fit_mlp(const Matrix& x, std::span<const double> y, const AnnParams& params,
                   std::uint64_t seed) {
  check_inputs(x, y);
  if (params.size < 1) fail(Errc::spec, "ANN.size must be >= 1");
  const auto data = standardize(x, y);
  Rng rng(seed);
  const std::size_t widths[] = {x.cols(), static_cast<std::size_t>(params.size), 1};
  FeedForwardNet net(widths, Activation::sigmoid);
  {
    std::uniform_real_distribution<double> dist(-0.7, 0.7);
    auto theta = net.parameters();
    for (auto& t : theta) t = dist(rng);
    net.set_parameters(theta);
  }

  NetworkFit fit;
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  auto theta = net.parameters();
  std::vector<double> grad(theta.size()), velocity(theta.size(), 0.0);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const double loss = net.loss_and_gradient(data.x, data.y, rows, params.decay, grad);
    if (!std::isfinite(loss)) {
      fail(Errc::training, "ANN loss diverged at epoch " + std::to_string(epoch) +
                               "; try a smaller step");
    }
    fit.loss_curve.push_back(loss);
    for (std::size_t k = 0; k < theta.size(); ++k) {
      velocity[k] = params.momentum * velocity[k] - params.step * grad[k];
      theta[k] += velocity[k];
    }
    net.set_parameters(theta);
  }
  fit.model = NetworkModel{data.scaler, data.y_mean, data.y_scale, std::move(net)};
  return fit;
}

NetworkFit fit_dnn(const Matrix& x, std::span<const double> y, const DnnParams& params,
                   std::uint64_t seed) {
  check_inputs(x, y);
  if (params.hidden < 1 || params.size < 1) fail(Errc::spec, "DNN needs hidden >= 1 and size >= 1");
  if (params.dropout < 0.0 || params.dropout >= 1.0) fail(Errc::spec, "DNN.dropout must be in [0, 1)");
  const auto data = standardize(x, y);
  Rng rng(seed);
  std::vector<std::size_t> widths{x.cols()};
  for (int l = 0; l < params.hidden; ++l) widths.push_back(static_cast<std::size_t>(params.size));
  widths.push_back(1);
  FeedForwardNet net = FeedForwardNet::initialized(widths, Activation::relu, params.init, rng);

  NetworkFit fit;
  const std::size_t n = x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto theta = net.parameters();
  std::vector<double> grad(theta.size()), velocity(theta.size(), 0.0);
  std::vector<DropoutMask> masks;
  const auto batch = static_cast<std::size_t>(params.batch_size);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::span<const std::size_t> rows(order.data() + start, end - start);
      masks.clear();
      if (params.dropout > 0.0) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
          masks.push_back(draw_dropout_mask(net, params.dropout, rng));
        }
      }
      const double loss = net.loss_and_gradient(data.x, data.y, rows, 0.0, grad, masks);
      if (!std::isfinite(loss)) {
        fail(Errc::training, "DNN loss diverged at epoch " + std::to_string(epoch) +
                                 "; try a smaller learning rate");
      }
      epoch_loss += loss * static_cast<double>(rows.size());
      for (std::size_t k = 0; k < theta.size(); ++k) {
        velocity[k] = params.momentum * velocity[k] - params.learning_rate * grad[k];
        theta[k] += velocity[k];
      }
      net.set_parameters(theta);
    }
    fit.loss_curve.push_back(epoch_loss / static_cast<double>(n));
  }
  fit.model = NetworkModel{data.scaler, data.y_mean, data.y_scale, std::move(net)};
  return fit;
}

}  // namespace socmap
