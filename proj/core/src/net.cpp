// Copyright 2026 The fairsde Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairsde/net.hpp"

#include <algorithm>
#include <cmath>

namespace fairsde {

std::string activation_name(Activation act) {
  return act == Activation::kRelu ? "relu" : "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("Mlp: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weight.rows == 0 || layer.weight.cols == 0 ||
        layer.weight.data.size() != layer.weight.rows * layer.weight.cols) {
      throw std::invalid_argument("Mlp: layer " + std::to_string(l) +
                                  " has an empty or malformed weight matrix");
    }
    if (layer.bias.size() != layer.out_dim()) {
      throw std::invalid_argument("Mlp: layer " + std::to_string(l) +
                                  " bias size mismatch");
    }
    if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim()) {
      throw std::invalid_argument("Mlp: layer " + std::to_string(l) +
                                  " input does not chain with previous output");
    }
  }
  if (!all_finite()) throw std::invalid_argument("Mlp: non-finite parameter");
}

Mlp Mlp::kaiming(std::span<const std::size_t> sizes,
                 std::span<const Activation> activations, Rng& rng) {
  if (sizes.size() < 2 || activations.size() + 1 != sizes.size()) {
    throw std::invalid_argument("Mlp::kaiming: need one activation per layer");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer{Matrix(sizes[l + 1], sizes[l]),
                     std::vector<double>(sizes[l + 1], 0.0), activations[l]};
    const double bound = std::sqrt(6.0 / double(sizes[l]));
    for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.data.size() + layer.bias.size();
  return n;
}

double& Mlp::parameter(std::size_t k) {
  for (auto& layer : layers_) {
    if (k < layer.weight.data.size()) return layer.weight.data[k];
    k -= layer.weight.data.size();
    if (k < layer.bias.size()) return layer.bias[k];
    k -= layer.bias.size();
  }
  throw std::out_of_range("Mlp::parameter: index out of range");
}

double Mlp::parameter(std::size_t k) const {
  return const_cast<Mlp*>(this)->parameter(k);
}

bool Mlp::all_finite() const {
  for (const auto& layer : layers_) {
    for (double w : layer.weight.data) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

namespace {

void check_input(const Mlp& net, std::size_t cols) {
  if (net.empty()) throw std::invalid_argument("forward: empty network");
  if (cols != net.input_dim()) {
    throw std::invalid_argument("forward: input has dimension " +
                                std::to_string(cols) + ", network expects " +
                                std::to_string(net.input_dim()));
  }
}

// out = x * W^T + b
Matrix affine(const DenseLayer& layer, const Matrix& x) {
  Matrix out(x.rows, layer.out_dim());
  const std::size_t in = layer.in_dim();
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xr = x.data.data() + r * in;
    for (std::size_t o = 0; o < layer.out_dim(); ++o) {
      const double* wr = layer.weight.data.data() + o * in;
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
      out(r, o) = acc;
    }
  }
  return out;
}

Matrix activate(Activation act, const Matrix& pre) {
  Matrix out = pre;
  if (act == Activation::kRelu) {
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  }
  return out;
}

}  // namespace

ForwardPass forward(const Mlp& net, const Matrix& x) {
  check_input(net, x.cols);
  ForwardPass pass;
  pass.layer_inputs.reserve(net.layers().size());
  pass.pre_activations.reserve(net.layers().size());
  Matrix current = x;
  for (const auto& layer : net.layers()) {
    Matrix pre = affine(layer, current);
    Matrix post = activate(layer.activation, pre);
    pass.layer_inputs.push_back(std::move(current));
    pass.pre_activations.push_back(std::move(pre));
    current = std::move(post);
  }
  pass.output = std::move(current);
  return pass;
}

Matrix predict(const Mlp& net, const Matrix& x) {
  check_input(net, x.cols);
  Matrix current = x;
  for (const auto& layer : net.layers()) {
    current = activate(layer.activation, affine(layer, current));
  }
  return current;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
  Matrix m(1, x.size());
  std::copy(x.begin(), x.end(), m.data.begin());
  return std::move(predict(net, m).data);
}

MlpGradients MlpGradients::zeros_like(const Mlp& net) {
  MlpGradients g;
  for (const auto& layer : net.layers()) {
    g.weight.emplace_back(layer.weight.rows, layer.weight.cols);
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

std::size_t MlpGradients::size() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weight.size(); ++l) {
    n += weight[l].data.size() + bias[l].size();
  }
  return n;
}

double& MlpGradients::flat(std::size_t k) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    if (k < weight[l].data.size()) return weight[l].data[k];
    k -= weight[l].data.size();
    if (k < bias[l].size()) return bias[l][k];
    k -= bias[l].size();
  }
  throw std::out_of_range("MlpGradients::flat: index out of range");
}

double MlpGradients::flat(std::size_t k) const {
  return const_cast<MlpGradients*>(this)->flat(k);
}

bool MlpGradients::all_finite() const {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (double v : weight[l].data) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : bias[l]) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool MlpGradients::matches(const Mlp& net) const {
  if (weight.size() != net.layers().size() || bias.size() != weight.size()) {
    return false;
  }
  for (std::size_t l = 0; l < weight.size(); ++l) {
    if (!weight[l].same_shape(net.layers()[l].weight) ||
        bias[l].size() != net.layers()[l].bias.size()) {
      return false;
    }
  }
  return true;
}

MlpGradients& MlpGradients::add_scaled(const MlpGradients& other, double s) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (std::size_t k = 0; k < weight[l].data.size(); ++k) {
      weight[l].data[k] += s * other.weight[l].data[k];
    }
    for (std::size_t k = 0; k < bias[l].size(); ++k) {
      bias[l][k] += s * other.bias[l][k];
    }
  }
  return *this;
}

MlpGradients& MlpGradients::scale(double factor) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (double& v : weight[l].data) v *= factor;
    for (double& v : bias[l]) v *= factor;
  }
  return *this;
}

BackwardResult backward(const Mlp& net, const ForwardPass& pass,
                        const Matrix& output_grad) {
  const auto& layers = net.layers();
  if (pass.layer_inputs.size() != layers.size() ||
      pass.pre_activations.size() != layers.size()) {
    throw std::invalid_argument("backward: cache does not match network depth");
  }
  if (output_grad.rows != pass.output.rows ||
      output_grad.cols != net.output_dim()) {
    throw std::invalid_argument("backward: output gradient shape mismatch");
  }
  BackwardResult result{MlpGradients::zeros_like(net), {}};
  Matrix delta = output_grad;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const Matrix& input = pass.layer_inputs[l];
    const Matrix& pre = pass.pre_activations[l];
    if (!pre.same_shape(delta) || input.cols != layer.in_dim()) {
      throw std::invalid_argument("backward: cache shape mismatch at layer " +
                                  std::to_string(l));
    }
    if (layer.activation == Activation::kRelu) {
      for (std::size_t k = 0; k < delta.data.size(); ++k) {
        if (!(pre.data[k] > 0.0)) delta.data[k] = 0.0;
      }
    }
    auto& gw = result.params.weight[l];
    auto& gb = result.params.bias[l];
    const std::size_t in = layer.in_dim();
    const std::size_t out = layer.out_dim();
    Matrix input_grad(delta.rows, in);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double* xr = input.data.data() + r * in;
      double* gr = input_grad.data.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta(r, o);
        if (d == 0.0) continue;
        gb[o] += d;
        double* gwr = gw.data.data() + o * in;
        const double* wr = layer.weight.data.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          gwr[i] += d * xr[i];
          gr[i] += d * wr[i];
        }
      }
    }
    delta = std::move(input_grad);
  }
  result.input_grad = std::move(delta);
  return result;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double mx = *std::max_element(p.begin(), p.end());
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

CrossEntropy softmax_cross_entropy(const Matrix& logits,
                                   std::span<const int> targets,
                                   double normalizer) {
  if (targets.size() != logits.rows) {
    throw std::invalid_argument("cross entropy: target count mismatch");
  }
  if (normalizer <= 0.0) normalizer = double(logits.rows);
  CrossEntropy ce{0.0, Matrix(logits.rows, logits.cols)};
  if (logits.rows == 0) return ce;
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const int t = targets[r];
    if (t < 0 || static_cast<std::size_t>(t) >= logits.cols) {
      throw std::invalid_argument("cross entropy: target " + std::to_string(t) +
                                  " out of range");
    }
    const auto row = logits.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_z = mx + std::log(sum);
    ce.loss += log_z - row[static_cast<std::size_t>(t)];
    for (std::size_t c = 0; c < logits.cols; ++c) {
      const double p = std::exp(row[c] - log_z);
      ce.logits_grad(r, c) =
          (p - (static_cast<std::size_t>(t) == c ? 1.0 : 0.0)) / normalizer;
    }
  }
  ce.loss /= normalizer;
  return ce;
}

void momentum_update(std::span<double> params, std::span<double> velocity,
                     std::span<const double> grads, double lr, double momentum) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    velocity[k] = momentum * velocity[k] + grads[k];
    params[k] -= lr * velocity[k];
  }
}

TrainState TrainState::for_net(const Mlp& net, double lr, double momentum,
                               double decay) {
  return TrainState{MlpGradients::zeros_like(net), lr, momentum, decay};
}

void sgd_step(Mlp& net, TrainState& state, const MlpGradients& grads) {
  if (!grads.matches(net) || !state.velocity.matches(net)) {
    throw std::invalid_argument("sgd_step: gradient shape mismatch");
  }
  if (!grads.all_finite()) {
    throw DivergenceError("sgd_step: non-finite gradient entry");
  }
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    momentum_update(layers[l].weight.data, state.velocity.weight[l].data,
                    grads.weight[l].data, state.lr, state.momentum);
    momentum_update(layers[l].bias, state.velocity.bias[l], grads.bias[l],
                    state.lr, state.momentum);
  }
}

void decay_lr(TrainState& state) { state.lr *= state.decay; }

}  // namespace fairsde
