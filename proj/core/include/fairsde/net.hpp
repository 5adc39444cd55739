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

#ifndef FAIRSDE_NET_HPP_
#define FAIRSDE_NET_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairsde/matrix.hpp"
#include "fairsde/rng.hpp"

namespace fairsde {

// Raised when training produces non-finite values.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Activation : std::uint8_t { kIdentity, kRelu };

std::string activation_name(Activation act);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  std::size_t in_dim() const { return weight.cols; }
  std::size_t out_dim() const { return weight.rows; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feedforward network of dense layers. Plain value type; copying an Mlp
// copies its parameters.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  // Weights drawn Kaiming-uniform on fan-in, U(-sqrt(6/in), sqrt(6/in)),
  // biases zero. `sizes` has one more entry than `activations`.
  static Mlp kaiming(std::span<const std::size_t> sizes,
                     std::span<const Activation> activations, Rng& rng);

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }
  bool empty() const { return layers_.empty(); }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t parameter_count() const;
  // Flat view over all parameters: each layer's weights (row-major) then its
  // bias, layer by layer.
  double& parameter(std::size_t k);
  double parameter(std::size_t k) const;
  bool all_finite() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

// Everything backward() needs: the input to every layer and every layer's
// pre-activation, plus the network output.
struct ForwardPass {
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
  Matrix output;
};

ForwardPass forward(const Mlp& net, const Matrix& x);
std::vector<double> forward(const Mlp& net, std::span<const double> x);
Matrix predict(const Mlp& net, const Matrix& x);

// Gradients shaped like an Mlp's parameters.
struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;

  static MlpGradients zeros_like(const Mlp& net);

  std::size_t size() const;
  double& flat(std::size_t k);
  double flat(std::size_t k) const;
  bool all_finite() const;
  bool matches(const Mlp& net) const;

  MlpGradients& add_scaled(const MlpGradients& other, double scale);
  MlpGradients& scale(double factor);

  friend bool operator==(const MlpGradients&, const MlpGradients&) = default;
};

struct BackwardResult {
  MlpGradients params;
  Matrix input_grad;
};

// Gradients are summed over the rows of `output_grad`; callers fold any
// batch averaging into the upstream gradient.
BackwardResult backward(const Mlp& net, const ForwardPass& pass,
                        const Matrix& output_grad);

struct CrossEntropy {
  double loss = 0.0;
  Matrix logits_grad;
};

// Softmax cross-entropy with max-subtraction. The summed per-row loss is
// divided by `normalizer` (batch size when omitted), and so is the gradient.
CrossEntropy softmax_cross_entropy(const Matrix& logits,
                                   std::span<const int> targets,
                                   double normalizer = 0.0);

std::vector<double> softmax(std::span<const double> logits);

// Classical momentum: v <- mu * v + g ; p <- p - lr * v.
void momentum_update(std::span<double> params, std::span<double> velocity,
                     std::span<const double> grads, double lr, double momentum);

struct TrainState {
  MlpGradients velocity;
  double lr = 0.01;
  double momentum = 0.9;
  double decay = 0.9;

  static TrainState for_net(const Mlp& net, double lr, double momentum = 0.9,
                            double decay = 0.9);
};

// Throws DivergenceError on any non-finite gradient entry.
void sgd_step(Mlp& net, TrainState& state, const MlpGradients& grads);

// lr <- decay * lr; called once per epoch boundary.
void decay_lr(TrainState& state);

}  // namespace fairsde

#endif  // FAIRSDE_NET_HPP_
