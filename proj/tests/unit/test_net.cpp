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

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace fairsde {
namespace {

using testing::central_difference;
using testing::random_matrix;
using testing::relative_error;

DenseLayer layer(std::size_t out, std::size_t in, std::vector<double> w, std::vector<double> b,
                 Activation act) {
  DenseLayer l;
  l.weight = Matrix(out, in);
  l.weight.data = std::move(w);
  l.bias = std::move(b);
  l.activation = act;
  return l;
}

Mlp random_net(Rng& rng, std::size_t in, std::size_t hidden, std::size_t out) {
  const std::size_t sizes[] = {in, hidden, out};
  const Activation acts[] = {Activation::kRelu, Activation::kIdentity};
  Mlp net = Mlp::kaiming(sizes, acts, rng);
  // Nonzero biases so the bias gradients are exercised away from zero.
  for (auto& l : net.layers()) {
    for (double& b : l.bias) b = rng.uniform(-0.5, 0.5);
  }
  return net;
}

TEST(Forward, IdentityLayerPassesInputThrough) {
  const Mlp net({layer(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}, Activation::kIdentity)});
  const std::vector<double> x = {0.3, -2.0, 7.5};
  EXPECT_EQ(forward(net, x), x);
}

TEST(Forward, ReluOnNegativePreActivationsIsZero) {
  const Mlp net({layer(2, 2, {1, 0, 0, 1}, {-5, -5}, Activation::kRelu)});
  EXPECT_EQ(forward(net, std::vector<double>{1.0, 2.0}), (std::vector<double>{0.0, 0.0}));
}

TEST(Forward, TwoLayerHandEvaluation) {
  // pre1 = (1.1, -0.8, 0.2) -> relu (1.1, 0, 0.2) -> 1.1 - 0 + 0.4 + 0.5 = 2.0
  const Mlp net({layer(3, 2, {1, 2, -1, 0.5, 0.5, -3}, {0.1, 0.2, -0.3}, Activation::kRelu),
                 layer(1, 3, {1, -1, 2}, {0.5}, Activation::kIdentity)});
  const auto out = forward(net, std::vector<double>{1.0, 0.0});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0], 2.0, 1e-15);
}

TEST(Forward, DimensionMismatchThrows) {
  Rng rng(1);
  const Mlp net = random_net(rng, 3, 4, 2);
  EXPECT_THROW(forward(net, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(Forward, RepeatedCallsAgreeBitExactly) {
  Rng rng(2);
  const Mlp net = random_net(rng, 5, 7, 3);
  const Matrix x = random_matrix(6, 5, rng);
  EXPECT_EQ(forward(net, x).output, forward(net, x).output);
}

TEST(Mlp, RejectsBrokenChains) {
  EXPECT_THROW(Mlp({layer(2, 2, {1, 0, 0, 1}, {0, 0}, Activation::kRelu),
                    layer(1, 3, {1, 1, 1}, {0}, Activation::kIdentity)}),
               std::invalid_argument);
  EXPECT_THROW(Mlp({layer(1, 1, {NAN}, {0}, Activation::kIdentity)}), std::invalid_argument);
}

TEST(Mlp, KaimingUniformBoundsAndZeroBias) {
  Rng rng(3);
  const std::size_t sizes[] = {10, 32, 8};
  const Activation acts[] = {Activation::kRelu, Activation::kIdentity};
  const Mlp net = Mlp::kaiming(sizes, acts, rng);
  for (const auto& l : net.layers()) {
    const double bound = std::sqrt(6.0 / double(l.in_dim()));
    for (double w : l.weight.data) {
      EXPECT_LE(std::abs(w), bound);
    }
    for (double b : l.bias) EXPECT_EQ(b, 0.0);
  }
  EXPECT_EQ(net.parameter_count(), 10u * 32 + 32 + 32 * 8 + 8);
}

TEST(Backward, ZeroOutputGradientGivesZeroGradients) {
  Rng rng(4);
  const Mlp net = random_net(rng, 3, 5, 2);
  const auto pass = forward(net, random_matrix(4, 3, rng));
  const auto res = backward(net, pass, Matrix(4, 2));
  for (std::size_t k = 0; k < res.params.size(); ++k) EXPECT_EQ(res.params.flat(k), 0.0);
}

TEST(Backward, LinearLayerWeightGradientIsOuterProduct) {
  const Mlp net({layer(2, 3, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {0, 0}, Activation::kIdentity)});
  Matrix x(1, 3);
  x.data = {1.5, -2.0, 0.25};
  Matrix c(1, 2);
  c.data = {3.0, -1.0};
  const auto res = backward(net, forward(net, x), c);
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(res.params.weight[0](o, i), c.data[o] * x.data[i]);
    }
    EXPECT_EQ(res.params.bias[0][o], c.data[o]);
  }
}

// loss = sum(output .* r); compare every parameter and input gradient with
// central differences.
TEST(Backward, MatchesFiniteDifferencesOnRandomNets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    Mlp net = random_net(rng, 4, 6, 3);
    Matrix x = random_matrix(5, 4, rng);
    const Matrix r = random_matrix(5, 3, rng);
    auto loss = [&] {
      const Matrix out = forward(net, x).output;
      double s = 0.0;
      for (std::size_t k = 0; k < out.data.size(); ++k) s += out.data[k] * r.data[k];
      return s;
    };
    const auto res = backward(net, forward(net, x), r);
    for (std::size_t k = 0; k < net.parameter_count(); ++k) {
      const double numeric = central_difference(net.parameter(k), loss);
      ASSERT_LT(relative_error(res.params.flat(k), numeric), 1e-4)
          << "seed " << seed << " parameter " << k;
    }
    for (std::size_t k = 0; k < x.data.size(); ++k) {
      const double numeric = central_difference(x.data[k], loss);
      ASSERT_LT(relative_error(res.input_grad.data[k], numeric), 1e-4)
          << "seed " << seed << " input " << k;
    }
  }
}

TEST(CrossEntropy, MatchesFiniteDifferencesAndIsStable) {
  Rng rng(8);
  Matrix logits = random_matrix(4, 3, rng, 3.0);
  const std::vector<int> targets = {0, 2, 1, 2};
  const auto ce = softmax_cross_entropy(logits, targets);
  for (std::size_t k = 0; k < logits.data.size(); ++k) {
    const double numeric = central_difference(
        logits.data[k], [&] { return softmax_cross_entropy(logits, targets).loss; });
    EXPECT_LT(relative_error(ce.logits_grad.data[k], numeric), 1e-4);
  }
  Matrix huge(1, 2);
  huge.data = {1000.0, 0.0};
  const auto big = softmax_cross_entropy(huge, std::vector<int>{1});
  EXPECT_TRUE(std::isfinite(big.loss));
  EXPECT_NEAR(big.loss, 1000.0, 1e-9);
  EXPECT_THROW(softmax_cross_entropy(huge, std::vector<int>{2}), std::invalid_argument);
}

TEST(SgdStep, ZeroGradientsAndBuffersLeaveParametersUnchanged) {
  Rng rng(9);
  Mlp net = random_net(rng, 3, 4, 2);
  const Mlp before = net;
  auto state = TrainState::for_net(net, 0.1);
  sgd_step(net, state, MlpGradients::zeros_like(net));
  EXPECT_EQ(net, before);
}

TEST(SgdStep, ZeroMomentumIsPlainGradientDescent) {
  Rng rng(10);
  Mlp net = random_net(rng, 3, 4, 2);
  const Mlp before = net;
  auto grads = MlpGradients::zeros_like(net);
  for (std::size_t k = 0; k < grads.size(); ++k) grads.flat(k) = rng.uniform(-1, 1);
  auto state = TrainState::for_net(net, 0.1, 0.0);
  sgd_step(net, state, grads);
  for (std::size_t k = 0; k < grads.size(); ++k) {
    EXPECT_EQ(net.parameter(k), before.parameter(k) - 0.1 * grads.flat(k));
  }
}

TEST(SgdStep, MomentumSecondStepDisplacement) {
  Rng rng(11);
  Mlp net = random_net(rng, 2, 3, 1);
  auto grads = MlpGradients::zeros_like(net);
  for (std::size_t k = 0; k < grads.size(); ++k) grads.flat(k) = rng.uniform(-1, 1);
  auto state = TrainState::for_net(net, 0.01, 0.9);
  sgd_step(net, state, grads);
  const Mlp mid = net;
  sgd_step(net, state, grads);
  for (std::size_t k = 0; k < grads.size(); ++k) {
    EXPECT_NEAR(mid.parameter(k) - net.parameter(k), 0.01 * 1.9 * grads.flat(k), 1e-15);
  }
}

TEST(SgdStep, ZeroLearningRateIsIdentity) {
  Rng rng(12);
  Mlp net = random_net(rng, 3, 3, 3);
  const Mlp before = net;
  auto grads = MlpGradients::zeros_like(net);
  for (std::size_t k = 0; k < grads.size(); ++k) grads.flat(k) = 1.0;
  auto state = TrainState::for_net(net, 0.0);
  sgd_step(net, state, grads);
  sgd_step(net, state, grads);
  EXPECT_EQ(net, before);
}

TEST(SgdStep, NonFiniteGradientSignalsDivergence) {
  Rng rng(13);
  Mlp net = random_net(rng, 2, 2, 2);
  auto grads = MlpGradients::zeros_like(net);
  grads.flat(3) = INFINITY;
  auto state = TrainState::for_net(net, 0.1);
  EXPECT_THROW(sgd_step(net, state, grads), DivergenceError);
}

TEST(DecayLr, MultipliesByDecayFactor) {
  TrainState s;
  s.lr = 0.05;
  decay_lr(s);
  EXPECT_NEAR(s.lr, 0.045, 1e-17);

  TrainState t;
  t.lr = 0.01;
  for (int i = 0; i < 60; ++i) decay_lr(t);
  EXPECT_NEAR(t.lr, 0.01 * std::pow(0.9, 60), 1e-14 * t.lr);

  TrainState z;
  z.lr = 0.0;
  decay_lr(z);
  EXPECT_EQ(z.lr, 0.0);
}

}  // namespace
}  // namespace fairsde
