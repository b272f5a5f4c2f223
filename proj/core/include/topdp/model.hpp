// Copyright 2026 The topdp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "topdp/dataset.hpp"

namespace topdp {

// Flat parameter vector; the ModelSpec carries the shape.
using ModelParams = std::vector<double>;

enum class ModelKind {
  kLogistic,  // multinomial logistic regression (softmax + cross-entropy)
  kMlp,       // one ReLU hidden layer, softmax output
};

// Shape of the classifier every agent trains. All agents share one spec;
// parameter layouts are
//   logistic: W[input_dim x classes], b[classes]
//   mlp:      W1[input_dim x hidden], b1[hidden], W2[hidden x classes], b2[classes]
// with weight matrices stored row-major (input index major).
struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  int input_dim = 0;
  int num_classes = 0;
  int hidden_dim = 100;  // MLP only

  std::size_t param_count() const;
};

// Hyper-parameters of the local optimization step shared by every agent.
struct LearningConfig {
  double alpha = 0.25;    // own-estimate weight when mixing with a neighbor
  double lambda0 = 0.05;  // initial learning rate
  double clip_c = 4.0;    // L2 gradient clipping threshold
  int batch_size = 1;     // samples per stochastic gradient
  // Learning-rate fade horizon for lambda(t) = lambda0 / (1 + t / fade);
  // 0 selects the run's total iteration count.
  int lambda_fade = 0;
};

// Shared starting point: every layer is filled uniformly from
// [-1/sqrt(fan_in), 1/sqrt(fan_in)], fan_in being the layer's input width.
ModelParams initial_params(const ModelSpec& spec, std::uint64_t seed);

// Mean softmax cross-entropy over the batch (indices into `data`).
double loss(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
            const std::vector<std::size_t>& batch);

// Mean analytic gradient over the batch. Matches central finite differences
// of loss() to ~1e-4 relative error.
ModelParams gradient(const ModelSpec& spec, const ModelParams& params,
                     const Dataset& data, const std::vector<std::size_t>& batch);

// g / max(1, |g|_2 / clip_c): identity inside the ball, rescaled onto the
// sphere outside it.
ModelParams clip_gradient(ModelParams g, double clip_c);

// Fraction of testset rows whose argmax prediction matches the label.
double evaluate_accuracy(const ModelSpec& spec, const ModelParams& params,
                         const Dataset& testset);

// alpha * own + (1 - alpha) * neighbor - lambda * grad + noise, elementwise.
// All four vectors must share one length; the result must stay finite.
ModelParams aggregate_update(const ModelParams& own, const ModelParams& neighbor,
                             double alpha, double lambda, const ModelParams& grad,
                             const std::vector<double>& noise);

// own - lambda * grad + noise: the no-neighbor step (identical to
// aggregate_update with alpha == 1).
ModelParams local_update(const ModelParams& own, double lambda,
                         const ModelParams& grad, const std::vector<double>& noise);

}  // namespace topdp
