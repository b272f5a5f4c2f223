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

#include "topdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "topdp/rng.hpp"

namespace topdp {

namespace {

void check_spec(const ModelSpec& spec) {
  if (spec.input_dim < 1) throw std::invalid_argument("model: input_dim must be positive");
  if (spec.num_classes < 1) throw std::invalid_argument("model: num_classes must be positive");
  if (spec.kind == ModelKind::kMlp && spec.hidden_dim < 1) {
    throw std::invalid_argument("model: hidden_dim must be positive");
  }
}

void check_params(const ModelSpec& spec, const ModelParams& params) {
  if (params.size() != spec.param_count()) {
    throw std::invalid_argument("model: parameter vector does not match the model shape");
  }
}

void check_batch(const Dataset& data, const std::vector<std::size_t>& batch,
                 const ModelSpec& spec) {
  if (batch.empty()) throw std::invalid_argument("model: batch must not be empty");
  if (data.feature_dim != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("model: dataset feature_dim does not match input_dim");
  }
  for (std::size_t s : batch) {
    if (s >= data.num_samples) throw std::invalid_argument("model: batch index out of range");
  }
}

// In-place softmax with the usual max-shift for stability.
void softmax(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// Class scores for one sample; scratch receives hidden activations for the
// MLP so the gradient pass can reuse them.
std::vector<double> logits(const ModelSpec& spec, const ModelParams& p,
                           std::span<const double> x, std::vector<double>* hidden) {
  const int in = spec.input_dim;
  const int classes = spec.num_classes;
  std::vector<double> z(classes, 0.0);
  if (spec.kind == ModelKind::kLogistic) {
    const double* w = p.data();                      // [in x classes]
    const double* b = p.data() + std::size_t(in) * classes;
    for (int k = 0; k < classes; ++k) z[k] = b[k];
    for (int f = 0; f < in; ++f) {
      const double xf = x[f];
      if (xf == 0.0) continue;
      const double* row = w + std::size_t(f) * classes;
      for (int k = 0; k < classes; ++k) z[k] += xf * row[k];
    }
    return z;
  }
  const int h = spec.hidden_dim;
  const double* w1 = p.data();                                    // [in x h]
  const double* b1 = w1 + std::size_t(in) * h;                    // [h]
  const double* w2 = b1 + h;                                      // [h x classes]
  const double* b2 = w2 + std::size_t(h) * classes;               // [classes]
  std::vector<double> a(h);
  for (int u = 0; u < h; ++u) a[u] = b1[u];
  for (int f = 0; f < in; ++f) {
    const double xf = x[f];
    if (xf == 0.0) continue;
    const double* row = w1 + std::size_t(f) * h;
    for (int u = 0; u < h; ++u) a[u] += xf * row[u];
  }
  for (double& v : a) v = std::max(v, 0.0);  // ReLU
  for (int k = 0; k < classes; ++k) z[k] = b2[k];
  for (int u = 0; u < h; ++u) {
    const double au = a[u];
    if (au == 0.0) continue;
    const double* row = w2 + std::size_t(u) * classes;
    for (int k = 0; k < classes; ++k) z[k] += au * row[k];
  }
  if (hidden) *hidden = std::move(a);
  return z;
}

}  // namespace

std::size_t ModelSpec::param_count() const {
  check_spec(*this);
  const auto in = static_cast<std::size_t>(input_dim);
  const auto classes = static_cast<std::size_t>(num_classes);
  if (kind == ModelKind::kLogistic) return in * classes + classes;
  const auto h = static_cast<std::size_t>(hidden_dim);
  return in * h + h + h * classes + classes;
}

ModelParams initial_params(const ModelSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  ModelParams p(spec.param_count());
  Rng rng(seed);
  auto fill = [&rng](double* begin, std::size_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) {
      begin[i] = bound * (2.0 * rng.uniform() - 1.0);
    }
  };
  const auto in = static_cast<std::size_t>(spec.input_dim);
  const auto classes = static_cast<std::size_t>(spec.num_classes);
  if (spec.kind == ModelKind::kLogistic) {
    fill(p.data(), in * classes + classes, spec.input_dim);
  } else {
    const auto h = static_cast<std::size_t>(spec.hidden_dim);
    fill(p.data(), in * h + h, spec.input_dim);
    fill(p.data() + in * h + h, h * classes + classes, spec.hidden_dim);
  }
  return p;
}

double loss(const ModelSpec& spec, const ModelParams& params, const Dataset& data,
            const std::vector<std::size_t>& batch) {
  check_params(spec, params);
  check_batch(data, batch, spec);
  double total = 0.0;
  for (std::size_t s : batch) {
    std::vector<double> z = logits(spec, params, data.row(s), nullptr);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    total += std::log(sum) + zmax - z[static_cast<std::size_t>(data.labels[s])];
  }
  return total / static_cast<double>(batch.size());
}

ModelParams gradient(const ModelSpec& spec, const ModelParams& params,
                     const Dataset& data, const std::vector<std::size_t>& batch) {
  check_params(spec, params);
  check_batch(data, batch, spec);
  const int in = spec.input_dim;
  const int classes = spec.num_classes;
  ModelParams g(params.size(), 0.0);

  for (std::size_t s : batch) {
    const auto x = data.row(s);
    const int y = data.labels[s];
    std::vector<double> hidden;
    std::vector<double> p = logits(spec, params, x, &hidden);
    softmax(p);
    p[static_cast<std::size_t>(y)] -= 1.0;  // dL/dz

    if (spec.kind == ModelKind::kLogistic) {
      double* gw = g.data();
      double* gb = g.data() + std::size_t(in) * classes;
      for (int f = 0; f < in; ++f) {
        const double xf = x[f];
        if (xf == 0.0) continue;
        double* row = gw + std::size_t(f) * classes;
        for (int k = 0; k < classes; ++k) row[k] += xf * p[k];
      }
      for (int k = 0; k < classes; ++k) gb[k] += p[k];
    } else {
      const int h = spec.hidden_dim;
      const double* w2 = params.data() + std::size_t(in) * h + h;
      double* gw1 = g.data();
      double* gb1 = g.data() + std::size_t(in) * h;
      double* gw2 = gb1 + h;
      double* gb2 = gw2 + std::size_t(h) * classes;

      // Output layer.
      for (int u = 0; u < h; ++u) {
        const double au = hidden[u];
        if (au == 0.0) continue;
        double* row = gw2 + std::size_t(u) * classes;
        for (int k = 0; k < classes; ++k) row[k] += au * p[k];
      }
      for (int k = 0; k < classes; ++k) gb2[k] += p[k];

      // Backprop through ReLU (zero activations pass no gradient).
      std::vector<double> dpre(h, 0.0);
      for (int u = 0; u < h; ++u) {
        if (hidden[u] <= 0.0) continue;
        const double* row = w2 + std::size_t(u) * classes;
        double acc = 0.0;
        for (int k = 0; k < classes; ++k) acc += row[k] * p[k];
        dpre[u] = acc;
      }
      for (int f = 0; f < in; ++f) {
        const double xf = x[f];
        if (xf == 0.0) continue;
        double* row = gw1 + std::size_t(f) * h;
        for (int u = 0; u < h; ++u) row[u] += xf * dpre[u];
      }
      for (int u = 0; u < h; ++u) gb1[u] += dpre[u];
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : g) v *= inv;
  return g;
}

ModelParams clip_gradient(ModelParams g, double clip_c) {
  if (!(clip_c > 0.0)) throw std::invalid_argument("clip_gradient: clip_c must be positive");
  double sq = 0.0;
  for (double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > clip_c) {
    const double scale = clip_c / norm;
    for (double& v : g) v *= scale;
  }
  return g;
}

double evaluate_accuracy(const ModelSpec& spec, const ModelParams& params,
                         const Dataset& testset) {
  check_params(spec, params);
  if (testset.num_samples == 0) {
    throw std::invalid_argument("evaluate_accuracy: empty testset");
  }
  if (testset.feature_dim != static_cast<std::size_t>(spec.input_dim)) {
    throw std::invalid_argument("evaluate_accuracy: testset feature_dim does not match input_dim");
  }
  std::size_t correct = 0;
  for (std::size_t s = 0; s < testset.num_samples; ++s) {
    std::vector<double> z = logits(spec, params, testset.row(s), nullptr);
    // Ties break toward the lowest class index for determinism.
    const auto best = std::max_element(z.begin(), z.end()) - z.begin();
    if (static_cast<int>(best) == testset.labels[s]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(testset.num_samples);
}

ModelParams aggregate_update(const ModelParams& own, const ModelParams& neighbor,
                             double alpha, double lambda, const ModelParams& grad,
                             const std::vector<double>& noise) {
  const std::size_t d = own.size();
  if (neighbor.size() != d || grad.size() != d || noise.size() != d) {
    throw std::invalid_argument("aggregate_update: vector length mismatch");
  }
  ModelParams out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = alpha * own[i] + (1.0 - alpha) * neighbor[i] - lambda * grad[i] + noise[i];
    if (!std::isfinite(out[i])) {
      throw std::runtime_error("aggregate_update: non-finite parameter produced");
    }
  }
  return out;
}

ModelParams local_update(const ModelParams& own, double lambda,
                         const ModelParams& grad, const std::vector<double>& noise) {
  const std::size_t d = own.size();
  if (grad.size() != d || noise.size() != d) {
    throw std::invalid_argument("local_update: vector length mismatch");
  }
  ModelParams out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = own[i] - lambda * grad[i] + noise[i];
    if (!std::isfinite(out[i])) {
      throw std::runtime_error("local_update: non-finite parameter produced");
    }
  }
  return out;
}

}  // namespace topdp
