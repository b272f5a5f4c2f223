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
#include <optional>
#include <vector>

#include "topdp/rng.hpp"

namespace topdp {

// Target (epsilon, delta) differential-privacy budget for one agent's whole
// training run.
struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
};

// Step-decay schedule for the per-iteration noise level:
//   sigma(t) = sigma0 * gamma^floor(t / period).
// gamma == 1 disables decay.
struct NoiseSchedule {
  double sigma0 = 1.0;
  double gamma = 0.9;  // in (0, 1]
  int period = 1000;   // iterations per decay step
};

// Descriptor of one pending Gaussian draw: iid per-coordinate standard
// deviation `stddev` over `dim` coordinates. Kept as a small value type so
// protocol code can hand draw requests around and log them.
struct NoiseDraw {
  double stddev = 0.0;
  std::size_t dim = 0;
};

// Smallest sigma0 whose T-fold composition of per-iteration Gaussian releases
// stays within the budget, for an agent holding dataset_size samples.
// Logarithms are natural. Throws std::invalid_argument on a non-positive
// epsilon, delta outside (0, 1), or non-positive iterations/dataset_size.
double calibrate_sigma0(const PrivacyBudget& budget, int iterations,
                        std::size_t dataset_size);

// Inverse accountant: privacy spent after t iterations of full-scale noise
// sigma0. Exactly inverts calibrate_sigma0 at t == iterations. t == 0 maps
// to 0. Reduced-noise draws are deliberately *not* discounted: the spent
// budget is always charged at the full-scale rate.
double accumulated_epsilon(double sigma0, int t, double delta,
                           std::size_t dataset_size);

// sigma0 * gamma^floor(t / period) for t >= 0.
double decayed_sigma(const NoiseSchedule& schedule, int t);

// Standard deviation of the residual noise an agent must add on top of a
// (1 - alpha)-scaled reuse of a neighbor draw with standard deviation
// sigma_k, so the total matches a full-scale sigma_i draw:
//   sqrt(sigma_i^2 - (1 - alpha)^2 * sigma_k^2).
// When the neighbor term alone already reaches or exceeds the full-scale
// variance (possible with heterogeneous budgets), there is no valid residual
// and std::nullopt is returned: the caller must fall back to a fresh
// full-scale draw. The degenerate case is a typed fallback, not an error.
std::optional<double> reduced_sigma(double sigma_i, double sigma_k, double alpha);

// Fresh-noise fraction sqrt(2*alpha - alpha^2) of a full-scale draw that
// remains when both parties share the same sigma. alpha must be in (0, 1];
// alpha == 1 (no mixing) gives 1. Guaranteed bit-identical to
// reduced_sigma(s, s, alpha) / s in exact arithmetic and to
// reduced_sigma(s, s, alpha) == s * reduction_factor(alpha) in floating
// point (both evaluate the same expression).
double reduction_factor(double alpha);

// iid Gaussian vector; stddev == 0 returns zeros without consuming the
// stream. Negative stddev throws.
std::vector<double> sample_noise(std::size_t dim, double stddev, Rng& rng);

}  // namespace topdp
