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

#include "topdp/privacy.hpp"

#include <cmath>
#include <stdexcept>

namespace topdp {

namespace {

// Shared between calibration and the accountant so the two stay exact
// inverses of each other.
double log_product(double delta) {
  return std::log(1.0 / delta) * std::log(1.25 / delta);
}

void check_budget(double epsilon, double delta) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("privacy: epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("privacy: delta must be in (0, 1)");
  }
}

}  // namespace

double calibrate_sigma0(const PrivacyBudget& budget, int iterations,
                        std::size_t dataset_size) {
  check_budget(budget.epsilon, budget.delta);
  if (iterations < 1) {
    throw std::invalid_argument("calibrate_sigma0: iterations must be positive");
  }
  if (dataset_size < 1) {
    throw std::invalid_argument("calibrate_sigma0: dataset_size must be positive");
  }
  const double t = static_cast<double>(iterations);
  return 8.0 * std::sqrt(t * log_product(budget.delta)) /
         (budget.epsilon * static_cast<double>(dataset_size));
}

double accumulated_epsilon(double sigma0, int t, double delta,
                           std::size_t dataset_size) {
  if (!(sigma0 > 0.0)) {
    throw std::invalid_argument("accumulated_epsilon: sigma0 must be positive");
  }
  if (t < 0) {
    throw std::invalid_argument("accumulated_epsilon: t must be non-negative");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("accumulated_epsilon: delta must be in (0, 1)");
  }
  if (dataset_size < 1) {
    throw std::invalid_argument("accumulated_epsilon: dataset_size must be positive");
  }
  if (t == 0) return 0.0;
  return 8.0 * std::sqrt(static_cast<double>(t) * log_product(delta)) /
         (sigma0 * static_cast<double>(dataset_size));
}

double decayed_sigma(const NoiseSchedule& schedule, int t) {
  if (!(schedule.sigma0 >= 0.0)) {
    throw std::invalid_argument("decayed_sigma: sigma0 must be non-negative");
  }
  if (!(schedule.gamma > 0.0 && schedule.gamma <= 1.0)) {
    throw std::invalid_argument("decayed_sigma: gamma must be in (0, 1]");
  }
  if (schedule.period < 1) {
    throw std::invalid_argument("decayed_sigma: period must be positive");
  }
  if (t < 0) {
    throw std::invalid_argument("decayed_sigma: t must be non-negative");
  }
  const int steps = t / schedule.period;
  return schedule.sigma0 * std::pow(schedule.gamma, static_cast<double>(steps));
}

std::optional<double> reduced_sigma(double sigma_i, double sigma_k, double alpha) {
  if (!(sigma_i > 0.0)) {
    throw std::invalid_argument("reduced_sigma: sigma_i must be positive");
  }
  if (!(sigma_k >= 0.0)) {
    throw std::invalid_argument("reduced_sigma: sigma_k must be non-negative");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("reduced_sigma: alpha must be in (0, 1]");
  }
  // Factored as sigma_i * sqrt(1 - r^2) with r the reused fraction. For
  // sigma_i == sigma_k the quotient is exactly 1.0, which makes the result
  // bit-identical to sigma_i * reduction_factor(alpha).
  const double r = (1.0 - alpha) * (sigma_k / sigma_i);
  if (r >= 1.0) return std::nullopt;  // residual variance would be <= 0
  return sigma_i * std::sqrt(1.0 - r * r);
}

double reduction_factor(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("reduction_factor: alpha must be in (0, 1]");
  }
  const double r = 1.0 - alpha;
  return std::sqrt(1.0 - r * r);  // == sqrt(2*alpha - alpha^2)
}

std::vector<double> sample_noise(std::size_t dim, double stddev, Rng& rng) {
  if (!(stddev >= 0.0)) {
    throw std::invalid_argument("sample_noise: stddev must be non-negative");
  }
  std::vector<double> out(dim, 0.0);
  if (stddev == 0.0) return out;  // noiseless modes: do not touch the stream
  for (double& x : out) x = rng.gaussian(stddev);
  return out;
}

}  // namespace topdp
