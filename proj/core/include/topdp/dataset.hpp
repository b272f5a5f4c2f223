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
#include <span>
#include <string>
#include <vector>

namespace topdp {

// Dense classification dataset; features are row-major doubles.
struct Dataset {
  std::size_t num_samples = 0;
  std::size_t feature_dim = 0;
  int num_classes = 0;
  std::vector<double> features;  // num_samples * feature_dim
  std::vector<int> labels;       // in [0, num_classes)

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
};

// Loads an image/label pair in the standard IDX binary layout (big-endian
// magics 0x00000803 for images, 0x00000801 for labels). Pixels are scaled
// to [0, 1]. Throws std::runtime_error on bad magic numbers, truncated
// payloads, or an image/label count mismatch.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Gaussian blobs: class c is centered on the (c mod input_dim)-th axis at
// distance 1 + c / input_dim from the origin, with iid per-coordinate
// standard deviation `spread`. Samples are emitted class-major; callers that
// need a shuffled order should partition afterwards.
Dataset synth_blobs(std::size_t n_per_class, int classes, std::size_t input_dim,
                    double spread, std::uint64_t seed);

// Random equal split: every sample is assigned to exactly one shard, shard
// sizes differ by at most one (the first |d| mod n shards take the extra
// sample). Class proportions are approximately preserved by the uniform
// shuffle, not enforced exactly.
std::vector<Dataset> partition_iid(const Dataset& d, std::size_t n_agents,
                                   std::uint64_t seed);

}  // namespace topdp
