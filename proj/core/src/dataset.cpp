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

#include "topdp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "topdp/rng.hpp"

namespace topdp {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("load_idx: truncated header in " + path);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw std::runtime_error("load_idx: cannot open " + images_path);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw std::runtime_error("load_idx: cannot open " + labels_path);

  if (read_u32_be(images, images_path) != kImagesMagic) {
    throw std::runtime_error("load_idx: bad image magic in " + images_path);
  }
  const std::uint32_t n_images = read_u32_be(images, images_path);
  const std::uint32_t rows = read_u32_be(images, images_path);
  const std::uint32_t cols = read_u32_be(images, images_path);

  if (read_u32_be(labels, labels_path) != kLabelsMagic) {
    throw std::runtime_error("load_idx: bad label magic in " + labels_path);
  }
  const std::uint32_t n_labels = read_u32_be(labels, labels_path);
  if (n_images != n_labels) {
    throw std::runtime_error("load_idx: image/label count mismatch between " +
                             images_path + " and " + labels_path);
  }

  Dataset d;
  d.num_samples = n_images;
  d.feature_dim = static_cast<std::size_t>(rows) * cols;
  d.features.resize(d.num_samples * d.feature_dim);
  d.labels.resize(d.num_samples);

  std::vector<unsigned char> pixel_row(d.feature_dim);
  for (std::size_t i = 0; i < d.num_samples; ++i) {
    if (!images.read(reinterpret_cast<char*>(pixel_row.data()),
                     static_cast<std::streamsize>(pixel_row.size()))) {
      throw std::runtime_error("load_idx: truncated image data in " + images_path);
    }
    for (std::size_t p = 0; p < d.feature_dim; ++p) {
      d.features[i * d.feature_dim + p] = pixel_row[p] / 255.0;
    }
    unsigned char label;
    if (!labels.read(reinterpret_cast<char*>(&label), 1)) {
      throw std::runtime_error("load_idx: truncated label data in " + labels_path);
    }
    d.labels[i] = label;
  }

  int max_label = 0;
  for (int l : d.labels) max_label = std::max(max_label, l);
  d.num_classes = max_label + 1;
  return d;
}

Dataset synth_blobs(std::size_t n_per_class, int classes, std::size_t input_dim,
                    double spread, std::uint64_t seed) {
  if (n_per_class < 1) throw std::invalid_argument("synth_blobs: n_per_class must be positive");
  if (classes < 1) throw std::invalid_argument("synth_blobs: classes must be positive");
  if (input_dim < 1) throw std::invalid_argument("synth_blobs: input_dim must be positive");
  if (!(spread >= 0.0)) throw std::invalid_argument("synth_blobs: spread must be non-negative");

  Dataset d;
  d.num_samples = n_per_class * static_cast<std::size_t>(classes);
  d.feature_dim = input_dim;
  d.num_classes = classes;
  d.features.resize(d.num_samples * d.feature_dim);
  d.labels.resize(d.num_samples);

  Rng rng(seed);
  std::size_t s = 0;
  for (int c = 0; c < classes; ++c) {
    const std::size_t axis = static_cast<std::size_t>(c) % input_dim;
    const double scale = 1.0 + static_cast<double>(c) / static_cast<double>(input_dim);
    for (std::size_t k = 0; k < n_per_class; ++k, ++s) {
      double* x = d.features.data() + s * d.feature_dim;
      for (std::size_t f = 0; f < input_dim; ++f) {
        x[f] = (f == axis ? scale : 0.0) + rng.gaussian(spread);
      }
      d.labels[s] = c;
    }
  }
  return d;
}

std::vector<Dataset> partition_iid(const Dataset& d, std::size_t n_agents,
                                   std::uint64_t seed) {
  if (n_agents < 1) throw std::invalid_argument("partition_iid: n_agents must be positive");
  if (d.num_samples < n_agents) {
    throw std::invalid_argument("partition_iid: fewer samples than agents");
  }

  std::vector<std::size_t> order(d.num_samples);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t base = d.num_samples / n_agents;
  const std::size_t extra = d.num_samples % n_agents;

  std::vector<Dataset> shards(n_agents);
  std::size_t pos = 0;
  for (std::size_t a = 0; a < n_agents; ++a) {
    const std::size_t count = base + (a < extra ? 1 : 0);
    Dataset& shard = shards[a];
    shard.num_samples = count;
    shard.feature_dim = d.feature_dim;
    shard.num_classes = d.num_classes;
    shard.features.resize(count * d.feature_dim);
    shard.labels.resize(count);
    for (std::size_t k = 0; k < count; ++k, ++pos) {
      const std::size_t src = order[pos];
      std::copy_n(d.features.data() + src * d.feature_dim, d.feature_dim,
                  shard.features.data() + k * d.feature_dim);
      shard.labels[k] = d.labels[src];
    }
  }
  return shards;
}

}  // namespace topdp
