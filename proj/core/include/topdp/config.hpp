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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace topdp {

// Resolved experiment description. Field defaults are the reference
// operating point the simulator is tuned around; a config file and then CLI
// flags override them key by key.
struct ExperimentConfig {
  // Protocol selection.
  std::string mode = "sync";        // sync | async
  std::string algorithm = "topdp";  // topdp | topdp_no_decay | full_noise | no_noise
  int iterations = 2000;
  double dropout = 0.1;  // async only: per-round unavailability probability

  // Topology.
  std::string topology = "random";  // random | ring | star | tree | mesh
  int n_agents = 30;
  double connection_rate = 0.2;  // random topology edge probability
  int star_hubs = 2;
  int tree_branching = 2;
  double mesh_extra = 0.2;
  int graph_retries = 1000;

  // Privacy.
  double epsilon = 1.0;
  double delta = 1e-5;
  double gamma = 0.9;
  int period = 1000;  // iterations per decay step

  // Learning.
  double alpha = 0.25;
  double lambda0 = 0.05;
  double clip = 4.0;
  int batch_size = 1;
  int lambda_fade = 0;            // 0: fade over the whole run
  std::string model = "logistic";  // logistic | mlp
  int hidden_dim = 100;

  // Data.
  std::string dataset = "synth";  // synth | idx
  std::string idx_images;
  std::string idx_labels;
  std::string idx_test_images;
  std::string idx_test_labels;
  int synth_per_class = 1000;
  int synth_classes = 2;
  int synth_dim = 2;
  double synth_spread = 0.5;
  int synth_test_per_class = 500;
  // Write the generated synthetic train/test sets as CSV (header row, one
  // sample per line, label last) next to the run outputs.
  bool dump_dataset = false;

  // Run control.
  std::uint64_t master_seed = 42;
  int eval_every = 0;  // 0: once per epoch equivalent (shard size / batch size)
  std::string out_dir = "topdp_out";
  bool log_messages = false;
};

// Applies one key=value assignment with full validation. Unknown keys and
// out-of-range values throw std::invalid_argument naming the key.
void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

// All recognized keys, in echo order.
std::vector<std::string> config_keys();

// Parses a flat key=value file ('#' comments, blank lines allowed), then
// applies overrides in order (CLI flags win over file keys). Empty path
// means defaults-plus-overrides.
ExperimentConfig parse_config(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {});

// Writes the fully resolved config as key=value lines; reparsing the echo
// reproduces the config exactly.
void write_config_echo(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace topdp
