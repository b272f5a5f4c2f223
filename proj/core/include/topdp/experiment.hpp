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

#include <string>
#include <vector>

#include "topdp/config.hpp"
#include "topdp/graph.hpp"
#include "topdp/protocol.hpp"

namespace topdp {

// Cross-agent aggregate of one evaluation point.
struct MetricsRecord {
  int iteration = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over agents
  double max_spent_epsilon = 0.0;
};

struct ExperimentResult {
  Graph graph;
  TrainingTrace trace;
  std::vector<MetricsRecord> summary;
  double final_mean_accuracy = 0.0;
};

// Aggregates per-agent rows into one record per recorded iteration. Rows
// must be grouped by iteration (the order the engines emit them in).
std::vector<MetricsRecord> summarize(const std::vector<TraceRow>& rows);

// Builds the graph and data from the config, calibrates each agent's sigma0
// for its own shard size, runs the selected protocol, and (unless
// cfg.out_dir is empty) writes into out_dir:
//   trace.csv    - iteration,agent_id,accuracy,spent_epsilon,mean_sigma,messages_sent
//   summary.csv  - iteration,mean_accuracy,std_accuracy,max_spent_epsilon
//   config.txt   - resolved key=value echo
//   graph.txt    - the topology as an edge list
//   messages.csv - envelope log (only when log_messages=true)
//   train.csv, test.csv - the generated data, label last (synth datasets
//                  with dump_dataset=true only)
// trace.csv rows are streamed as the run progresses; if the run throws, the
// partial file is flushed with a trailing "# run failed: ..." marker line
// before the error propagates.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// One run per axis value (applied over the base config), each writing to
// <out_dir>/<axis>=<value>/, plus a combined long-format sweep.csv keyed by
// the axis value in <out_dir>. All runs share the base master seed, so
// anything the axis does not influence stays identical across runs.
void sweep(const ExperimentConfig& base, const std::string& axis,
           const std::vector<std::string>& values);

// Axes sweep() accepts.
const std::vector<std::string>& sweep_axes();

}  // namespace topdp
