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

#include "topdp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "topdp/dataset.hpp"
#include "topdp/model.hpp"
#include "topdp/privacy.hpp"
#include "topdp/rng.hpp"

namespace topdp {

namespace {

// Shortest round-trip formatting keeps CSV output deterministic and lossless.
std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

constexpr const char* kTraceHeader =
    "iteration,agent_id,accuracy,spent_epsilon,mean_sigma,messages_sent";
constexpr const char* kSummaryHeader =
    "iteration,mean_accuracy,std_accuracy,max_spent_epsilon";

void write_trace_row(std::ostream& out, const TraceRow& r) {
  out << r.iteration << ',' << r.agent_id << ',' << fmt(r.accuracy) << ','
      << fmt(r.spent_epsilon) << ',' << fmt(r.mean_sigma) << ',' << r.messages_sent
      << '\n';
}

// CSV dump of a dataset: header row, one sample per line, label last.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  for (std::size_t c = 0; c < d.feature_dim; ++c) out << 'f' << c << ',';
  out << "label\n";
  for (std::size_t i = 0; i < d.num_samples; ++i) {
    for (double v : d.row(i)) out << fmt(v) << ',';
    out << d.labels[i] << '\n';
  }
}

Graph build_graph(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto n = static_cast<AgentId>(cfg.n_agents);
  if (cfg.topology == "random") {
    return generate_random(n, cfg.connection_rate, seed, cfg.graph_retries);
  }
  TopologyParams params;
  params.hubs = cfg.star_hubs;
  params.branching = cfg.tree_branching;
  params.mesh_extra = cfg.mesh_extra;
  return generate_named(topology_kind_from_string(cfg.topology), n, params, seed);
}

}  // namespace

std::vector<MetricsRecord> summarize(const std::vector<TraceRow>& rows) {
  std::vector<MetricsRecord> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    const int iteration = rows[i].iteration;
    double sum = 0.0, sum_sq = 0.0, max_eps = 0.0;
    std::size_t count = 0;
    while (i < rows.size() && rows[i].iteration == iteration) {
      sum += rows[i].accuracy;
      sum_sq += rows[i].accuracy * rows[i].accuracy;
      max_eps = std::max(max_eps, rows[i].spent_epsilon);
      ++count;
      ++i;
    }
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
    out.push_back({iteration, mean, std::sqrt(var), max_eps});
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const std::uint64_t master = cfg.master_seed;

  ExperimentResult result;
  result.graph = build_graph(cfg, split_seed(master, seed_purpose::kGraph));

  Dataset train, test;
  if (cfg.dataset == "synth") {
    train = synth_blobs(static_cast<std::size_t>(cfg.synth_per_class), cfg.synth_classes,
                        static_cast<std::size_t>(cfg.synth_dim), cfg.synth_spread,
                        split_seed(master, seed_purpose::kTrainData));
    test = synth_blobs(static_cast<std::size_t>(cfg.synth_test_per_class),
                       cfg.synth_classes, static_cast<std::size_t>(cfg.synth_dim),
                       cfg.synth_spread, split_seed(master, seed_purpose::kTestData));
  } else {
    train = load_idx(cfg.idx_images, cfg.idx_labels);
    test = load_idx(cfg.idx_test_images, cfg.idx_test_labels);
    if (test.feature_dim != train.feature_dim) {
      throw std::runtime_error("run_experiment: train/test feature width mismatch");
    }
    test.num_classes = train.num_classes = std::max(train.num_classes, test.num_classes);
  }

  ModelSpec spec;
  spec.kind = cfg.model == "mlp" ? ModelKind::kMlp : ModelKind::kLogistic;
  spec.input_dim = static_cast<int>(train.feature_dim);
  spec.num_classes = train.num_classes;
  spec.hidden_dim = cfg.hidden_dim;

  auto shards = partition_iid(train, static_cast<std::size_t>(cfg.n_agents),
                              split_seed(master, seed_purpose::kPartition));
  const ModelParams x0 = initial_params(spec, split_seed(master, seed_purpose::kInit));

  const PrivacyBudget budget{cfg.epsilon, cfg.delta};
  std::vector<AgentState> agents;
  agents.reserve(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    AgentState a(static_cast<AgentId>(i), split_seed(master, seed_purpose::kAgent, i));
    a.estimate = x0;
    a.budget = budget;
    a.schedule = {calibrate_sigma0(budget, cfg.iterations, shards[i].num_samples),
                  cfg.gamma, cfg.period};
    a.shard = std::move(shards[i]);
    agents.push_back(std::move(a));
  }
  exchange_initial_sigmas(result.graph, agents);

  LearningConfig learn;
  learn.alpha = cfg.alpha;
  learn.lambda0 = cfg.lambda0;
  learn.clip_c = cfg.clip;
  learn.batch_size = cfg.batch_size;
  learn.lambda_fade = cfg.lambda_fade;

  SimOptions options;
  options.model = spec;
  options.testset = &test;
  options.log_messages = cfg.log_messages;
  options.scheduler_seed = split_seed(master, seed_purpose::kScheduler);
  const auto shard_size = train.num_samples / static_cast<std::size_t>(cfg.n_agents);
  options.eval_every =
      cfg.eval_every > 0
          ? cfg.eval_every
          : std::max<int>(1, static_cast<int>(shard_size) / cfg.batch_size);

  const bool writing = !cfg.out_dir.empty();
  std::ofstream trace_file;
  if (writing) {
    fs::create_directories(cfg.out_dir);
    {
      std::ofstream echo(fs::path(cfg.out_dir) / "config.txt");
      write_config_echo(cfg, echo);
    }
    {
      std::ofstream graph_file(fs::path(cfg.out_dir) / "graph.txt");
      write_edge_list(result.graph, graph_file);
    }
    if (cfg.dump_dataset && cfg.dataset == "synth") {
      write_dataset_csv(fs::path(cfg.out_dir) / "train.csv", train);
      write_dataset_csv(fs::path(cfg.out_dir) / "test.csv", test);
    }
    trace_file.open(fs::path(cfg.out_dir) / "trace.csv");
    if (!trace_file) throw std::runtime_error("run_experiment: cannot write to " + cfg.out_dir);
    trace_file << kTraceHeader << '\n';
    options.on_row = [&trace_file](const TraceRow& r) { write_trace_row(trace_file, r); };
  }

  const Mode mode = mode_from_string(cfg.algorithm);
  try {
    if (cfg.mode == "sync") {
      result.trace = run_synchronous(result.graph, agents, learn, cfg.iterations, mode,
                                     options);
    } else {
      result.trace = run_asynchronous(result.graph, agents, learn, cfg.iterations,
                                      cfg.dropout, mode, options);
    }
  } catch (const std::exception& e) {
    if (writing) {
      // Leave whatever streamed out plus an explicit marker of the abort.
      trace_file << "# run failed: " << e.what() << '\n' << std::flush;
    }
    throw;
  }

  result.summary = summarize(result.trace.rows);
  if (!result.summary.empty()) {
    result.final_mean_accuracy = result.summary.back().mean_accuracy;
  }

  if (writing) {
    trace_file.close();
    std::ofstream summary_file(fs::path(cfg.out_dir) / "summary.csv");
    summary_file << kSummaryHeader << '\n';
    for (const MetricsRecord& m : result.summary) {
      summary_file << m.iteration << ',' << fmt(m.mean_accuracy) << ','
                   << fmt(m.std_accuracy) << ',' << fmt(m.max_spent_epsilon) << '\n';
    }
    if (cfg.log_messages) {
      std::ofstream msg_file(fs::path(cfg.out_dir) / "messages.csv");
      msg_file << "iteration,from,to,noise_sigma,helper\n";
      for (const MessageRecord& m : result.trace.message_log) {
        msg_file << m.iteration << ',' << m.from << ',' << m.to << ','
                 << fmt(m.noise_sigma_used) << ',';
        if (m.helper) msg_file << *m.helper;
        msg_file << '\n';
      }
    }
  }
  return result;
}

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes = {
      "alpha", "epsilon", "connection_rate", "topology", "n_agents", "gamma", "period"};
  return axes;
}

void sweep(const ExperimentConfig& base, const std::string& axis,
           const std::vector<std::string>& values) {
  namespace fs = std::filesystem;
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    std::string joined;
    for (const auto& a : axes) joined += (joined.empty() ? "" : "|") + a;
    throw std::invalid_argument("sweep: unsupported axis '" + axis + "' (expected " +
                                joined + ")");
  }
  if (values.empty()) throw std::invalid_argument("sweep: need at least one value");
  if (base.out_dir.empty()) throw std::invalid_argument("sweep: out_dir must be set");

  fs::create_directories(base.out_dir);
  std::ofstream combined(fs::path(base.out_dir) / "sweep.csv");
  combined << "axis,value," << kTraceHeader << '\n';

  for (const std::string& value : values) {
    ExperimentConfig cfg = base;
    apply_config_key(cfg, axis, value);  // validates the value for the axis
    cfg.out_dir = (fs::path(base.out_dir) / (axis + "=" + value)).string();
    const ExperimentResult result = run_experiment(cfg);
    for (const TraceRow& r : result.trace.rows) {
      combined << axis << ',' << value << ',';
      write_trace_row(combined, r);
    }
  }
}

}  // namespace topdp
