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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "topdp/config.hpp"
#include "topdp/dataset.hpp"
#include "topdp/experiment.hpp"
#include "topdp/graph.hpp"
#include "topdp/rng.hpp"

namespace {

namespace fs = std::filesystem;
using namespace topdp;

// Scratch directory wiped on both entry and exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string echo_string(const ExperimentConfig& cfg) {
  std::ostringstream out;
  write_config_echo(cfg, out);
  return out.str();
}

bool throws_mentioning(const std::function<void()>& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

using Overrides = std::vector<std::pair<std::string, std::string>>;

}  // namespace

TEST_CASE("apply_config_key accepts valid values and rejects bad ones by key") {
  ExperimentConfig cfg;

  // Enumerated strings.
  apply_config_key(cfg, "mode", "async");
  CHECK(cfg.mode == "async");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "mode", "lockstep"); }, "mode"));
  apply_config_key(cfg, "algorithm", "topdp_no_decay");
  CHECK(cfg.algorithm == "topdp_no_decay");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "algorithm", "dpsgd"); }, "algorithm"));
  apply_config_key(cfg, "topology", "mesh");
  CHECK(cfg.topology == "mesh");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "topology", "hypercube"); }, "topology"));
  apply_config_key(cfg, "model", "mlp");
  CHECK(cfg.model == "mlp");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "model", "cnn"); }, "model"));
  apply_config_key(cfg, "dataset", "synth");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "dataset", "csv"); }, "dataset"));

  // Integers with their lower bounds.
  apply_config_key(cfg, "iterations", "1");
  CHECK(cfg.iterations == 1);
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "iterations", "0"); }, "iterations"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "iterations", "12x"); }, "iterations"));
  apply_config_key(cfg, "n_agents", "2");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "n_agents", "1"); }, "n_agents"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "batch_size", "0"); }, "batch_size"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "period", "0"); }, "period"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "synth_classes", "1"); }, "synth_classes"));
  apply_config_key(cfg, "lambda_fade", "0");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "lambda_fade", "-1"); }, "lambda_fade"));
  apply_config_key(cfg, "eval_every", "0");  // 0 selects epoch cadence
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "eval_every", "-1"); }, "eval_every"));

  // Doubles with their ranges.
  apply_config_key(cfg, "dropout", "0");
  apply_config_key(cfg, "dropout", "1");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "dropout", "1.01"); }, "dropout"));
  apply_config_key(cfg, "connection_rate", "1");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "connection_rate", "0"); },
                          "connection_rate"));
  apply_config_key(cfg, "mesh_extra", "0");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "mesh_extra", "-0.2"); }, "mesh_extra"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "epsilon", "0"); }, "epsilon"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "delta", "1"); }, "delta"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "gamma", "0"); }, "gamma"));
  apply_config_key(cfg, "gamma", "1");
  apply_config_key(cfg, "alpha", "1");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "alpha", "0"); }, "alpha"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "alpha", "1.2"); }, "alpha"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "lambda0", "0"); }, "lambda0"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "clip", "-4"); }, "clip"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "alpha", "a"); }, "alpha"));
  apply_config_key(cfg, "synth_spread", "0");
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "synth_spread", "-0.1"); },
                          "synth_spread"));

  // Unsigned seed.
  apply_config_key(cfg, "master_seed", "18446744073709551615");
  CHECK(cfg.master_seed == 18446744073709551615ULL);
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "master_seed", "-1"); }, "master_seed"));
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "master_seed", "abc"); }, "master_seed"));

  // Booleans.
  apply_config_key(cfg, "log_messages", "true");
  CHECK(cfg.log_messages);
  apply_config_key(cfg, "log_messages", "0");
  CHECK_FALSE(cfg.log_messages);
  apply_config_key(cfg, "dump_dataset", "1");
  CHECK(cfg.dump_dataset);
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "log_messages", "yes"); },
                          "log_messages"));

  // Unknown keys name themselves.
  CHECK(throws_mentioning([&] { apply_config_key(cfg, "bogus_key", "1"); }, "bogus_key"));

  // The key list covers the new fields and matches the echo line count.
  const auto keys = config_keys();
  const auto echoed = lines_of(echo_string(ExperimentConfig{}));
  CHECK(keys.size() == echoed.size());
  for (const char* expected : {"mode", "algorithm", "alpha", "dump_dataset", "out_dir"}) {
    CHECK(std::find(keys.begin(), keys.end(), expected) != keys.end());
  }
}

TEST_CASE("parse_config reads key=value files and applies overrides last") {
  TempDir tmp("topdp_test_config");
  const fs::path file = tmp / "run.cfg";
  write_file(file,
             "# experiment setup\n"
             "mode = sync\n"
             "iterations = 12   # trailing comment\n"
             "alpha=0.5\n"
             "\n"
             "  out_dir =  runs/a  \n");

  const ExperimentConfig cfg = parse_config(file.string());
  CHECK(cfg.mode == "sync");
  CHECK(cfg.iterations == 12);
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.out_dir == "runs/a");

  // Later overrides win, in order.
  const ExperimentConfig over =
      parse_config(file.string(), Overrides{{"alpha", "0.75"}, {"alpha", "0.8"}});
  CHECK(over.alpha == 0.8);
  CHECK(over.iterations == 12);

  // Empty path means defaults plus overrides.
  const ExperimentConfig defaults = parse_config("");
  CHECK(echo_string(defaults) == echo_string(ExperimentConfig{}));

  CHECK_THROWS_AS(parse_config((tmp / "missing.cfg").string()), std::runtime_error);

  write_file(tmp / "bad.cfg", "mode = sync\nnot a key value line\n");
  CHECK(throws_mentioning([&] { parse_config((tmp / "bad.cfg").string()); }, ":2"));
}

TEST_CASE("config echo round-trips through a file exactly") {
  TempDir tmp("topdp_test_echo");
  ExperimentConfig cfg;
  apply_config_key(cfg, "alpha", "0.3333333333333333");
  apply_config_key(cfg, "epsilon", "0.007");
  apply_config_key(cfg, "delta", "1e-06");
  apply_config_key(cfg, "gamma", "0.95");
  apply_config_key(cfg, "master_seed", "18446744073709551615");
  apply_config_key(cfg, "dump_dataset", "true");
  apply_config_key(cfg, "out_dir", "my runs/x");
  apply_config_key(cfg, "topology", "tree");
  apply_config_key(cfg, "dropout", "0.125");

  const std::string first = echo_string(cfg);
  write_file(tmp / "echo.cfg", first);
  const ExperimentConfig reparsed = parse_config((tmp / "echo.cfg").string());
  CHECK(echo_string(reparsed) == first);
  CHECK(reparsed.alpha == cfg.alpha);
  CHECK(reparsed.epsilon == cfg.epsilon);
  CHECK(reparsed.delta == cfg.delta);
  CHECK(reparsed.master_seed == cfg.master_seed);
  CHECK(reparsed.out_dir == cfg.out_dir);
}

TEST_CASE("dataset=idx requires all four file paths") {
  CHECK_THROWS_AS(parse_config("", Overrides{{"dataset", "idx"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("", Overrides{{"dataset", "idx"},
                                             {"idx_images", "a"},
                                             {"idx_labels", "b"},
                                             {"idx_test_images", "c"}}),
                  std::invalid_argument);
  const ExperimentConfig ok = parse_config("", Overrides{{"dataset", "idx"},
                                                         {"idx_images", "a"},
                                                         {"idx_labels", "b"},
                                                         {"idx_test_images", "c"},
                                                         {"idx_test_labels", "d"}});
  CHECK(ok.dataset == "idx");
  CHECK(ok.idx_test_labels == "d");
}

TEST_CASE("summarize aggregates grouped rows into per-iteration records") {
  CHECK(summarize({}).empty());

  std::vector<TraceRow> rows;
  rows.push_back({4, 0, 0.5, 0.1, 1.0, 2});
  rows.push_back({4, 1, 0.7, 0.3, 1.0, 2});
  rows.push_back({4, 2, 0.9, 0.2, 1.0, 2});
  rows.push_back({9, 0, 1.0, 0.5, 1.0, 2});
  rows.push_back({9, 1, 1.0, 0.4, 1.0, 2});
  rows.push_back({9, 2, 0.4, 0.6, 1.0, 2});

  const auto summary = summarize(rows);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].iteration == 4);
  CHECK(summary[0].mean_accuracy == doctest::Approx(0.7).epsilon(1e-12));
  // Population standard deviation of {0.5, 0.7, 0.9}.
  CHECK(summary[0].std_accuracy ==
        doctest::Approx(std::sqrt((0.25 + 0.49 + 0.81) / 3.0 - 0.49)).epsilon(1e-9));
  CHECK(summary[0].max_spent_epsilon == 0.3);
  CHECK(summary[1].iteration == 9);
  CHECK(summary[1].mean_accuracy == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(summary[1].std_accuracy ==
        doctest::Approx(std::sqrt((1.0 + 1.0 + 0.16) / 3.0 - 0.64)).epsilon(1e-9));
  CHECK(summary[1].max_spent_epsilon == 0.6);

  // A single row has zero spread.
  const auto single = summarize({{0, 0, 0.25, 0.0, 0.0, 0}});
  REQUIRE(single.size() == 1);
  CHECK(single[0].std_accuracy == 0.0);
  CHECK(single[0].mean_accuracy == 0.25);
}

TEST_CASE("run_experiment writes the full artifact set deterministically") {
  TempDir tmp("topdp_test_run");
  const Overrides base = {
      {"topology", "ring"},       {"n_agents", "4"},
      {"iterations", "20"},       {"eval_every", "5"},
      {"synth_per_class", "40"},  {"synth_test_per_class", "10"},
      {"algorithm", "topdp"},     {"master_seed", "11"},
      {"log_messages", "true"},   {"dump_dataset", "true"},
  };
  auto with_out = [&](const std::string& dir) {
    Overrides o = base;
    o.emplace_back("out_dir", (tmp / dir).string());
    return parse_config("", o);
  };

  const ExperimentConfig cfg = with_out("d1");
  const ExperimentResult r1 = run_experiment(cfg);

  // 4 agents x 4 evaluation points.
  REQUIRE(r1.trace.rows.size() == 16);
  REQUIRE(r1.summary.size() == 4);
  CHECK(r1.final_mean_accuracy == r1.summary.back().mean_accuracy);
  {
    std::set<int> iters;
    for (const TraceRow& r : r1.trace.rows) iters.insert(r.iteration);
    CHECK(iters == std::set<int>{4, 9, 14, 19});
  }

  for (const char* name : {"trace.csv", "summary.csv", "config.txt", "graph.txt",
                           "messages.csv", "train.csv", "test.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(tmp / "d1" / name));
  }

  // trace.csv reparses to exactly the in-memory rows (shortest round-trip).
  const auto trace_lines = lines_of(read_file(tmp / "d1" / "trace.csv"));
  REQUIRE(trace_lines.size() == 17);
  CHECK(trace_lines[0] == "iteration,agent_id,accuracy,spent_epsilon,mean_sigma,messages_sent");
  for (std::size_t i = 0; i < 16; ++i) {
    const auto f = split_csv(trace_lines[i + 1]);
    REQUIRE(f.size() == 6);
    const TraceRow& r = r1.trace.rows[i];
    CHECK(std::stoi(f[0]) == r.iteration);
    CHECK(static_cast<AgentId>(std::stoul(f[1])) == r.agent_id);
    CHECK(std::stod(f[2]) == r.accuracy);
    CHECK(std::stod(f[3]) == r.spent_epsilon);
    CHECK(std::stod(f[4]) == r.mean_sigma);
    CHECK(std::stoull(f[5]) == r.messages_sent);
  }

  // summary.csv reparses to the in-memory summary.
  const auto summary_lines = lines_of(read_file(tmp / "d1" / "summary.csv"));
  REQUIRE(summary_lines.size() == 5);
  CHECK(summary_lines[0] == "iteration,mean_accuracy,std_accuracy,max_spent_epsilon");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto f = split_csv(summary_lines[i + 1]);
    REQUIRE(f.size() == 4);
    CHECK(std::stoi(f[0]) == r1.summary[i].iteration);
    CHECK(std::stod(f[1]) == r1.summary[i].mean_accuracy);
    CHECK(std::stod(f[2]) == r1.summary[i].std_accuracy);
    CHECK(std::stod(f[3]) == r1.summary[i].max_spent_epsilon);
  }

  // config.txt is the exact resolved echo; graph.txt is the 4-ring.
  CHECK(read_file(tmp / "d1" / "config.txt") == echo_string(cfg));
  {
    std::ifstream in(tmp / "d1" / "graph.txt");
    const Graph g = read_edge_list(in);
    CHECK(g.num_agents() == 4);
    CHECK(g.edges() == generate_named(TopologyKind::kRing, 4).edges());
  }

  // messages.csv holds one line per logged envelope.
  CHECK(lines_of(read_file(tmp / "d1" / "messages.csv")).size() ==
        r1.trace.message_log.size() + 1);

  // train.csv carries the generated samples, label last.
  const auto train_lines = lines_of(read_file(tmp / "d1" / "train.csv"));
  REQUIRE(train_lines.size() == 81);  // 40 per class x 2 classes + header
  CHECK(train_lines[0] == "f0,f1,label");
  const Dataset regen = synth_blobs(40, 2, 2, 0.5, split_seed(11, seed_purpose::kTrainData));
  const auto first = split_csv(train_lines[1]);
  REQUIRE(first.size() == 3);
  CHECK(std::stod(first[0]) == regen.features[0]);
  CHECK(std::stod(first[1]) == regen.features[1]);
  CHECK(std::stoi(first[2]) == regen.labels[0]);

  // A second run with the same seed is byte-identical.
  run_experiment(with_out("d2"));
  CHECK(read_file(tmp / "d2" / "trace.csv") == read_file(tmp / "d1" / "trace.csv"));
  CHECK(read_file(tmp / "d2" / "summary.csv") == read_file(tmp / "d1" / "summary.csv"));
  CHECK(read_file(tmp / "d2" / "messages.csv") == read_file(tmp / "d1" / "messages.csv"));

  // out_dir="" runs the same simulation without touching the filesystem.
  Overrides quiet = base;
  quiet.emplace_back("out_dir", "");
  const ExperimentResult r3 = run_experiment(parse_config("", quiet));
  REQUIRE(r3.trace.rows.size() == r1.trace.rows.size());
  for (std::size_t i = 0; i < r1.trace.rows.size(); ++i) {
    CHECK(r3.trace.rows[i].accuracy == r1.trace.rows[i].accuracy);
    CHECK(r3.trace.rows[i].spent_epsilon == r1.trace.rows[i].spent_epsilon);
    CHECK(r3.trace.rows[i].mean_sigma == r1.trace.rows[i].mean_sigma);
    CHECK(r3.trace.rows[i].messages_sent == r1.trace.rows[i].messages_sent);
  }
  CHECK(r3.final_mean_accuracy == r1.final_mean_accuracy);
}

TEST_CASE("message and dataset files are opt-in") {
  TempDir tmp("topdp_test_optin");
  const ExperimentConfig cfg = parse_config(
      "", Overrides{{"topology", "ring"},
                    {"n_agents", "4"},
                    {"iterations", "5"},
                    {"eval_every", "5"},
                    {"synth_per_class", "20"},
                    {"synth_test_per_class", "5"},
                    {"out_dir", (tmp / "quiet").string()}});
  const ExperimentResult r = run_experiment(cfg);
  CHECK(!r.trace.rows.empty());
  CHECK(r.trace.message_log.empty());
  CHECK(fs::exists(tmp / "quiet" / "trace.csv"));
  CHECK_FALSE(fs::exists(tmp / "quiet" / "messages.csv"));
  CHECK_FALSE(fs::exists(tmp / "quiet" / "train.csv"));
  CHECK_FALSE(fs::exists(tmp / "quiet" / "test.csv"));
}

TEST_CASE("eval_every=0 resolves to one evaluation per local epoch") {
  // 80 training samples over 4 agents = 20 per shard; batch 2 => every 10.
  const ExperimentConfig cfg = parse_config(
      "", Overrides{{"topology", "ring"},
                    {"n_agents", "4"},
                    {"iterations", "20"},
                    {"eval_every", "0"},
                    {"batch_size", "2"},
                    {"synth_per_class", "40"},
                    {"synth_test_per_class", "5"},
                    {"algorithm", "no_noise"},
                    {"out_dir", ""}});
  const ExperimentResult r = run_experiment(cfg);
  std::set<int> iters;
  for (const TraceRow& row : r.trace.rows) iters.insert(row.iteration);
  CHECK(iters == std::set<int>{9, 19});
}

TEST_CASE("run_experiment drives the asynchronous engine") {
  TempDir tmp("topdp_test_async");
  const ExperimentConfig cfg = parse_config(
      "", Overrides{{"mode", "async"},
                    {"dropout", "0.2"},
                    {"topology", "ring"},
                    {"n_agents", "4"},
                    {"iterations", "10"},
                    {"eval_every", "5"},
                    {"synth_per_class", "20"},
                    {"synth_test_per_class", "5"},
                    {"out_dir", (tmp / "a").string()}});
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.trace.participants_per_round.size() == 10);
  CHECK(r.trace.rows.size() == 8);
  CHECK(fs::exists(tmp / "a" / "trace.csv"));
}

TEST_CASE("sweep writes one run per value plus a combined long-format table") {
  TempDir tmp("topdp_test_sweep");
  const ExperimentConfig base = parse_config(
      "", Overrides{{"topology", "ring"},
                    {"n_agents", "4"},
                    {"iterations", "10"},
                    {"eval_every", "10"},
                    {"synth_per_class", "20"},
                    {"synth_test_per_class", "5"},
                    {"master_seed", "17"},
                    {"out_dir", (tmp / "s").string()}});

  sweep(base, "alpha", {"0.25", "0.5"});

  CHECK(fs::exists(tmp / "s" / "alpha=0.25" / "trace.csv"));
  CHECK(fs::exists(tmp / "s" / "alpha=0.5" / "trace.csv"));

  const auto lines = lines_of(read_file(tmp / "s" / "sweep.csv"));
  REQUIRE(lines.size() == 9);  // header + 2 values x 4 agents x 1 record
  CHECK(lines[0] ==
        "axis,value,iteration,agent_id,accuracy,spent_epsilon,mean_sigma,messages_sent");
  for (int i = 1; i <= 4; ++i) CHECK(lines[i].rfind("alpha,0.25,9,", 0) == 0);
  for (int i = 5; i <= 8; ++i) CHECK(lines[i].rfind("alpha,0.5,9,", 0) == 0);

  // The axis does not touch the graph stream, so both runs share a topology.
  CHECK(read_file(tmp / "s" / "alpha=0.25" / "graph.txt") ==
        read_file(tmp / "s" / "alpha=0.5" / "graph.txt"));

  // Axis and value validation.
  CHECK_THROWS_AS(sweep(base, "clip", {"1"}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(base, "alpha", {}), std::invalid_argument);
  CHECK_THROWS_AS(sweep(base, "alpha", {"1.5"}), std::invalid_argument);
  ExperimentConfig no_dir = base;
  no_dir.out_dir.clear();
  CHECK_THROWS_AS(sweep(no_dir, "alpha", {"0.5"}), std::invalid_argument);

  const auto& axes = sweep_axes();
  for (const char* axis : {"alpha", "epsilon", "connection_rate", "topology", "n_agents",
                           "gamma", "period"}) {
    CHECK(std::find(axes.begin(), axes.end(), axis) != axes.end());
  }
}

TEST_CASE("sweeping the topology axis produces per-kind directories and graphs") {
  TempDir tmp("topdp_test_sweep_topo");
  const ExperimentConfig base = parse_config(
      "", Overrides{{"n_agents", "5"},
                    {"iterations", "5"},
                    {"eval_every", "5"},
                    {"synth_per_class", "20"},
                    {"synth_test_per_class", "5"},
                    {"out_dir", (tmp / "t").string()}});

  sweep(base, "topology", {"ring", "star"});

  std::ifstream ring_in(tmp / "t" / "topology=ring" / "graph.txt");
  std::ifstream star_in(tmp / "t" / "topology=star" / "graph.txt");
  const Graph ring = read_edge_list(ring_in);
  const Graph star = read_edge_list(star_in);
  CHECK(ring.edges() == generate_named(TopologyKind::kRing, 5).edges());
  CHECK(ring.edges() != star.edges());
}
