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

// Microbenchmarks for the hot paths: cover construction, noise sampling,
// gradient evaluation, and a short end-to-end synchronous run.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "topdp/dataset.hpp"
#include "topdp/graph.hpp"
#include "topdp/model.hpp"
#include "topdp/privacy.hpp"
#include "topdp/protocol.hpp"
#include "topdp/rng.hpp"

namespace {

using namespace topdp;

void BM_CoverNeighbors(benchmark::State& state) {
  const Graph g = generate_random(30, 0.2, 42);
  Rng rng(7);
  AgentId i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cover_neighbors(g, i, rng));
    i = (i + 1) % g.num_agents();
  }
}
BENCHMARK(BM_CoverNeighbors);

void BM_ReducedSigma(benchmark::State& state) {
  double sigma = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reduced_sigma(sigma, 0.8 * sigma, 0.25));
    sigma = sigma < 4.0 ? sigma + 1e-6 : 1.0;
  }
}
BENCHMARK(BM_ReducedSigma);

void BM_SampleNoise1000(benchmark::State& state) {
  Rng rng(11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_noise(1000, 1.5, rng));
  }
}
BENCHMARK(BM_SampleNoise1000);

void BM_Gradient(benchmark::State& state) {
  const ModelKind kind = state.range(0) == 0 ? ModelKind::kLogistic : ModelKind::kMlp;
  ModelSpec spec{kind, 10, 4, 32};
  const Dataset data = synth_blobs(64, spec.num_classes, 10, 0.5, 3);
  const ModelParams params = initial_params(spec, 5);
  std::vector<std::size_t> batch(32);
  for (std::size_t b = 0; b < batch.size(); ++b) batch[b] = b * 7 % data.num_samples;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient(spec, params, data, batch));
  }
}
BENCHMARK(BM_Gradient)->Arg(0)->Arg(1);

void BM_SyncRound(benchmark::State& state) {
  const std::uint64_t master = 9;
  const Graph g = generate_named(TopologyKind::kRing, 10);
  const Dataset train = synth_blobs(100, 2, 2, 0.5, split_seed(master, seed_purpose::kTrainData));
  const Dataset test = synth_blobs(25, 2, 2, 0.5, split_seed(master, seed_purpose::kTestData));
  ModelSpec spec{ModelKind::kLogistic, 2, 2, 100};
  const ModelParams x0 = initial_params(spec, split_seed(master, seed_purpose::kInit));
  auto shards = partition_iid(train, 10, split_seed(master, seed_purpose::kPartition));

  const int iterations = 20;
  for (auto _ : state) {
    state.PauseTiming();
    std::vector<AgentState> agents;
    for (std::size_t i = 0; i < shards.size(); ++i) {
      AgentState a(static_cast<AgentId>(i), split_seed(master, seed_purpose::kAgent, i));
      a.estimate = x0;
      a.schedule = {1.0, 0.9, 1000};
      a.shard = shards[i];
      agents.push_back(std::move(a));
    }
    exchange_initial_sigmas(g, agents);
    SimOptions options;
    options.model = spec;
    options.testset = &test;
    options.eval_every = iterations;
    state.ResumeTiming();

    LearningConfig cfg;
    benchmark::DoNotOptimize(
        run_synchronous(g, agents, cfg, iterations, Mode::kTopdp, options));
  }
}
BENCHMARK(BM_SyncRound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
