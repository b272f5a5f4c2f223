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
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "topdp/dataset.hpp"
#include "topdp/graph.hpp"
#include "topdp/model.hpp"
#include "topdp/privacy.hpp"
#include "topdp/rng.hpp"

namespace topdp {

// What the engine does with noise on each update:
//   kTopdp        - neighbor-noise reuse plus schedule decay
//   kTopdpNoDecay - neighbor-noise reuse, sigma pinned at sigma0
//   kFullNoise    - every update and message carries a fresh full-scale
//                   (decayed) draw; no reuse
//   kNoNoise      - noiseless reference run
enum class Mode { kTopdp, kTopdpNoDecay, kFullNoise, kNoNoise };

Mode mode_from_string(const std::string& name);
std::string to_string(Mode mode);

// Everything one simulated agent owns. The inbox holds the latest estimate
// each neighbor addressed to this agent (synchronous runs only); it is what
// both the per-neighbor aggregation and the local mixing step read from.
struct AgentState {
  AgentId id = 0;
  ModelParams estimate;
  NoiseSchedule schedule;
  PrivacyBudget budget;
  Dataset shard;
  Rng rng;  // private stream: batches, cover draws, mixing partner, noise
  std::optional<AgentId> last_pair;  // partner in the immediately preceding round
  double spent_epsilon = 0.0;

  std::map<AgentId, double> neighbor_sigma0;  // filled by exchange_initial_sigmas
  std::map<AgentId, ModelParams> inbox;       // latest estimate per neighbor

  AgentState() : rng(0) {}
  explicit AgentState(AgentId agent_id, std::uint64_t seed) : id(agent_id), rng(seed) {}
};

// A parameter estimate in flight.
struct Message {
  AgentId from = 0;
  AgentId to = 0;
  int iteration = 0;  // -1 for the pre-loop initial broadcast
  ModelParams payload;
  double noise_sigma_used = 0.0;        // schedule units (pre clip-scale)
  std::optional<AgentId> helper;        // set iff the draw was noise-reduced
};

// Envelope-only copy kept when message logging is on; enough to audit the
// locality / reduction-soundness / full-scale invariants without retaining
// payloads.
struct MessageRecord {
  AgentId from = 0;
  AgentId to = 0;
  int iteration = 0;
  double noise_sigma_used = 0.0;
  std::optional<AgentId> helper;
};

// One per-agent evaluation record.
struct TraceRow {
  int iteration = 0;
  AgentId agent_id = 0;
  double accuracy = 0.0;
  double spent_epsilon = 0.0;
  double mean_sigma = 0.0;          // mean schedule-sigma of draws since last record
  std::uint64_t messages_sent = 0;  // messages sent since last record
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  std::vector<MessageRecord> message_log;   // populated iff options.log_messages
  std::vector<int> participants_per_round;  // async only: available agents per round
};

// Run-wide knobs that are not per-agent state.
struct SimOptions {
  ModelSpec model;
  const Dataset* testset = nullptr;  // required: accuracy records read it
  int eval_every = 100;              // record cadence in iterations (>= 1)
  bool log_messages = false;
  std::uint64_t scheduler_seed = 0;  // async: availability + pairing stream
  std::function<void(const TraceRow&)> on_row;  // streaming sink, optional
};

// Copies each agent's schedule sigma0 to all its graph neighbors (the
// startup handshake). Afterwards agent i's neighbor_sigma0 keys are exactly
// its neighborhood.
void exchange_initial_sigmas(const Graph& g, std::vector<AgentState>& agents);

// Lock-step gossip learning. Round t: every agent computes one clipped
// stochastic gradient, builds a greedy neighbor cover, sends each covered
// neighbor an aggregate with reduced residual noise (reusing the assigned
// helper's latest estimate), refreshes its own estimate against one uniformly
// chosen neighbor with a full-scale draw, and sends that estimate to the
// uncovered remainder. Messages become visible to recipients in round t + 1.
// Preconditions: connected graph, one agent per vertex in id order, equal
// estimate lengths matching options.model, completed sigma exchange.
TrainingTrace run_synchronous(const Graph& g, std::vector<AgentState>& agents,
                              const LearningConfig& cfg, int iterations, Mode mode,
                              const SimOptions& options);

// Pairwise gossip with per-round dropout. Each round: every agent is
// unavailable independently with probability `dropout`; available agents are
// matched over graph edges (never repeating the previous round's partner);
// matched pairs exchange estimates and update with reduced noise; everyone
// else takes a noisy local step.
TrainingTrace run_asynchronous(const Graph& g, std::vector<AgentState>& agents,
                               const LearningConfig& cfg, int iterations,
                               double dropout, Mode mode, const SimOptions& options);

// One round of randomized matching: agents propose in random order, each to a
// uniformly random eligible neighbor (available, unmatched, and not its
// previous-round partner). Returns pairs as (min, max), in formation order.
std::vector<std::pair<AgentId, AgentId>> pair_round(
    const std::vector<char>& available, const Graph& g,
    const std::vector<std::optional<AgentId>>& last_pairs, Rng& rng);

}  // namespace topdp
