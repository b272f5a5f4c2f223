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

#include "topdp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace topdp {

Mode mode_from_string(const std::string& name) {
  if (name == "topdp") return Mode::kTopdp;
  if (name == "topdp_no_decay") return Mode::kTopdpNoDecay;
  if (name == "full_noise") return Mode::kFullNoise;
  if (name == "no_noise") return Mode::kNoNoise;
  throw std::invalid_argument(
      "unknown algorithm '" + name +
      "' (expected topdp|topdp_no_decay|full_noise|no_noise)");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kTopdp: return "topdp";
    case Mode::kTopdpNoDecay: return "topdp_no_decay";
    case Mode::kFullNoise: return "full_noise";
    case Mode::kNoNoise: return "no_noise";
  }
  return "unknown";
}

namespace {

// Per-coordinate standard deviation of the Gaussian added to an estimate:
// schedule sigma times the clip scale normalized by the shard size (the
// movement a single swapped sample can cause in a shard-mean clipped
// gradient release). Keeping the shard size in the scale is what lets the
// desk-scale experiments distinguish the modes instead of drowning them.
double estimate_noise_stddev(double sigma, const LearningConfig& cfg,
                             std::size_t shard_size) {
  return sigma * cfg.clip_c / static_cast<double>(shard_size);
}

// lambda(t) = lambda0 / (1 + t / fade); fade defaults to the run length.
double fading_lambda(const LearningConfig& cfg, int t, int run_iterations) {
  const int fade = cfg.lambda_fade > 0 ? cfg.lambda_fade : run_iterations;
  return cfg.lambda0 /
         (1.0 + static_cast<double>(std::max(t, 0)) / static_cast<double>(fade));
}

// Effective schedule sigma this round under the given mode.
double step_sigma(const NoiseSchedule& schedule, int t, Mode mode) {
  if (mode == Mode::kNoNoise) return 0.0;
  if (mode == Mode::kTopdpNoDecay) return schedule.sigma0;
  return decayed_sigma(schedule, std::max(t, 0));
}

// The neighbor's sigma this round, reconstructed from the exchanged sigma0.
// The decay shape (gamma, period) is global configuration, so the local
// schedule's shape applies.
double neighbor_step_sigma(const AgentState& agent, AgentId k, int t, Mode mode) {
  NoiseSchedule neighbor_schedule = agent.schedule;
  neighbor_schedule.sigma0 = agent.neighbor_sigma0.at(k);
  return step_sigma(neighbor_schedule, t, mode);
}

std::vector<std::size_t> draw_batch(Rng& rng, std::size_t shard_size, int batch_size) {
  std::vector<std::size_t> batch(static_cast<std::size_t>(batch_size));
  for (auto& s : batch) s = rng.uniform_index(shard_size);
  return batch;
}

void check_learning_config(const LearningConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    throw std::invalid_argument("protocol: alpha must be in (0, 1]");
  }
  if (!(cfg.lambda0 > 0.0)) throw std::invalid_argument("protocol: lambda0 must be positive");
  if (!(cfg.clip_c > 0.0)) throw std::invalid_argument("protocol: clip_c must be positive");
  if (cfg.batch_size < 1) throw std::invalid_argument("protocol: batch_size must be positive");
  if (cfg.lambda_fade < 0) throw std::invalid_argument("protocol: lambda_fade must be non-negative");
}

void validate_run(const Graph& g, const std::vector<AgentState>& agents,
                  const LearningConfig& cfg, int iterations, const SimOptions& options) {
  check_learning_config(cfg);
  if (iterations < 1) throw std::invalid_argument("protocol: iterations must be positive");
  if (options.eval_every < 1) {
    throw std::invalid_argument("protocol: eval_every must be positive");
  }
  if (!is_connected(g)) throw std::invalid_argument("protocol: graph must be connected");
  if (agents.size() != g.num_agents()) {
    throw std::invalid_argument("protocol: need exactly one agent per graph vertex");
  }
  if (options.testset == nullptr) {
    throw std::invalid_argument("protocol: options.testset is required");
  }
  const std::size_t d = options.model.param_count();
  if (options.testset->feature_dim != static_cast<std::size_t>(options.model.input_dim)) {
    throw std::invalid_argument("protocol: testset does not match the model input width");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentState& a = agents[i];
    if (a.id != static_cast<AgentId>(i)) {
      throw std::invalid_argument("protocol: agents must be ordered by id");
    }
    if (a.estimate.size() != d) {
      throw std::invalid_argument("protocol: agent estimate length does not match the model");
    }
    if (a.shard.num_samples == 0) {
      throw std::invalid_argument("protocol: agent shard is empty");
    }
    if (a.shard.feature_dim != static_cast<std::size_t>(options.model.input_dim)) {
      throw std::invalid_argument("protocol: agent shard does not match the model input width");
    }
  }
}

void validate_sigma_exchange(const Graph& g, const std::vector<AgentState>& agents) {
  for (const AgentState& a : agents) {
    const auto& nbrs = g.neighbors(a.id);
    if (a.neighbor_sigma0.size() != nbrs.size()) {
      throw std::invalid_argument(
          "protocol: sigma exchange incomplete (run exchange_initial_sigmas first)");
    }
    for (AgentId k : nbrs) {
      if (!a.neighbor_sigma0.count(k)) {
        throw std::invalid_argument(
            "protocol: sigma exchange incomplete (run exchange_initial_sigmas first)");
      }
    }
  }
}

// Per-agent counters for one record window.
struct Window {
  std::vector<double> sigma_sum;
  std::vector<std::uint64_t> draws;
  std::vector<std::uint64_t> messages;

  explicit Window(std::size_t n) : sigma_sum(n, 0.0), draws(n, 0), messages(n, 0) {}

  void note_draw(AgentId i, double sigma) {
    sigma_sum[i] += sigma;
    ++draws[i];
  }
  void reset() {
    std::fill(sigma_sum.begin(), sigma_sum.end(), 0.0);
    std::fill(draws.begin(), draws.end(), 0);
    std::fill(messages.begin(), messages.end(), 0);
  }
};

void record_rows(int t, std::vector<AgentState>& agents, const SimOptions& options,
                 Window& window, TrainingTrace& trace) {
  for (AgentState& a : agents) {
    TraceRow row;
    row.iteration = t;
    row.agent_id = a.id;
    row.accuracy = evaluate_accuracy(options.model, a.estimate, *options.testset);
    row.spent_epsilon = a.spent_epsilon;
    row.mean_sigma =
        window.draws[a.id] ? window.sigma_sum[a.id] / static_cast<double>(window.draws[a.id])
                           : 0.0;
    row.messages_sent = window.messages[a.id];
    trace.rows.push_back(row);
    if (options.on_row) options.on_row(row);
  }
  window.reset();
}

void log_message(const Message& m, bool enabled, TrainingTrace& trace) {
  if (!enabled) return;
  trace.message_log.push_back({m.from, m.to, m.iteration, m.noise_sigma_used, m.helper});
}

}  // namespace

void exchange_initial_sigmas(const Graph& g, std::vector<AgentState>& agents) {
  if (agents.size() != g.num_agents()) {
    throw std::invalid_argument("exchange_initial_sigmas: need one agent per vertex");
  }
  for (AgentState& a : agents) a.neighbor_sigma0.clear();
  for (AgentState& a : agents) {
    for (AgentId k : g.neighbors(a.id)) {
      a.neighbor_sigma0[k] = agents[k].schedule.sigma0;
    }
  }
}

TrainingTrace run_synchronous(const Graph& g, std::vector<AgentState>& agents,
                              const LearningConfig& cfg, int iterations, Mode mode,
                              const SimOptions& options) {
  validate_run(g, agents, cfg, iterations, options);
  validate_sigma_exchange(g, agents);

  const std::size_t n = agents.size();
  const std::size_t d = options.model.param_count();
  TrainingTrace trace;
  Window window(n);

  // Startup: every agent takes one noisy local step from the shared start
  // and broadcasts the result, seeding all inboxes for round 0. This release
  // is part of the handshake and is not charged by the accountant, which
  // tracks the optimization rounds the calibration was solved for.
  {
    std::vector<Message> outbox;
    const double lambda = fading_lambda(cfg, 0, iterations);
    for (AgentState& a : agents) {
      const double sigma = step_sigma(a.schedule, 0, mode);
      const auto batch = draw_batch(a.rng, a.shard.num_samples, cfg.batch_size);
      const ModelParams gbar = clip_gradient(
          gradient(options.model, a.estimate, a.shard, batch), cfg.clip_c);
      const auto noise = sample_noise(d, estimate_noise_stddev(sigma, cfg, a.shard.num_samples), a.rng);
      if (sigma > 0.0) window.note_draw(a.id, sigma);
      a.estimate = local_update(a.estimate, lambda, gbar, noise);
      for (AgentId j : g.neighbors(a.id)) {
        outbox.push_back({a.id, j, -1, a.estimate, sigma, std::nullopt});
        ++window.messages[a.id];
      }
    }
    for (Message& m : outbox) {
      log_message(m, options.log_messages, trace);
      agents[m.to].inbox[m.from] = std::move(m.payload);
    }
  }

  const bool reuse = (mode == Mode::kTopdp || mode == Mode::kTopdpNoDecay);

  // Agents whose neighbors are all mutually connected can never reduce: every
  // candidate helper is adjacent to every other neighbor. Their cover is the
  // trivial all-uncovered plan regardless of draw order, so skip the helper
  // draws entirely; on such neighborhoods the reuse modes then consume the
  // exact same random stream as the no-reuse ones.
  std::vector<char> reducible(n, 0);
  if (reuse) {
    for (AgentId i = 0; i < static_cast<AgentId>(n); ++i) {
      for (AgentId j : g.neighbors(i)) {
        if (!non_adjacent_neighbors(g, i, j).empty()) {
          reducible[i] = 1;
          break;
        }
      }
    }
  }

  for (int t = 0; t < iterations; ++t) {
    std::vector<Message> outbox;
    const double lambda = fading_lambda(cfg, t, iterations);

    for (AgentState& a : agents) {
      const double sigma = step_sigma(a.schedule, t, mode);
      const auto& nbrs = g.neighbors(a.id);

      // One clipped stochastic gradient per round, reused for every send.
      const auto batch = draw_batch(a.rng, a.shard.num_samples, cfg.batch_size);
      const ModelParams gbar = clip_gradient(
          gradient(options.model, a.estimate, a.shard, batch), cfg.clip_c);

      CoverPlan plan;
      if (reuse) {
        plan = reducible[a.id] ? cover_neighbors(g, a.id, a.rng)
                               : cover_neighbors_ordered(g, a.id, {});
        for (const CoverAssignment& assignment : plan.assignments) {
          const AgentId k = assignment.helper;
          const double sigma_k = neighbor_step_sigma(a, k, t, mode);
          const auto residual = reduced_sigma(sigma, sigma_k, cfg.alpha);
          // Heterogeneous budgets can leave no residual variance; fall back
          // to a fresh full-scale draw (and drop the reduction tag).
          const double sigma_used = residual.value_or(sigma);
          const bool reduced = residual.has_value() && *residual < sigma;
          const ModelParams& helper_estimate = a.inbox.at(k);
          for (AgentId j : assignment.targets) {
            const auto noise =
                sample_noise(d, estimate_noise_stddev(sigma_used, cfg, a.shard.num_samples), a.rng);
            window.note_draw(a.id, sigma_used);
            Message m{a.id, j, t,
                      aggregate_update(a.estimate, helper_estimate, cfg.alpha, lambda,
                                       gbar, noise),
                      sigma_used,
                      reduced ? std::optional<AgentId>(k) : std::nullopt};
            outbox.push_back(std::move(m));
            ++window.messages[a.id];
          }
        }
      }

      // Refresh the local estimate against one uniformly chosen neighbor,
      // always with a fresh full-scale draw.
      const AgentId mixing_partner = nbrs[a.rng.uniform_index(nbrs.size())];
      const auto noise = sample_noise(d, estimate_noise_stddev(sigma, cfg, a.shard.num_samples), a.rng);
      if (sigma > 0.0) window.note_draw(a.id, sigma);
      a.estimate = aggregate_update(a.estimate, a.inbox.at(mixing_partner), cfg.alpha,
                                    lambda, gbar, noise);

      // Neighbors without a reduced-noise estimate receive the refreshed
      // local one (covered and uncovered sets partition the neighborhood).
      const std::vector<AgentId>& plain_recipients = reuse ? plan.uncovered : nbrs;
      for (AgentId j : plain_recipients) {
        outbox.push_back({a.id, j, t, a.estimate, sigma, std::nullopt});
        ++window.messages[a.id];
      }
    }

    // Lock step: deliveries only become visible next round.
    for (Message& m : outbox) {
      log_message(m, options.log_messages, trace);
      agents[m.to].inbox[m.from] = std::move(m.payload);
    }

    if (mode != Mode::kNoNoise) {
      for (AgentState& a : agents) {
        a.spent_epsilon = accumulated_epsilon(a.schedule.sigma0, t + 1, a.budget.delta,
                                              a.shard.num_samples);
      }
    }

    if ((t + 1) % options.eval_every == 0 || t == iterations - 1) {
      record_rows(t, agents, options, window, trace);
    }
  }
  return trace;
}

std::vector<std::pair<AgentId, AgentId>> pair_round(
    const std::vector<char>& available, const Graph& g,
    const std::vector<std::optional<AgentId>>& last_pairs, Rng& rng) {
  const AgentId n = g.num_agents();
  if (available.size() != n || last_pairs.size() != n) {
    throw std::invalid_argument("pair_round: flag vectors must cover every agent");
  }

  std::vector<AgentId> order;
  for (AgentId i = 0; i < n; ++i) {
    if (available[i]) order.push_back(i);
  }
  rng.shuffle(order);

  std::vector<char> matched(n, 0);
  std::vector<std::pair<AgentId, AgentId>> pairs;
  std::vector<AgentId> eligible;
  for (AgentId i : order) {
    if (matched[i]) continue;
    eligible.clear();
    for (AgentId j : g.neighbors(i)) {
      if (!available[j] || matched[j]) continue;
      if (last_pairs[i] && *last_pairs[i] == j) continue;
      if (last_pairs[j] && *last_pairs[j] == i) continue;
      eligible.push_back(j);
    }
    if (eligible.empty()) continue;
    const AgentId j = eligible[rng.uniform_index(eligible.size())];
    matched[i] = matched[j] = 1;
    pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  return pairs;
}

TrainingTrace run_asynchronous(const Graph& g, std::vector<AgentState>& agents,
                               const LearningConfig& cfg, int iterations,
                               double dropout, Mode mode, const SimOptions& options) {
  validate_run(g, agents, cfg, iterations, options);
  validate_sigma_exchange(g, agents);
  if (!(dropout >= 0.0 && dropout <= 1.0)) {
    throw std::invalid_argument("run_asynchronous: dropout must be in [0, 1]");
  }

  const std::size_t n = agents.size();
  const std::size_t d = options.model.param_count();
  TrainingTrace trace;
  Window window(n);
  Rng scheduler(options.scheduler_seed);

  // sigma of the most recent draw embedded in each agent's estimate; purely
  // a message diagnostic.
  std::vector<double> last_draw_sigma(n, 0.0);

  // Startup: one noisy local step each; no broadcast (exchanges carry
  // estimates directly). Not charged by the accountant (see run_synchronous).
  const double lambda0 = fading_lambda(cfg, 0, iterations);
  for (AgentState& a : agents) {
    const double sigma = step_sigma(a.schedule, 0, mode);
    const auto batch = draw_batch(a.rng, a.shard.num_samples, cfg.batch_size);
    const ModelParams gbar =
        clip_gradient(gradient(options.model, a.estimate, a.shard, batch), cfg.clip_c);
    const auto noise = sample_noise(d, estimate_noise_stddev(sigma, cfg, a.shard.num_samples), a.rng);
    if (sigma > 0.0) window.note_draw(a.id, sigma);
    a.estimate = local_update(a.estimate, lambda0, gbar, noise);
    last_draw_sigma[a.id] = sigma;
    a.last_pair.reset();
  }

  const bool reuse = (mode == Mode::kTopdp || mode == Mode::kTopdpNoDecay);

  for (int t = 0; t < iterations; ++t) {
    const double lambda = fading_lambda(cfg, t, iterations);

    std::vector<char> available(n, 0);
    int participants = 0;
    for (std::size_t i = 0; i < n; ++i) {
      available[i] = scheduler.bernoulli(dropout) ? 0 : 1;
      participants += available[i];
    }
    trace.participants_per_round.push_back(participants);

    std::vector<std::optional<AgentId>> last_pairs(n);
    for (std::size_t i = 0; i < n; ++i) last_pairs[i] = agents[i].last_pair;
    const auto pairs = pair_round(available, g, last_pairs, scheduler);

    std::vector<char> paired(n, 0);
    for (auto [i, j] : pairs) {
      paired[i] = paired[j] = 1;

      // Simultaneous exchange of the current estimates.
      const ModelParams xi = agents[i].estimate;
      const ModelParams xj = agents[j].estimate;
      Message mi{i, j, t, {}, last_draw_sigma[i], std::nullopt};
      Message mj{j, i, t, {}, last_draw_sigma[j], std::nullopt};
      log_message(mi, options.log_messages, trace);
      log_message(mj, options.log_messages, trace);
      window.messages[i] += 1;
      window.messages[j] += 1;

      auto update_side = [&](AgentId self, AgentId partner, const ModelParams& own,
                             const ModelParams& received) {
        AgentState& a = agents[self];
        const double sigma = step_sigma(a.schedule, t, mode);
        double sigma_used = sigma;
        if (reuse && sigma > 0.0) {
          const double sigma_partner = neighbor_step_sigma(a, partner, t, mode);
          sigma_used = reduced_sigma(sigma, sigma_partner, cfg.alpha).value_or(sigma);
        }
        const auto batch = draw_batch(a.rng, a.shard.num_samples, cfg.batch_size);
        const ModelParams gbar =
            clip_gradient(gradient(options.model, own, a.shard, batch), cfg.clip_c);
        const auto noise = sample_noise(d, estimate_noise_stddev(sigma_used, cfg, a.shard.num_samples), a.rng);
        if (sigma_used > 0.0) window.note_draw(a.id, sigma_used);
        a.estimate = aggregate_update(own, received, cfg.alpha, lambda, gbar, noise);
        last_draw_sigma[self] = sigma_used;
        a.last_pair = partner;
      };
      update_side(i, j, xi, xj);
      update_side(j, i, xj, xi);
    }

    // Everyone without a partner this round (unpaired or unavailable) takes
    // a noisy local step and carries no pairing restriction forward.
    for (AgentState& a : agents) {
      if (paired[a.id]) continue;
      const double sigma = step_sigma(a.schedule, t, mode);
      const auto batch = draw_batch(a.rng, a.shard.num_samples, cfg.batch_size);
      const ModelParams gbar = clip_gradient(
          gradient(options.model, a.estimate, a.shard, batch), cfg.clip_c);
      const auto noise = sample_noise(d, estimate_noise_stddev(sigma, cfg, a.shard.num_samples), a.rng);
      if (sigma > 0.0) window.note_draw(a.id, sigma);
      a.estimate = local_update(a.estimate, lambda, gbar, noise);
      last_draw_sigma[a.id] = sigma;
      a.last_pair.reset();
    }

    if (mode != Mode::kNoNoise) {
      for (AgentState& a : agents) {
        a.spent_epsilon = accumulated_epsilon(a.schedule.sigma0, t + 1, a.budget.delta,
                                              a.shard.num_samples);
      }
    }

    if ((t + 1) % options.eval_every == 0 || t == iterations - 1) {
      record_rows(t, agents, options, window, trace);
    }
  }
  return trace;
}

}  // namespace topdp
