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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topdp/rng.hpp"

namespace topdp {

// Agents are dense indices 0..n-1.
using AgentId = std::uint32_t;

// Undirected simple graph (no self loops, no multi-edges) over n agents.
// Neighbor lists are kept sorted; connectivity is a property of generators,
// not of the type itself (arbitrary edge sets can be represented).
class Graph {
 public:
  Graph() = default;
  Graph(AgentId n, const std::vector<std::pair<AgentId, AgentId>>& edge_list);

  AgentId num_agents() const { return n_; }
  std::size_t num_edges() const { return num_edges_; }
  bool has_edge(AgentId i, AgentId j) const;
  std::size_t degree(AgentId i) const;

  // Sorted ascending.
  const std::vector<AgentId>& neighbors(AgentId i) const;

  // All edges as (i, j) with i < j, lexicographically sorted.
  std::vector<std::pair<AgentId, AgentId>> edges() const;

 private:
  void check_agent(AgentId i) const;

  AgentId n_ = 0;
  std::size_t num_edges_ = 0;
  std::vector<std::vector<AgentId>> adj_;
};

enum class TopologyKind { kRandom, kRing, kStar, kTree, kMesh };

// Parameters for the structured generators. Only the fields relevant to the
// requested kind are read.
struct TopologyParams {
  int hubs = 2;             // star: number of mutually-connected hub agents
  int branching = 2;        // tree: children per node
  double mesh_extra = 0.2;  // mesh: probability of each extra chord on top of a ring
};

// Erdos-Renyi draw: each unordered pair becomes an edge with probability
// connection_rate; resampled until connected, up to max_retries attempts.
Graph generate_random(AgentId n, double connection_rate, std::uint64_t seed,
                      int max_retries = 1000);

// Deterministic structured topologies; `seed` is only consumed by the mesh
// kind (its extra chords are random). All results are connected.
Graph generate_named(TopologyKind kind, AgentId n, const TopologyParams& params = {},
                     std::uint64_t seed = 0);

TopologyKind topology_kind_from_string(const std::string& name);
std::string to_string(TopologyKind kind);

bool is_connected(const Graph& g);

// Neighbors of i that are neither j itself nor adjacent to j. These are the
// agents whose transmissions j can never observe, which is what makes their
// noise reusable when building an estimate destined for j.
std::vector<AgentId> non_adjacent_neighbors(const Graph& g, AgentId i, AgentId j);

// One helper agent and the set of recipients whose messages will reuse the
// helper's noise. `targets` is sorted and never empty.
struct CoverAssignment {
  AgentId helper;
  std::vector<AgentId> targets;
};

// Result of the greedy cover pass for a single sender.
// Invariants: assignment targets are pairwise disjoint, their union plus
// `uncovered` is exactly the sender's neighborhood, and every (helper,
// target) pair is non-adjacent.
struct CoverPlan {
  std::vector<CoverAssignment> assignments;
  std::vector<AgentId> uncovered;  // sorted; these receive full-scale noise
};

// Greedy cover with an explicit helper draw order (a permutation of a subset
// of i's neighborhood is permitted; helpers are consumed front to back).
// Exposed separately so the randomized variant below is testable against
// hand-traced orders.
CoverPlan cover_neighbors_ordered(const Graph& g, AgentId i,
                                  const std::vector<AgentId>& helper_order);

// Draws helpers uniformly without replacement from i's neighborhood until
// every neighbor is covered or helpers are exhausted.
CoverPlan cover_neighbors(const Graph& g, AgentId i, Rng& rng);

// Plain-text edge list: first line is the agent count, then one "i j" line
// per edge with i < j, sorted. Round-trips exactly through read_edge_list.
void write_edge_list(const Graph& g, std::ostream& out);
Graph read_edge_list(std::istream& in);

}  // namespace topdp
