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

#include "topdp/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace topdp {

Graph::Graph(AgentId n, const std::vector<std::pair<AgentId, AgentId>>& edge_list)
    : n_(n), adj_(n) {
  std::set<std::pair<AgentId, AgentId>> seen;
  for (auto [i, j] : edge_list) {
    if (i >= n || j >= n) {
      throw std::invalid_argument("Graph: edge endpoint out of range");
    }
    if (i == j) {
      throw std::invalid_argument("Graph: self loops are not allowed");
    }
    auto key = std::minmax(i, j);
    if (!seen.insert(key).second) continue;  // ignore duplicate edges
    adj_[i].push_back(j);
    adj_[j].push_back(i);
  }
  num_edges_ = seen.size();
  for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
}

void Graph::check_agent(AgentId i) const {
  if (i >= n_) throw std::invalid_argument("Graph: agent id out of range");
}

bool Graph::has_edge(AgentId i, AgentId j) const {
  check_agent(i);
  check_agent(j);
  const auto& nbrs = adj_[i];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

std::size_t Graph::degree(AgentId i) const {
  check_agent(i);
  return adj_[i].size();
}

const std::vector<AgentId>& Graph::neighbors(AgentId i) const {
  check_agent(i);
  return adj_[i];
}

std::vector<std::pair<AgentId, AgentId>> Graph::edges() const {
  std::vector<std::pair<AgentId, AgentId>> out;
  out.reserve(num_edges_);
  for (AgentId i = 0; i < n_; ++i) {
    for (AgentId j : adj_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;  // already lexicographic: outer loop ascending, lists sorted
}

Graph generate_random(AgentId n, double connection_rate, std::uint64_t seed,
                      int max_retries) {
  if (n < 2) throw std::invalid_argument("generate_random: need at least 2 agents");
  if (!(connection_rate > 0.0 && connection_rate <= 1.0)) {
    throw std::invalid_argument("generate_random: connection_rate must be in (0, 1]");
  }
  if (max_retries < 1) throw std::invalid_argument("generate_random: max_retries must be positive");

  Rng rng(seed);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId i = 0; i < n; ++i) {
      for (AgentId j = i + 1; j < n; ++j) {
        if (rng.bernoulli(connection_rate)) edges.emplace_back(i, j);
      }
    }
    Graph g(n, edges);
    if (is_connected(g)) return g;
  }
  std::ostringstream msg;
  msg << "generate_random: no connected graph after " << max_retries
      << " attempts (n=" << n << ", rate=" << connection_rate << ")";
  throw std::runtime_error(msg.str());
}

namespace {

Graph make_ring(AgentId n) {
  if (n < 2) throw std::invalid_argument("ring: need at least 2 agents");
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (AgentId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, edges);
}

Graph make_star(AgentId n, int hubs) {
  if (n < 2) throw std::invalid_argument("star: need at least 2 agents");
  if (hubs < 1 || static_cast<AgentId>(hubs) >= n) {
    throw std::invalid_argument("star: hubs must be in [1, n)");
  }
  const auto h = static_cast<AgentId>(hubs);
  std::vector<std::pair<AgentId, AgentId>> edges;
  // Hubs form a clique; leaves attach to hubs round-robin.
  for (AgentId a = 0; a < h; ++a) {
    for (AgentId b = a + 1; b < h; ++b) edges.emplace_back(a, b);
  }
  for (AgentId leaf = h; leaf < n; ++leaf) {
    edges.emplace_back((leaf - h) % h, leaf);
  }
  return Graph(n, edges);
}

Graph make_tree(AgentId n, int branching) {
  if (n < 2) throw std::invalid_argument("tree: need at least 2 agents");
  if (branching < 1) throw std::invalid_argument("tree: branching must be positive");
  std::vector<std::pair<AgentId, AgentId>> edges;
  // Complete b-ary tree laid out breadth-first: parent of i is (i-1)/b.
  for (AgentId i = 1; i < n; ++i) {
    edges.emplace_back((i - 1) / static_cast<AgentId>(branching), i);
  }
  return Graph(n, edges);
}

Graph make_mesh(AgentId n, double extra, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("mesh: need at least 2 agents");
  if (!(extra >= 0.0 && extra <= 1.0)) {
    throw std::invalid_argument("mesh: chord probability must be in [0, 1]");
  }
  Rng rng(seed);
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (AgentId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  // Random chords on top of the ring; the ring keeps the result connected.
  for (AgentId i = 0; i < n; ++i) {
    for (AgentId j = i + 1; j < n; ++j) {
      bool ring_edge = (j == i + 1) || (i == 0 && j == n - 1);
      if (!ring_edge && rng.bernoulli(extra)) edges.emplace_back(i, j);
    }
  }
  return Graph(n, edges);
}

}  // namespace

Graph generate_named(TopologyKind kind, AgentId n, const TopologyParams& params,
                     std::uint64_t seed) {
  switch (kind) {
    case TopologyKind::kRing:
      return make_ring(n);
    case TopologyKind::kStar:
      return make_star(n, params.hubs);
    case TopologyKind::kTree:
      return make_tree(n, params.branching);
    case TopologyKind::kMesh:
      return make_mesh(n, params.mesh_extra, seed);
    case TopologyKind::kRandom:
      throw std::invalid_argument("generate_named: use generate_random for random topologies");
  }
  throw std::invalid_argument("generate_named: unknown topology kind");
}

TopologyKind topology_kind_from_string(const std::string& name) {
  if (name == "random") return TopologyKind::kRandom;
  if (name == "ring") return TopologyKind::kRing;
  if (name == "star") return TopologyKind::kStar;
  if (name == "tree") return TopologyKind::kTree;
  if (name == "mesh") return TopologyKind::kMesh;
  throw std::invalid_argument("unknown topology '" + name +
                              "' (expected random|ring|star|tree|mesh)");
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::kRandom: return "random";
    case TopologyKind::kRing: return "ring";
    case TopologyKind::kStar: return "star";
    case TopologyKind::kTree: return "tree";
    case TopologyKind::kMesh: return "mesh";
  }
  return "unknown";
}

bool is_connected(const Graph& g) {
  const AgentId n = g.num_agents();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<AgentId> stack{0};
  seen[0] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    AgentId i = stack.back();
    stack.pop_back();
    for (AgentId j : g.neighbors(i)) {
      if (!seen[j]) {
        seen[j] = 1;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == n;
}

std::vector<AgentId> non_adjacent_neighbors(const Graph& g, AgentId i, AgentId j) {
  if (!g.has_edge(i, j)) {
    throw std::invalid_argument("non_adjacent_neighbors: (i, j) must be an edge");
  }
  std::vector<AgentId> out;
  for (AgentId m : g.neighbors(i)) {
    if (m != j && !g.has_edge(m, j)) out.push_back(m);
  }
  return out;  // sorted because neighbors(i) is sorted
}

CoverPlan cover_neighbors_ordered(const Graph& g, AgentId i,
                                  const std::vector<AgentId>& helper_order) {
  const auto& nbrs = g.neighbors(i);
  std::set<AgentId> uncovered(nbrs.begin(), nbrs.end());
  std::set<AgentId> neighbor_set(nbrs.begin(), nbrs.end());

  CoverPlan plan;
  for (AgentId k : helper_order) {
    if (uncovered.empty()) break;
    if (!neighbor_set.count(k)) {
      throw std::invalid_argument("cover_neighbors_ordered: helper is not a neighbor");
    }
    // Still-uncovered neighbors that k's transmissions cannot reach.
    CoverAssignment assignment{k, {}};
    for (AgentId j : non_adjacent_neighbors(g, i, k)) {
      if (uncovered.count(j)) {
        assignment.targets.push_back(j);
        uncovered.erase(j);
      }
    }
    if (!assignment.targets.empty()) {
      plan.assignments.push_back(std::move(assignment));
    }
  }
  plan.uncovered.assign(uncovered.begin(), uncovered.end());
  return plan;
}

CoverPlan cover_neighbors(const Graph& g, AgentId i, Rng& rng) {
  std::vector<AgentId> order = g.neighbors(i);
  rng.shuffle(order);  // uniform draws without replacement == random permutation
  return cover_neighbors_ordered(g, i, order);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << g.num_agents() << "\n";
  for (auto [i, j] : g.edges()) out << i << " " << j << "\n";
}

Graph read_edge_list(std::istream& in) {
  long long n = -1;
  if (!(in >> n) || n < 0) {
    throw std::runtime_error("read_edge_list: missing or invalid agent count");
  }
  std::vector<std::pair<AgentId, AgentId>> edges;
  long long i, j;
  while (in >> i >> j) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::runtime_error("read_edge_list: edge endpoint out of range");
    }
    edges.emplace_back(static_cast<AgentId>(i), static_cast<AgentId>(j));
  }
  if (!in.eof()) {
    throw std::runtime_error("read_edge_list: malformed edge line");
  }
  return Graph(static_cast<AgentId>(n), edges);
}

}  // namespace topdp
