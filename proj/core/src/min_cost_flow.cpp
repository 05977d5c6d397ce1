// Copyright 2026 The calirec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "calirec/min_cost_flow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "calirec/common.hpp"

namespace calirec {

namespace {
constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
}

MinCostFlow::MinCostFlow(int node_count) : graph_(node_count) {
  if (node_count <= 0) throw Error("flow network needs at least one node");
}

int MinCostFlow::add_edge(int from, int to, int64_t capacity, int64_t cost) {
  int n = static_cast<int>(graph_.size());
  if (from < 0 || from >= n || to < 0 || to >= n)
    throw Error(strf("flow edge %d->%d out of range", from, to));
  if (capacity < 0) throw Error("flow edge capacity must be non-negative");
  if (cost < 0) throw Error("flow edge cost must be non-negative");
  Arc fwd{to, capacity, cost, static_cast<int>(graph_[to].size())};
  Arc bwd{from, 0, -cost, static_cast<int>(graph_[from].size())};
  graph_[from].push_back(fwd);
  graph_[to].push_back(bwd);
  edge_refs_.emplace_back(from, static_cast<int>(graph_[from].size()) - 1);
  initial_cap_.push_back(capacity);
  return static_cast<int>(edge_refs_.size()) - 1;
}

std::pair<int64_t, int64_t> MinCostFlow::solve(int source, int sink, int64_t limit) {
  int n = static_cast<int>(graph_.size());
  if (source < 0 || source >= n || sink < 0 || sink >= n || source == sink)
    throw Error("flow solve needs distinct source and sink nodes");

  std::vector<int64_t> potential(n, 0);
  std::vector<int64_t> dist(n);
  std::vector<int> prev_node(n), prev_arc(n);
  int64_t flow = 0, cost = 0;

  while (flow < limit) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[source] = 0;
    using Item = std::pair<int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0, source);
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (int a = 0; a < static_cast<int>(graph_[u].size()); ++a) {
        const Arc& arc = graph_[u][a];
        if (arc.cap <= 0) continue;
        int64_t nd = d + arc.cost + potential[u] - potential[arc.to];
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          prev_node[arc.to] = u;
          prev_arc[arc.to] = a;
          heap.emplace(nd, arc.to);
        }
      }
    }
    if (dist[sink] >= kInf) break;
    for (int v = 0; v < n; ++v)
      if (dist[v] < kInf) potential[v] += dist[v];

    int64_t push = limit - flow;
    for (int v = sink; v != source; v = prev_node[v])
      push = std::min(push, graph_[prev_node[v]][prev_arc[v]].cap);
    for (int v = sink; v != source; v = prev_node[v]) {
      Arc& arc = graph_[prev_node[v]][prev_arc[v]];
      arc.cap -= push;
      graph_[v][arc.rev].cap += push;
      cost += push * arc.cost;
    }
    flow += push;
  }
  return {flow, cost};
}

int64_t MinCostFlow::flow_on(int edge_id) const {
  if (edge_id < 0 || edge_id >= static_cast<int>(edge_refs_.size()))
    throw Error("unknown flow edge id");
  auto [node, idx] = edge_refs_[edge_id];
  return initial_cap_[edge_id] - graph_[node][idx].cap;
}

}  // namespace calirec
