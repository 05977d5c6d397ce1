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
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace calirec {

// Integral min-cost max-flow via successive shortest augmenting paths with
// Johnson potentials. Edge costs must be non-negative.
class MinCostFlow {
public:
  explicit MinCostFlow(int node_count);

  // Returns an edge id usable with flow_on() after solving.
  int add_edge(int from, int to, int64_t capacity, int64_t cost);

  // Pushes up to `limit` units from s to t along successive shortest paths.
  // Returns (flow actually sent, total cost of that flow).
  std::pair<int64_t, int64_t> solve(int source, int sink, int64_t limit);

  int64_t flow_on(int edge_id) const;

private:
  struct Arc {
    int to;
    int64_t cap;
    int64_t cost;
    int rev;  // index of the reverse arc in graph_[to]
  };
  std::vector<std::vector<Arc>> graph_;
  std::vector<std::pair<int, int>> edge_refs_;  // edge id -> (node, arc index)
  std::vector<int64_t> initial_cap_;
};

}  // namespace calirec
