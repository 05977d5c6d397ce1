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
#include <string>
#include <unordered_map>
#include <vector>

#include "calirec/knn.hpp"
#include "calirec/partition.hpp"

namespace calirec {

struct RerankConfig {
  double lambda = 0.5;          // trade-off weight for cp and xq
  int n = 10;                   // final list length
  double fs_protected_share = 0.5;  // binomial p for the minimum-protected table
  double fs_alpha = 0.1;            // significance level for the same table
};

// One delivered recommendation list. `provenance` records the algorithm and
// parameters that produced it, e.g. "cp lambda=0.30".
struct RankedList {
  std::string user;
  std::vector<std::string> items;
  std::string provenance;
};

// Jensen-Shannon divergence with base-2 logs. Symmetric, in [0, 1].
// Terms with a zero numerator contribute zero.
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

// Min-max normalizes candidate scores into [0, 1] (all-equal lists map to 1).
std::vector<double> minmax_normalize(const CandidateList& cands);

// Baseline: the top n candidates in their original order.
RankedList top_n(const CandidateList& cands, int n);

// Calibrated re-ranking: greedily grows the list maximizing
// (1 - lambda) * Rel(list) - lambda * JS(profile, group distribution of list),
// where Rel is the sum of min-max normalized candidate scores.
RankedList cp_rerank(const CandidateList& cands, const CategoryDistribution& profile,
                     const ItemPartition& part, const RerankConfig& cfg);

// Binary coverage re-ranking over {head, long-tail}: each step adds the item
// maximizing (1 - lambda) * score + lambda * (profile mass of the categories
// the item would newly cover).
RankedList xq_rerank(const CandidateList& cands, const CategoryDistribution& profile,
                     const ItemPartition& part, const RerankConfig& cfg);

// Minimum number of protected items required in each prefix 1..n: the
// smallest t whose binomial CDF at (j, protected_share) exceeds alpha.
std::vector<int> fs_min_protected_table(int n, double protected_share, double alpha);

// Ranked-group fairness re-ranking: merges the protected (mid + tail) and
// unprotected (head) candidate queues by score, forcing a protected pick
// whenever the prefix would otherwise fall below the minimum table.
RankedList fs_rerank(const CandidateList& cands, const ItemPartition& part,
                     const RerankConfig& cfg);

struct DmResult {
  std::vector<RankedList> lists;
  int64_t discrepancy = 0;  // sum over items of max(0, target - delivered)
  int64_t flow_cost = 0;
};

// Target of floor(scale * n * |users| / |candidate items|) units per item
// appearing in any candidate list.
std::unordered_map<std::string, int64_t> uniform_target(
    const std::vector<CandidateList>& all, int n, double scale);

// Exposure-constrained assignment: picks n items per user via min-cost flow,
// preferring relevant items while meeting per-item exposure targets where
// possible. Unmet target units are reported as `discrepancy`.
DmResult dm_rerank(const std::vector<CandidateList>& all,
                   const std::unordered_map<std::string, int64_t>& target,
                   const RerankConfig& cfg);

void write_lists_tsv(const std::string& path, const std::vector<RankedList>& lists);
std::vector<RankedList> read_lists_tsv(const std::string& path);

}  // namespace calirec
