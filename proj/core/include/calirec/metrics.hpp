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

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "calirec/dataset.hpp"
#include "calirec/partition.hpp"
#include "calirec/rerank.hpp"

namespace calirec {

// Signed per-group deviations q - p plus the mean of their absolute values.
struct Deviation {
  std::array<double, 3> per_group{};
  double average = 0.0;
};

struct UpdResult {
  std::array<double, 3> per_group{};  // mean profile/list divergence per user group
  double average = 0.0;               // unweighted mean of the group means
};

struct ExposureRow {
  std::string item;
  long long rating_count = 0;  // train popularity
  std::string group;           // H, M or T
  double exposure = 0.0;       // recommendation count / number of users in the run
};

struct MetricsReport {
  double precision = 0.0;
  double agg_div = 0.0;
  double lc = 0.0;
  double gini = 0.0;
  double esf = 0.0;
  double ipd = 0.0;
  double upd = 0.0;
  double spd = 0.0;
  std::array<double, 3> ipd_group{};
  std::array<double, 3> spd_group{};
  std::array<double, 3> upd_group{};
  std::vector<ExposureRow> exposure;
  int n = 0;  // list length used as the precision denominator
  size_t users_evaluated = 0;
  size_t users_skipped = 0;
};

constexpr double kNoRatingThreshold = -std::numeric_limits<double>::infinity();

// Mean over evaluated users of |list ∩ test items rated >= min_rating| / n.
// Users absent from the test set are skipped and counted via `skipped`.
double precision_at_n(const std::vector<RankedList>& run, const Dataset& test, int n,
                      double min_rating = kNoRatingThreshold,
                      size_t* evaluated = nullptr, size_t* skipped = nullptr);

// Distinct recommended items as a fraction of the catalog.
double aggregate_diversity(const std::vector<RankedList>& run, const Dataset& catalog);

// Distinct recommended mid + tail items as a fraction of all mid + tail items.
double long_tail_coverage(const std::vector<RankedList>& run, const ItemPartition& part);

// Inequality of recommendation shares across the catalog, unrecommended items
// included with share zero. 0 = uniform, 1 = single item takes everything.
double gini_index(const std::vector<RankedList>& run, const Dataset& catalog);

// Sum over the three supplier bins of sqrt(slots delivered to that bin).
double equity_of_attention(const std::vector<RankedList>& run,
                           const SupplierPartition& spart, const SupplierMap& suppliers);

// Delivered slot share minus train rating share, per supplier bin.
Deviation supplier_popularity_deviation(const std::vector<RankedList>& run,
                                        const SupplierPartition& spart,
                                        const SupplierMap& suppliers);

// Delivered slot share minus train rating share, per item group.
Deviation item_popularity_deviation(const std::vector<RankedList>& run,
                                    const ItemPartition& part);

// Mean profile-vs-list divergence per user group, averaged across groups.
UpdResult user_popularity_deviation(const std::vector<RankedList>& run,
                                    const Dataset& train, const ItemPartition& part,
                                    const UserGroups& groups);

// Per-item train popularity, group label and exposure rate, sorted by
// descending popularity (ties by item id). Covers the whole catalog.
std::vector<ExposureRow> exposure_table(const std::vector<RankedList>& run,
                                        const Dataset& train, const ItemPartition& part);

// Runs the whole suite. The precision denominator is the longest delivered
// list length.
MetricsReport evaluate_run(const std::vector<RankedList>& run, const Dataset& train,
                           const Dataset& test, const ItemPartition& part,
                           const SupplierPartition& spart, const UserGroups& groups,
                           const SupplierMap& suppliers,
                           double min_rating = kNoRatingThreshold);

}  // namespace calirec
