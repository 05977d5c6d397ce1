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
#include <string>
#include <unordered_map>
#include <vector>

#include "calirec/dataset.hpp"

namespace calirec {

// Item popularity groups, ordered from most to least popular.
inline constexpr std::array<const char*, 3> kItemGroupLabels = {"H", "M", "T"};
inline constexpr std::array<const char*, 3> kSupplierGroupLabels = {"S1", "S2", "S3"};
inline constexpr std::array<const char*, 3> kUserGroupLabels = {"G1", "G2", "G3"};
inline constexpr int kHead = 0;
inline constexpr int kMid = 1;
inline constexpr int kTail = 2;

// Discrete probability vector over the item groups.
struct CategoryDistribution {
  std::vector<double> p;

  double sum() const;
  size_t size() const { return p.size(); }
  double operator[](size_t k) const { return p[k]; }
};

// Assignment of every train item to exactly one of H / M / T, with the
// rating share and cardinality of each group.
struct ItemPartition {
  std::unordered_map<std::string, int> group_of;  // item id -> 0 (H), 1 (M), 2 (T)
  std::array<double, 3> rating_share{};
  std::array<size_t, 3> sizes{};

  int group(const std::string& item) const;
  size_t long_tail_size() const { return sizes[kMid] + sizes[kTail]; }
};

struct SupplierPartition {
  std::unordered_map<std::string, int> group_of;  // supplier id -> 0 (S1), 1 (S2), 2 (S3)
  std::array<double, 3> rating_share{};
  std::array<size_t, 3> sizes{};

  int group(const std::string& supplier) const;
};

// Equal-sized user bins ordered from most popularity-focused (G1) to least (G3).
struct UserGroups {
  std::unordered_map<std::string, int> group_of;  // user id -> 0..2
  std::array<size_t, 3> sizes{};

  int group(const std::string& user) const;
};

// Sorts items by train rating count (descending, ties by item id), then
// assigns the shortest prefix reaching `head_share` of the ratings to H and
// the longest remaining suffix within `tail_share` to T; M is the rest.
ItemPartition partition_items(const Dataset& train, double head_share = 0.2, double tail_share = 0.2);

// Same boundary rule over suppliers ranked by the summed rating counts of
// their items. Every supplier of `map` restricted to train items is assigned.
SupplierPartition partition_suppliers(const Dataset& train, const SupplierMap& map,
                                      double head_share = 0.2, double tail_share = 0.2);

// Rating-weighted share of the user's train profile in each item group.
CategoryDistribution profile_distribution(int user_index, const Dataset& train, const ItemPartition& part);

// Unweighted share of list items in each item group.
CategoryDistribution list_distribution(const std::vector<std::string>& items, const ItemPartition& part);

// Users sorted by (p(H), p(M), p(T)) descending lexicographically, split into
// three contiguous bins whose sizes differ by at most one (remainder to the
// earlier bins).
UserGroups partition_users(const Dataset& train, const ItemPartition& part);

// Assignment file io: one "entity<TAB>label" row per line.
void write_item_partition_tsv(const ItemPartition& part, const std::string& path);
ItemPartition read_item_partition_tsv(const std::string& path);
void write_supplier_partition_tsv(const SupplierPartition& part, const std::string& path);
SupplierPartition read_supplier_partition_tsv(const std::string& path);
void write_user_groups_tsv(const UserGroups& groups, const std::string& path);
UserGroups read_user_groups_tsv(const std::string& path);

}  // namespace calirec
