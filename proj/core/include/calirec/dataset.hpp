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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace calirec {

// One raw interaction row: explicit rating or a play-count event.
struct Interaction {
  std::string user;
  std::string item;
  double value = 0.0;
  std::optional<int64_t> timestamp;  // carried through, never used by algorithms
};

// Immutable deduplicated rating store. Users and items are interned into
// dense indices sorted by id string, so every derived computation is
// independent of input row order.
class Dataset {
public:
  Dataset() = default;

  // Builds from (user, item, value) triples. Repeated (user, item) pairs keep
  // the last value; the duplicate count is reported through `dropped_dupes`.
  static Dataset from_ratings(const std::vector<std::tuple<std::string, std::string, double>>& triples,
                              size_t* dropped_dupes = nullptr);

  size_t user_count() const { return users_.size(); }
  size_t item_count() const { return items_.size(); }
  size_t rating_count() const { return rating_count_; }
  bool empty() const { return rating_count_ == 0; }

  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& items() const { return items_; }

  // -1 when absent
  int user_index(std::string_view id) const;
  int item_index(std::string_view id) const;
  const std::string& user_id(int u) const { return users_.at(u); }
  const std::string& item_id(int i) const { return items_.at(i); }

  // (item index, value), sorted by item index
  const std::vector<std::pair<int, double>>& profile(int u) const { return profiles_.at(u); }
  // (user index, value), sorted by user index
  const std::vector<std::pair<int, double>>& item_ratings(int i) const { return item_ratings_.at(i); }

  std::optional<double> rating(int u, int i) const;
  bool user_rated(int u, int i) const { return rating(u, i).has_value(); }

private:
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> user_index_;
  std::unordered_map<std::string, int> item_index_;
  std::vector<std::vector<std::pair<int, double>>> profiles_;
  std::vector<std::vector<std::pair<int, double>>> item_ratings_;
  size_t rating_count_ = 0;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
  uint64_t seed = 0;
};

// Total item -> supplier assignment.
struct SupplierMap {
  std::unordered_map<std::string, std::string> of_item;

  const std::string& supplier(const std::string& item) const;
  bool contains(const std::string& item) const { return of_item.count(item) != 0; }
};

// Reads one interaction per line: user<delim>item<delim>value[<delim>timestamp].
// Throws Error naming the line number on malformed rows and on empty files.
std::vector<Interaction> load_ratings(const std::string& path, const std::string& delim);

// Explicit-feedback path: dedupe triples into a canonical Dataset.
Dataset ratings_from_explicit(const std::vector<Interaction>& interactions);

// Play-count path: per user, each distinct item's total play count is mapped
// to a rating in {1..5} by the within-user quantile
//   rating = ceil(5 * |{j : count_j <= count}| / #distinct items).
// Monotone in count; ties share a rating; a user's largest count maps to 5.
Dataset frequency_to_ratings(const std::vector<Interaction>& interactions);

// Drops users with fewer than `min_profile` ratings, then items left with no
// ratings. Applied once, no iterative re-filtering.
Dataset filter_min_profile(const Dataset& d, int min_profile = 20);

// Per-user stratified random split: each user keeps round(ratio * |profile|)
// ratings in train (at least 1), the rest go to test. Deterministic per seed
// and independent of input order.
SplitDataset split(const Dataset& d, double ratio, uint64_t seed);

// Reads item<delim>supplier rows, restricts the map to items of `d` and `d`
// to mapped items. Items without a supplier record are dropped and counted.
std::pair<SupplierMap, Dataset> load_supplier_map(const std::string& path, const Dataset& d,
                                                  const std::string& delim = "\t");

// Canonical tab-separated user, item, rating files.
void write_ratings_tsv(const Dataset& d, const std::string& path);
Dataset read_ratings_tsv(const std::string& path);

void write_supplier_tsv(const SupplierMap& map, const std::string& path);
SupplierMap read_supplier_tsv(const std::string& path);

}  // namespace calirec
