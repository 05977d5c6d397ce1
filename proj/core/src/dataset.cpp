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
#include "calirec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include "calirec/common.hpp"

namespace calirec {

namespace {

std::vector<std::string> split_row(const std::string& line, const std::string& delim) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t next = line.find(delim, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + delim.size();
  }
  return fields;
}

bool parse_double(const std::string& s, double* out) {
  try {
    size_t used = 0;
    *out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_int64(const std::string& s, int64_t* out) {
  try {
    size_t used = 0;
    *out = std::stoll(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

Dataset Dataset::from_ratings(const std::vector<std::tuple<std::string, std::string, double>>& triples,
                              size_t* dropped_dupes) {
  // stable sort by (user, item); within a run of duplicates the last element
  // is the latest input occurrence, which wins
  std::vector<size_t> order(triples.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ta = triples[a];
    const auto& tb = triples[b];
    if (std::get<0>(ta) != std::get<0>(tb)) return std::get<0>(ta) < std::get<0>(tb);
    return std::get<1>(ta) < std::get<1>(tb);
  });

  std::vector<size_t> kept;
  kept.reserve(order.size());
  size_t dupes = 0;
  for (size_t k = 0; k < order.size(); ++k) {
    bool last_of_run = (k + 1 == order.size()) ||
                       std::get<0>(triples[order[k]]) != std::get<0>(triples[order[k + 1]]) ||
                       std::get<1>(triples[order[k]]) != std::get<1>(triples[order[k + 1]]);
    if (last_of_run) {
      kept.push_back(order[k]);
    } else {
      ++dupes;
    }
  }
  if (dropped_dupes) *dropped_dupes = dupes;

  Dataset d;
  {
    std::vector<std::string> items;
    items.reserve(kept.size());
    for (size_t k : kept) {
      const std::string& uid = std::get<0>(triples[k]);
      if (d.users_.empty() || d.users_.back() != uid) d.users_.push_back(uid);
      items.push_back(std::get<1>(triples[k]));
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    d.items_ = std::move(items);
  }
  d.user_index_.reserve(d.users_.size());
  d.item_index_.reserve(d.items_.size());
  for (size_t k = 0; k < d.users_.size(); ++k) d.user_index_[d.users_[k]] = static_cast<int>(k);
  for (size_t k = 0; k < d.items_.size(); ++k) d.item_index_[d.items_[k]] = static_cast<int>(k);

  d.profiles_.resize(d.users_.size());
  d.item_ratings_.resize(d.items_.size());
  for (size_t k : kept) {
    int u = d.user_index_.at(std::get<0>(triples[k]));
    int i = d.item_index_.at(std::get<1>(triples[k]));
    double v = std::get<2>(triples[k]);
    d.profiles_[u].emplace_back(i, v);
    d.item_ratings_[i].emplace_back(u, v);
  }
  for (auto& p : d.profiles_) std::sort(p.begin(), p.end());
  for (auto& r : d.item_ratings_) std::sort(r.begin(), r.end());
  d.rating_count_ = kept.size();
  return d;
}

int Dataset::user_index(std::string_view id) const {
  auto it = user_index_.find(std::string(id));
  return it == user_index_.end() ? -1 : it->second;
}

int Dataset::item_index(std::string_view id) const {
  auto it = item_index_.find(std::string(id));
  return it == item_index_.end() ? -1 : it->second;
}

std::optional<double> Dataset::rating(int u, int i) const {
  const auto& prof = profiles_.at(u);
  auto it = std::lower_bound(prof.begin(), prof.end(), std::make_pair(i, -1.0));
  if (it != prof.end() && it->first == i) return it->second;
  return std::nullopt;
}

const std::string& SupplierMap::supplier(const std::string& item) const {
  auto it = of_item.find(item);
  if (it == of_item.end()) throw Error("no supplier recorded for item '" + item + "'");
  return it->second;
}

std::vector<Interaction> load_ratings(const std::string& path, const std::string& delim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ratings file '" + path + "'");
  if (delim.empty()) throw Error("delimiter must be non-empty");

  std::vector<Interaction> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_row(line, delim);
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error(strf("malformed row at %s:%zu: expected 3 or 4 fields, got %zu", path.c_str(),
                       lineno, fields.size()));
    }
    Interaction it;
    it.user = fields[0];
    it.item = fields[1];
    if (it.user.empty() || it.item.empty()) {
      throw Error(strf("malformed row at %s:%zu: empty user or item id", path.c_str(), lineno));
    }
    if (!parse_double(fields[2], &it.value) || it.value < 0.0) {
      throw Error(strf("malformed row at %s:%zu: bad value '%s'", path.c_str(), lineno,
                       fields[2].c_str()));
    }
    if (fields.size() == 4) {
      int64_t ts = 0;
      if (!parse_int64(fields[3], &ts)) {
        throw Error(strf("malformed row at %s:%zu: bad timestamp '%s'", path.c_str(), lineno,
                         fields[3].c_str()));
      }
      it.timestamp = ts;
    }
    out.push_back(std::move(it));
  }
  if (out.empty()) throw Error("no interactions in '" + path + "'");
  return out;
}

Dataset ratings_from_explicit(const std::vector<Interaction>& interactions) {
  std::vector<std::tuple<std::string, std::string, double>> triples;
  triples.reserve(interactions.size());
  for (const auto& it : interactions) triples.emplace_back(it.user, it.item, it.value);
  size_t dupes = 0;
  Dataset d = Dataset::from_ratings(triples, &dupes);
  if (dupes > 0) log::warn(strf("%zu duplicate (user, item) rows collapsed, last value kept", dupes));
  return d;
}

Dataset frequency_to_ratings(const std::vector<Interaction>& interactions) {
  // total play count per (user, item)
  std::vector<std::tuple<std::string, std::string, double>> counts;
  counts.reserve(interactions.size());
  for (const auto& it : interactions) counts.emplace_back(it.user, it.item, it.value);
  std::sort(counts.begin(), counts.end(),
            [](const auto& a, const auto& b) {
              if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
              return std::get<1>(a) < std::get<1>(b);
            });

  std::vector<std::tuple<std::string, std::string, double>> triples;
  size_t k = 0;
  while (k < counts.size()) {
    const std::string& user = std::get<0>(counts[k]);
    // accumulate this user's distinct items
    std::vector<std::pair<std::string, double>> item_counts;
    while (k < counts.size() && std::get<0>(counts[k]) == user) {
      if (!item_counts.empty() && item_counts.back().first == std::get<1>(counts[k])) {
        item_counts.back().second += std::get<2>(counts[k]);
      } else {
        item_counts.emplace_back(std::get<1>(counts[k]), std::get<2>(counts[k]));
      }
      ++k;
    }
    std::vector<double> values;
    values.reserve(item_counts.size());
    for (const auto& [item, c] : item_counts) values.push_back(c);
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    for (const auto& [item, c] : item_counts) {
      // fraction of the user's distinct items with count <= this one; the
      // small backoff keeps exact k/n boundaries from ceiling one step up
      auto le = std::upper_bound(values.begin(), values.end(), c) - values.begin();
      double percentile = static_cast<double>(le) / n;
      int rating = static_cast<int>(std::ceil(5.0 * percentile - 1e-12));
      if (rating < 1) rating = 1;
      if (rating > 5) rating = 5;
      triples.emplace_back(user, item, static_cast<double>(rating));
    }
  }
  return Dataset::from_ratings(triples);
}

Dataset filter_min_profile(const Dataset& d, int min_profile) {
  std::vector<std::tuple<std::string, std::string, double>> kept;
  for (size_t u = 0; u < d.user_count(); ++u) {
    const auto& prof = d.profile(static_cast<int>(u));
    if (static_cast<int>(prof.size()) < min_profile) continue;
    for (const auto& [i, v] : prof) kept.emplace_back(d.user_id(static_cast<int>(u)), d.item_id(i), v);
  }
  if (kept.empty()) throw Error("filter removed all users");
  return Dataset::from_ratings(kept);
}

SplitDataset split(const Dataset& d, double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must be in (0, 1)");
  if (d.empty()) throw Error("cannot split an empty dataset");

  std::vector<std::tuple<std::string, std::string, double>> train, test;
  size_t single_profile_users = 0;
  for (size_t u = 0; u < d.user_count(); ++u) {
    const auto& prof = d.profile(static_cast<int>(u));
    const std::string& uid = d.user_id(static_cast<int>(u));
    size_t sz = prof.size();
    size_t n_train = static_cast<size_t>(std::llround(ratio * static_cast<double>(sz)));
    if (n_train < 1) n_train = 1;
    if (n_train > sz) n_train = sz;
    if (sz == 1) ++single_profile_users;

    // per-user stream keyed by (seed, user id) so the split of one user does
    // not depend on which other users are present
    Rng rng(fnv1a64(uid, seed * 0x9e3779b97f4a7c15ull + 0x243f6a8885a308d3ull));
    std::vector<size_t> order(sz);
    for (size_t k = 0; k < sz; ++k) order[k] = k;
    rng.shuffle(order);
    for (size_t k = 0; k < sz; ++k) {
      const auto& [i, v] = prof[order[k]];
      auto& dst = (k < n_train) ? train : test;
      dst.emplace_back(uid, d.item_id(i), v);
    }
  }
  if (single_profile_users > 0) {
    log::warn(strf("%zu users with a single rating kept entirely in train", single_profile_users));
  }

  SplitDataset out;
  out.train = Dataset::from_ratings(train);
  out.test = test.empty() ? Dataset() : Dataset::from_ratings(test);
  out.seed = seed;
  return out;
}

std::pair<SupplierMap, Dataset> load_supplier_map(const std::string& path, const Dataset& d,
                                                  const std::string& delim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open supplier file '" + path + "'");

  SupplierMap full;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_row(line, delim);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(strf("malformed supplier row at %s:%zu", path.c_str(), lineno));
    }
    auto it = full.of_item.find(fields[0]);
    if (it != full.of_item.end() && it->second != fields[1]) {
      throw Error(strf("conflicting suppliers for item '%s': '%s' vs '%s'", fields[0].c_str(),
                       it->second.c_str(), fields[1].c_str()));
    }
    full.of_item[fields[0]] = fields[1];
  }

  SupplierMap restricted;
  std::vector<std::tuple<std::string, std::string, double>> kept;
  size_t dropped_items = 0;
  for (size_t i = 0; i < d.item_count(); ++i) {
    const std::string& iid = d.item_id(static_cast<int>(i));
    auto it = full.of_item.find(iid);
    if (it == full.of_item.end()) {
      ++dropped_items;
      continue;
    }
    restricted.of_item[iid] = it->second;
    for (const auto& [u, v] : d.item_ratings(static_cast<int>(i))) {
      kept.emplace_back(d.user_id(u), iid, v);
    }
  }
  if (dropped_items > 0) {
    log::info(strf("dropped %zu of %zu items with no supplier record", dropped_items, d.item_count()));
  }
  if (kept.empty()) throw Error("supplier map covers no item of the dataset");
  return {std::move(restricted), Dataset::from_ratings(kept)};
}

void write_ratings_tsv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (size_t u = 0; u < d.user_count(); ++u) {
    for (const auto& [i, v] : d.profile(static_cast<int>(u))) {
      out << d.user_id(static_cast<int>(u)) << '\t' << d.item_id(i) << '\t'
          << strf("%.17g", v) << '\n';
    }
  }
}

Dataset read_ratings_tsv(const std::string& path) {
  return ratings_from_explicit(load_ratings(path, "\t"));
}

void write_supplier_tsv(const SupplierMap& map, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  std::vector<std::pair<std::string, std::string>> rows(map.of_item.begin(), map.of_item.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [item, sup] : rows) out << item << '\t' << sup << '\n';
}

SupplierMap read_supplier_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open supplier file '" + path + "'");
  SupplierMap map;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_row(line, "\t");
    if (fields.size() != 2) throw Error(strf("malformed supplier row at %s:%zu", path.c_str(), lineno));
    map.of_item[fields[0]] = fields[1];
  }
  return map;
}

}  // namespace calirec
