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
#include "calirec/partition.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "calirec/common.hpp"

namespace calirec {

namespace {

struct RankedEntity {
  std::string id;
  long long count = 0;
};

// Shared prefix/suffix boundary rule: entities come sorted by count
// descending. H(S1) is the shortest prefix whose rating share reaches
// head_share, T(S3) the longest suffix of the remainder whose share stays
// within tail_share, M(S2) everything between.
void assign_groups(const std::vector<RankedEntity>& ranked, double head_share, double tail_share,
                   std::unordered_map<std::string, int>* group_of, std::array<double, 3>* rating_share,
                   std::array<size_t, 3>* sizes) {
  long long total = 0;
  for (const auto& e : ranked) total += e.count;
  if (total <= 0) throw Error("cannot partition: no ratings");

  const double dtotal = static_cast<double>(total);
  size_t head_end = ranked.size();  // first index after H
  long long cum = 0;
  for (size_t k = 0; k < ranked.size(); ++k) {
    cum += ranked[k].count;
    if (static_cast<double>(cum) / dtotal >= head_share) {
      head_end = k + 1;
      break;
    }
  }

  size_t tail_begin = ranked.size();  // first index of T
  cum = 0;
  for (size_t k = ranked.size(); k > head_end; --k) {
    cum += ranked[k - 1].count;
    if (static_cast<double>(cum) / dtotal <= tail_share) {
      tail_begin = k - 1;
    } else {
      break;
    }
  }

  std::array<long long, 3> group_counts{};
  for (size_t k = 0; k < ranked.size(); ++k) {
    int g = (k < head_end) ? 0 : (k < tail_begin ? 1 : 2);
    (*group_of)[ranked[k].id] = g;
    group_counts[g] += ranked[k].count;
    (*sizes)[g] += 1;
  }
  for (int g = 0; g < 3; ++g) (*rating_share)[g] = static_cast<double>(group_counts[g]) / dtotal;
}

void check_shares(double head_share, double tail_share) {
  if (!(head_share > 0.0) || !(tail_share > 0.0) || head_share + tail_share >= 1.0) {
    throw Error("group shares must be positive and sum below 1");
  }
}

int lookup(const std::unordered_map<std::string, int>& m, const std::string& key, const char* what) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(strf("%s '%s' not in partition", what, key.c_str()));
  return it->second;
}

void write_assignment(const std::unordered_map<std::string, int>& group_of,
                      const std::array<const char*, 3>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  std::vector<std::pair<std::string, int>> rows(group_of.begin(), group_of.end());
  std::sort(rows.begin(), rows.end());
  for (const auto& [id, g] : rows) out << id << '\t' << labels[g] << '\n';
}

std::unordered_map<std::string, int> read_assignment(const std::array<const char*, 3>& labels,
                                                     const std::string& path,
                                                     std::array<size_t, 3>* sizes) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open assignment file '" + path + "'");
  std::unordered_map<std::string, int> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) throw Error(strf("malformed assignment row at %s:%zu", path.c_str(), lineno));
    std::string id = line.substr(0, tab);
    std::string label = line.substr(tab + 1);
    int g = -1;
    for (int k = 0; k < 3; ++k) {
      if (label == labels[k]) g = k;
    }
    if (g < 0) throw Error(strf("unknown group label '%s' at %s:%zu", label.c_str(), path.c_str(), lineno));
    out[id] = g;
    (*sizes)[g] += 1;
  }
  if (out.empty()) throw Error("empty assignment file '" + path + "'");
  return out;
}

}  // namespace

double CategoryDistribution::sum() const {
  return std::accumulate(p.begin(), p.end(), 0.0);
}

int ItemPartition::group(const std::string& item) const { return lookup(group_of, item, "item"); }
int SupplierPartition::group(const std::string& supplier) const {
  return lookup(group_of, supplier, "supplier");
}
int UserGroups::group(const std::string& user) const { return lookup(group_of, user, "user"); }

ItemPartition partition_items(const Dataset& train, double head_share, double tail_share) {
  check_shares(head_share, tail_share);
  if (train.empty()) throw Error("cannot partition an empty dataset");

  std::vector<RankedEntity> ranked(train.item_count());
  for (size_t i = 0; i < train.item_count(); ++i) {
    ranked[i].id = train.item_id(static_cast<int>(i));
    ranked[i].count = static_cast<long long>(train.item_ratings(static_cast<int>(i)).size());
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedEntity& a, const RankedEntity& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.id < b.id;
  });

  ItemPartition part;
  assign_groups(ranked, head_share, tail_share, &part.group_of, &part.rating_share, &part.sizes);
  return part;
}

SupplierPartition partition_suppliers(const Dataset& train, const SupplierMap& map, double head_share,
                                      double tail_share) {
  check_shares(head_share, tail_share);
  if (train.empty()) throw Error("cannot partition an empty dataset");

  std::unordered_map<std::string, long long> counts;
  for (size_t i = 0; i < train.item_count(); ++i) {
    const std::string& sup = map.supplier(train.item_id(static_cast<int>(i)));
    counts[sup] += static_cast<long long>(train.item_ratings(static_cast<int>(i)).size());
  }
  std::vector<RankedEntity> ranked;
  ranked.reserve(counts.size());
  for (const auto& [id, c] : counts) ranked.push_back({id, c});
  std::sort(ranked.begin(), ranked.end(), [](const RankedEntity& a, const RankedEntity& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.id < b.id;
  });

  SupplierPartition part;
  assign_groups(ranked, head_share, tail_share, &part.group_of, &part.rating_share, &part.sizes);
  return part;
}

CategoryDistribution profile_distribution(int user_index, const Dataset& train, const ItemPartition& part) {
  if (user_index < 0 || static_cast<size_t>(user_index) >= train.user_count()) {
    throw Error("profile_distribution: unknown user");
  }
  const auto& prof = train.profile(user_index);
  if (prof.empty()) throw Error("profile_distribution: empty profile");

  CategoryDistribution dist;
  dist.p.assign(3, 0.0);
  double total = 0.0;
  for (const auto& [i, r] : prof) {
    dist.p[part.group(train.item_id(i))] += r;
    total += r;
  }
  if (total <= 0.0) throw Error("profile_distribution: profile has zero rating mass");
  for (double& v : dist.p) v /= total;
  return dist;
}

CategoryDistribution list_distribution(const std::vector<std::string>& items, const ItemPartition& part) {
  if (items.empty()) throw Error("list_distribution: empty list");
  CategoryDistribution dist;
  dist.p.assign(3, 0.0);
  for (const auto& item : items) dist.p[part.group(item)] += 1.0;
  for (double& v : dist.p) v /= static_cast<double>(items.size());
  return dist;
}

UserGroups partition_users(const Dataset& train, const ItemPartition& part) {
  const size_t n = train.user_count();
  if (n < 3) throw Error("partition_users: need at least 3 users");

  struct UserKey {
    int index;
    std::array<double, 3> p;
  };
  std::vector<UserKey> keys(n);
  for (size_t u = 0; u < n; ++u) {
    auto dist = profile_distribution(static_cast<int>(u), train, part);
    keys[u] = {static_cast<int>(u), {dist.p[0], dist.p[1], dist.p[2]}};
  }
  std::sort(keys.begin(), keys.end(), [&](const UserKey& a, const UserKey& b) {
    for (int g = 0; g < 3; ++g) {
      if (a.p[g] != b.p[g]) return a.p[g] > b.p[g];
    }
    return train.user_id(a.index) < train.user_id(b.index);
  });

  UserGroups groups;
  size_t base = n / 3, rem = n % 3;
  groups.sizes = {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
  size_t k = 0;
  for (int g = 0; g < 3; ++g) {
    for (size_t c = 0; c < groups.sizes[g]; ++c, ++k) {
      groups.group_of[train.user_id(keys[k].index)] = g;
    }
  }
  return groups;
}

void write_item_partition_tsv(const ItemPartition& part, const std::string& path) {
  write_assignment(part.group_of, kItemGroupLabels, path);
}

ItemPartition read_item_partition_tsv(const std::string& path) {
  ItemPartition part;
  part.group_of = read_assignment(kItemGroupLabels, path, &part.sizes);
  return part;
}

void write_supplier_partition_tsv(const SupplierPartition& part, const std::string& path) {
  write_assignment(part.group_of, kSupplierGroupLabels, path);
}

SupplierPartition read_supplier_partition_tsv(const std::string& path) {
  SupplierPartition part;
  part.group_of = read_assignment(kSupplierGroupLabels, path, &part.sizes);
  return part;
}

void write_user_groups_tsv(const UserGroups& groups, const std::string& path) {
  write_assignment(groups.group_of, kUserGroupLabels, path);
}

UserGroups read_user_groups_tsv(const std::string& path) {
  UserGroups groups;
  groups.group_of = read_assignment(kUserGroupLabels, path, &groups.sizes);
  return groups;
}

}  // namespace calirec
