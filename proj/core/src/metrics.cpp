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
#include "calirec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "calirec/common.hpp"

namespace calirec {

namespace {

void check_run(const std::vector<RankedList>& run) {
  if (run.empty()) throw Error("no recommendation lists to evaluate");
  for (const RankedList& l : run)
    if (l.items.empty())
      throw Error(strf("empty recommendation list for user '%s'", l.user.c_str()));
}

size_t total_slots(const std::vector<RankedList>& run) {
  size_t slots = 0;
  for (const RankedList& l : run) slots += l.items.size();
  return slots;
}

}  // namespace

double precision_at_n(const std::vector<RankedList>& run, const Dataset& test, int n,
                      double min_rating, size_t* evaluated, size_t* skipped) {
  check_run(run);
  if (n <= 0) throw Error("precision needs a positive list length");
  size_t eval = 0, skip = 0;
  double sum = 0.0;
  for (const RankedList& l : run) {
    int u = test.user_index(l.user);
    if (u < 0) {
      ++skip;
      continue;
    }
    std::unordered_set<std::string> relevant;
    for (const auto& [ix, value] : test.profile(u))
      if (value >= min_rating) relevant.insert(test.item_id(ix));
    size_t hits = 0;
    for (const std::string& item : l.items) hits += relevant.count(item);
    sum += static_cast<double>(hits) / n;
    ++eval;
  }
  if (skip > 0)
    log::warn(strf("%zu of %zu users have no test ratings and were skipped", skip,
                   run.size()));
  if (eval == 0) throw Error("no users with test ratings to evaluate");
  if (evaluated) *evaluated = eval;
  if (skipped) *skipped = skip;
  return sum / static_cast<double>(eval);
}

double aggregate_diversity(const std::vector<RankedList>& run, const Dataset& catalog) {
  check_run(run);
  if (catalog.item_count() == 0) throw Error("empty catalog");
  std::unordered_set<std::string> distinct;
  for (const RankedList& l : run)
    for (const std::string& item : l.items) {
      if (catalog.item_index(item) < 0)
        throw Error(strf("recommended item '%s' is not in the catalog", item.c_str()));
      distinct.insert(item);
    }
  return static_cast<double>(distinct.size()) / catalog.item_count();
}

double long_tail_coverage(const std::vector<RankedList>& run, const ItemPartition& part) {
  check_run(run);
  if (part.long_tail_size() == 0) throw Error("partition has no mid or tail items");
  std::unordered_set<std::string> distinct;
  for (const RankedList& l : run)
    for (const std::string& item : l.items)
      if (part.group(item) != kHead) distinct.insert(item);
  return static_cast<double>(distinct.size()) / part.long_tail_size();
}

double gini_index(const std::vector<RankedList>& run, const Dataset& catalog) {
  check_run(run);
  size_t n_items = catalog.item_count();
  if (n_items < 2) throw Error("gini needs at least two catalog items");
  std::vector<double> share(n_items, 0.0);
  for (const RankedList& l : run)
    for (const std::string& item : l.items) {
      int ix = catalog.item_index(item);
      if (ix < 0)
        throw Error(strf("recommended item '%s' is not in the catalog", item.c_str()));
      share[ix] += 1.0;
    }
  double slots = static_cast<double>(total_slots(run));
  for (double& s : share) s /= slots;
  std::sort(share.begin(), share.end());
  double g = 0.0;
  for (size_t k = 1; k <= n_items; ++k)
    g += (2.0 * k - n_items - 1.0) * share[k - 1];
  return g / (static_cast<double>(n_items) - 1.0);
}

double equity_of_attention(const std::vector<RankedList>& run,
                           const SupplierPartition& spart, const SupplierMap& suppliers) {
  check_run(run);
  std::array<double, 3> counts{};
  for (const RankedList& l : run)
    for (const std::string& item : l.items)
      counts[spart.group(suppliers.supplier(item))] += 1.0;
  return std::sqrt(counts[0]) + std::sqrt(counts[1]) + std::sqrt(counts[2]);
}

Deviation supplier_popularity_deviation(const std::vector<RankedList>& run,
                                        const SupplierPartition& spart,
                                        const SupplierMap& suppliers) {
  check_run(run);
  std::array<double, 3> counts{};
  for (const RankedList& l : run)
    for (const std::string& item : l.items)
      counts[spart.group(suppliers.supplier(item))] += 1.0;
  double slots = static_cast<double>(total_slots(run));
  Deviation d;
  for (int g = 0; g < 3; ++g) {
    d.per_group[g] = counts[g] / slots - spart.rating_share[g];
    d.average += std::fabs(d.per_group[g]) / 3.0;
  }
  return d;
}

Deviation item_popularity_deviation(const std::vector<RankedList>& run,
                                    const ItemPartition& part) {
  check_run(run);
  std::array<double, 3> counts{};
  for (const RankedList& l : run)
    for (const std::string& item : l.items) counts[part.group(item)] += 1.0;
  double slots = static_cast<double>(total_slots(run));
  Deviation d;
  for (int g = 0; g < 3; ++g) {
    d.per_group[g] = counts[g] / slots - part.rating_share[g];
    d.average += std::fabs(d.per_group[g]) / 3.0;
  }
  return d;
}

UpdResult user_popularity_deviation(const std::vector<RankedList>& run,
                                    const Dataset& train, const ItemPartition& part,
                                    const UserGroups& groups) {
  check_run(run);
  std::array<double, 3> sum{};
  std::array<size_t, 3> count{};
  for (const RankedList& l : run) {
    int u = train.user_index(l.user);
    if (u < 0)
      throw Error(strf("user '%s' has no train profile", l.user.c_str()));
    CategoryDistribution p = profile_distribution(u, train, part);
    CategoryDistribution q = list_distribution(l.items, part);
    int g = groups.group(l.user);
    sum[g] += js_divergence(p.p, q.p);
    count[g] += 1;
  }
  UpdResult r;
  for (int g = 0; g < 3; ++g) {
    if (count[g] == 0)
      throw Error(strf("user group %s has no users in the run", kUserGroupLabels[g]));
    r.per_group[g] = sum[g] / static_cast<double>(count[g]);
    r.average += r.per_group[g] / 3.0;
  }
  return r;
}

std::vector<ExposureRow> exposure_table(const std::vector<RankedList>& run,
                                        const Dataset& train, const ItemPartition& part) {
  check_run(run);
  std::vector<double> counts(train.item_count(), 0.0);
  for (const RankedList& l : run)
    for (const std::string& item : l.items) {
      int ix = train.item_index(item);
      if (ix < 0)
        throw Error(strf("recommended item '%s' is not in the catalog", item.c_str()));
      counts[ix] += 1.0;
    }
  std::vector<ExposureRow> rows;
  rows.reserve(train.item_count());
  for (size_t i = 0; i < train.item_count(); ++i) {
    const std::string& id = train.item_id(static_cast<int>(i));
    ExposureRow row;
    row.item = id;
    row.rating_count = static_cast<long long>(train.item_ratings(static_cast<int>(i)).size());
    row.group = kItemGroupLabels[part.group(id)];
    row.exposure = counts[i] / static_cast<double>(run.size());
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ExposureRow& a, const ExposureRow& b) {
    if (a.rating_count != b.rating_count) return a.rating_count > b.rating_count;
    return a.item < b.item;
  });
  return rows;
}

MetricsReport evaluate_run(const std::vector<RankedList>& run, const Dataset& train,
                           const Dataset& test, const ItemPartition& part,
                           const SupplierPartition& spart, const UserGroups& groups,
                           const SupplierMap& suppliers, double min_rating) {
  check_run(run);
  size_t longest = 0;
  for (const RankedList& l : run) longest = std::max(longest, l.items.size());

  MetricsReport rep;
  rep.n = static_cast<int>(longest);
  rep.precision = precision_at_n(run, test, rep.n, min_rating, &rep.users_evaluated,
                                 &rep.users_skipped);
  rep.agg_div = aggregate_diversity(run, train);
  rep.lc = long_tail_coverage(run, part);
  rep.gini = gini_index(run, train);
  rep.esf = equity_of_attention(run, spart, suppliers);
  Deviation ipd = item_popularity_deviation(run, part);
  rep.ipd = ipd.average;
  rep.ipd_group = ipd.per_group;
  Deviation spd = supplier_popularity_deviation(run, spart, suppliers);
  rep.spd = spd.average;
  rep.spd_group = spd.per_group;
  UpdResult upd = user_popularity_deviation(run, train, part, groups);
  rep.upd = upd.average;
  rep.upd_group = upd.per_group;
  rep.exposure = exposure_table(run, train, part);
  return rep;
}

}  // namespace calirec
