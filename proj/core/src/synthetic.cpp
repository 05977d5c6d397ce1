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
#include "calirec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "calirec/common.hpp"

namespace calirec {

namespace {

int digits(int n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

std::string padded_id(char prefix, int index, int width) {
  return strf("%c%0*d", prefix, width, index + 1);
}

// Supplier of the item at popularity rank `rank`: contiguous blocks, with a
// 10% chance of a uniform reassignment.
int supplier_of_rank(int rank, int item_count, int supplier_count, Rng& rng) {
  int block = static_cast<int>(static_cast<int64_t>(rank) * supplier_count / item_count);
  if (rng.next_double() < 0.1) return static_cast<int>(rng.next_below(supplier_count));
  return std::min(block, supplier_count - 1);
}

}  // namespace

SyntheticData generate_synthetic(int users, int items, int suppliers,
                                 double exponent, uint64_t seed) {
  if (users < 3 || items < 3 || suppliers < 3)
    throw Error("synthetic generation needs at least 3 users, items and suppliers");
  if (!(exponent >= 0.0))
    throw Error(strf("power-law exponent %g must be non-negative", exponent));

  Rng rng(seed);
  int iw = digits(items);

  // Cumulative popularity weights; item 0 is the most popular.
  std::vector<double> cum(items);
  double total = 0.0;
  for (int k = 0; k < items; ++k) {
    total += std::pow(static_cast<double>(k + 1), -exponent);
    cum[k] = total;
  }
  auto draw_popular = [&]() {
    double u = rng.next_double() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return std::min(static_cast<int>(it - cum.begin()), items - 1);
  };

  SupplierMap map;
  int sw = digits(suppliers);
  for (int k = 0; k < items; ++k)
    map.of_item.emplace(padded_id('i', k, iw),
                        padded_id('s', supplier_of_rank(k, items, suppliers, rng), sw));

  std::vector<Interaction> rows;
  int uw = digits(users);
  std::vector<char> rated(items, 0);
  for (int u = 0; u < users; ++u) {
    std::string uid = padded_id('u', u, uw);
    // Popularity propensity: share of picks drawn by popularity rather than
    // uniformly, sampled uniformly per user.
    double theta = rng.next_double();
    double leniency = 0.6 * (rng.next_double() - 0.5);
    int size = std::min(items, 20 + static_cast<int>(rng.next_below(5)));

    auto rate = [&](int k) {
      // Popular items skew good: a quality score decreasing in popularity
      // rank, plus per-user leniency and per-interaction noise. The gap
      // keeps neighborhood-averaged predictions higher for popular items,
      // which is what concentrates untreated recommendation lists on them.
      double quality =
          5.2 - 3.0 * std::pow((k + 0.5) / static_cast<double>(items), 0.7);
      double v = quality + leniency + 0.8 * (rng.next_double() - 0.5);
      double value = std::clamp(std::llround(v), 1LL, 5LL);
      rows.push_back({uid, padded_id('i', k, iw), value, std::nullopt});
    };

    std::fill(rated.begin(), rated.end(), 0);
    int picked = 0;
    int64_t attempts = 0;
    int64_t max_attempts = 200LL * size + 100;
    while (picked < size && attempts < max_attempts) {
      ++attempts;
      int k = rng.next_double() < theta ? draw_popular()
                                        : static_cast<int>(rng.next_below(items));
      if (rated[k]) continue;
      rated[k] = 1;
      ++picked;
      rate(k);
    }
    // Saturated draws can starve rejection sampling; top up deterministically.
    for (int k = 0; picked < size; ++k) {
      if (rated[k]) continue;
      rated[k] = 1;
      ++picked;
      rate(k);
    }
  }

  SyntheticData out;
  out.ratings = ratings_from_explicit(rows);
  out.suppliers = std::move(map);
  return out;
}

SupplierMap synthetic_suppliers(const Dataset& train, int suppliers, uint64_t seed) {
  if (suppliers < 3) throw Error("need at least 3 synthetic suppliers");
  if (train.item_count() == 0) throw Error("empty catalog");

  // Popularity rank: rating count descending, ties by item id.
  int items = static_cast<int>(train.item_count());
  std::vector<int> order(items);
  for (int i = 0; i < items; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    size_t ca = train.item_ratings(a).size(), cb = train.item_ratings(b).size();
    if (ca != cb) return ca > cb;
    return train.item_id(a) < train.item_id(b);
  });

  Rng rng(seed);
  SupplierMap map;
  int sw = digits(suppliers);
  for (int rank = 0; rank < items; ++rank)
    map.of_item.emplace(train.item_id(order[rank]),
                        padded_id('s', supplier_of_rank(rank, items, suppliers, rng), sw));
  return map;
}

}  // namespace calirec
