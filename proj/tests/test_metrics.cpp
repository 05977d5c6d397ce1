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
#include <vector>

#include "calirec/common.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace calirec;

namespace {

std::vector<RankedList> single_run(const std::string& user,
                                   const std::vector<std::string>& items) {
  return {{user, items, "none"}};
}

}  // namespace

TEST_CASE("precision_at_n counts test hits per slot") {
  auto test = Dataset::from_ratings({
      {"u1", "a", 5}, {"u1", "b", 3}, {"u2", "c", 4},
  });
  std::vector<RankedList> run = {
      {"u1", {"a", "x1", "b", "x2", "x3", "x4", "x5", "x6", "x7", "x8"}, "none"},
      {"u2", {"c", "x1"}, "none"},
  };
  size_t evaluated = 0, skipped = 0;
  double p = precision_at_n(run, test, 10, kNoRatingThreshold, &evaluated, &skipped);
  CHECK(p == doctest::Approx((0.2 + 0.1) / 2).epsilon(1e-12));
  CHECK(evaluated == 2);
  CHECK(skipped == 0);
}

TEST_CASE("precision_at_n skips users without test ratings") {
  auto test = Dataset::from_ratings({{"u1", "a", 5}});
  std::vector<RankedList> run = {
      {"u1", {"a", "b"}, "none"},
      {"ghost", {"a", "b"}, "none"},
  };
  size_t evaluated = 0, skipped = 0;
  double p = precision_at_n(run, test, 2, kNoRatingThreshold, &evaluated, &skipped);
  CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(evaluated == 1);
  CHECK(skipped == 1);

  std::vector<RankedList> all_ghosts = {{"ghost", {"a"}, "none"}};
  CHECK_THROWS_AS(precision_at_n(all_ghosts, test, 1, kNoRatingThreshold, nullptr, nullptr),
                  Error);
}

TEST_CASE("precision_at_n honors the minimum rating threshold") {
  auto test = Dataset::from_ratings({{"u1", "a", 5}, {"u1", "b", 2}});
  auto run = single_run("u1", {"a", "b"});
  CHECK(precision_at_n(run, test, 2) == doctest::Approx(1.0));
  CHECK(precision_at_n(run, test, 2, 4.0) == doctest::Approx(0.5));
  CHECK(precision_at_n(run, test, 2, 5.5) == doctest::Approx(0.0));
}

TEST_CASE("aggregate_diversity is the distinct fraction of the catalog") {
  std::vector<std::tuple<std::string, std::string, double>> rows;
  for (int i = 0; i < 100; ++i) rows.emplace_back("filler", strf("i%03d", i), 3.0);
  auto catalog = Dataset::from_ratings(rows);
  std::vector<RankedList> run;
  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(strf("i%03d", i));
  for (int u = 0; u < 5; ++u) run.push_back({strf("u%d", u), ten, "none"});
  CHECK(aggregate_diversity(run, catalog) == doctest::Approx(0.1).epsilon(1e-12));

  std::vector<RankedList> full;
  for (int i = 0; i < 100; ++i) full.push_back({strf("u%03d", i), {strf("i%03d", i)}, "none"});
  CHECK(aggregate_diversity(full, catalog) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(aggregate_diversity(single_run("u", {"ghost"}), catalog), Error);
}

TEST_CASE("long_tail_coverage counts distinct mid and tail items") {
  ItemPartition part;
  part.group_of = {{"h1", kHead}, {"m1", kMid}, {"m2", kMid}, {"t1", kTail}, {"t2", kTail}};
  part.sizes = {1, 2, 2};
  CHECK(long_tail_coverage(single_run("u", {"h1", "h1"}), part) == 0.0);
  CHECK(long_tail_coverage(single_run("u", {"m1", "m2", "t1", "t2"}), part) == 1.0);
  CHECK(long_tail_coverage(single_run("u", {"m1", "h1"}), part) ==
        doctest::Approx(0.25).epsilon(1e-12));
  ItemPartition all_head;
  all_head.group_of = {{"h1", kHead}};
  all_head.sizes = {1, 0, 0};
  CHECK_THROWS_AS(long_tail_coverage(single_run("u", {"h1"}), all_head), Error);
}

TEST_CASE("gini_index spans 0 for uniform to 1 for concentrated") {
  std::vector<std::tuple<std::string, std::string, double>> rows;
  for (int i = 0; i < 6; ++i) rows.emplace_back("filler", strf("i%d", i), 3.0);
  auto catalog = Dataset::from_ratings(rows);

  std::vector<RankedList> uniform;
  for (int i = 0; i < 6; ++i) uniform.push_back({strf("u%d", i), {strf("i%d", i)}, "none"});
  CHECK(gini_index(uniform, catalog) == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<RankedList> spike;
  for (int u = 0; u < 4; ++u) spike.push_back({strf("u%d", u), {"i0"}, "none"});
  CHECK(gini_index(spike, catalog) == doctest::Approx(1.0).epsilon(1e-12));

  auto two_items = Dataset::from_ratings({{"f", "a", 1}, {"f", "b", 1}});
  auto one_item = Dataset::from_ratings({{"f", "a", 1}});
  CHECK_THROWS_AS(gini_index(single_run("u", {"a"}), one_item), Error);
  CHECK(gini_index(single_run("u", {"a"}), two_items) == doctest::Approx(1.0));
}

TEST_CASE("gini_index matches the pairwise oracle on random runs") {
  Rng rng(99);
  std::vector<std::tuple<std::string, std::string, double>> rows;
  for (int i = 0; i < 6; ++i) rows.emplace_back("filler", strf("i%d", i), 3.0);
  auto catalog = Dataset::from_ratings(rows);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<RankedList> run;
    int users = 2 + static_cast<int>(rng.next_below(5));
    for (int u = 0; u < users; ++u) {
      RankedList l{strf("u%d", u), {}, "none"};
      int len = 1 + static_cast<int>(rng.next_below(4));
      std::vector<int> ids{0, 1, 2, 3, 4, 5};
      rng.shuffle(ids);
      for (int k = 0; k < len; ++k) l.items.push_back(strf("i%d", ids[k]));
      run.push_back(std::move(l));
    }
    double got = gini_index(run, catalog);
    CHECK(std::fabs(got - oracles::naive_gini_pairwise(run, catalog)) < 1e-9);
    CHECK(std::fabs(got - oracles::naive_gini_sorted(run, catalog)) < 1e-12);
  }
}

TEST_CASE("equity_of_attention rewards spreading slots across bins") {
  SupplierMap sup;
  sup.of_item = {{"a", "s1"}, {"b", "s2"}, {"c", "s3"}};
  SupplierPartition spart;
  spart.group_of = {{"s1", kHead}, {"s2", kMid}, {"s3", kTail}};

  // bin counts (4, 1, 0) -> 2 + 1 + 0
  std::vector<RankedList> run1 = {{"u1", {"a", "a", "a", "a", "b"}, "none"}};
  CHECK(equity_of_attention(run1, spart, sup) == doctest::Approx(3.0).epsilon(1e-12));

  // (2, 2, 2) beats (6, 0, 0)
  std::vector<RankedList> spread = {{"u1", {"a", "a", "b", "b", "c", "c"}, "none"}};
  std::vector<RankedList> packed = {{"u1", {"a", "a", "a", "a", "a", "a"}, "none"}};
  double e_spread = equity_of_attention(spread, spart, sup);
  double e_packed = equity_of_attention(packed, spart, sup);
  CHECK(e_spread == doctest::Approx(3.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(e_packed == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  CHECK(e_spread > e_packed);
}

TEST_CASE("supplier_popularity_deviation is signed per group") {
  SupplierMap sup;
  sup.of_item = {{"a", "s1"}, {"b", "s2"}, {"c", "s3"}};
  SupplierPartition spart;
  spart.group_of = {{"s1", kHead}, {"s2", kMid}, {"s3", kTail}};
  spart.rating_share = {0.2, 0.6, 0.2};
  // q = (0.5, 0.45, 0.05) over 20 slots
  std::vector<std::string> items;
  for (int k = 0; k < 10; ++k) items.push_back("a");
  for (int k = 0; k < 9; ++k) items.push_back("b");
  items.push_back("c");
  auto run = single_run("u", items);
  auto d = supplier_popularity_deviation(run, spart, sup);
  CHECK(d.per_group[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(d.per_group[1] == doctest::Approx(-0.15).epsilon(1e-12));
  CHECK(d.per_group[2] == doctest::Approx(-0.15).epsilon(1e-12));
  CHECK(d.average == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("item_popularity_deviation vanishes under proportional exposure") {
  ItemPartition part;
  part.group_of = {{"h", kHead}, {"m", kMid}, {"t", kTail}};
  part.rating_share = {0.5, 0.3, 0.2};
  std::vector<std::string> items;
  for (int k = 0; k < 5; ++k) items.push_back("h");
  for (int k = 0; k < 3; ++k) items.push_back("m");
  for (int k = 0; k < 2; ++k) items.push_back("t");
  auto d = item_popularity_deviation(single_run("u", items), part);
  CHECK(d.average == doctest::Approx(0.0).epsilon(1e-12));

  auto all_head = item_popularity_deviation(single_run("u", {"h", "h"}), part);
  CHECK(all_head.per_group[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(all_head.per_group[1] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(all_head.per_group[2] == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(all_head.average == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("user_popularity_deviation averages group means of the divergence") {
  // One user per group; groups pinned by explicit assignment.
  auto train = Dataset::from_ratings({
      {"u1", "h", 5},
      {"u2", "h", 3}, {"u2", "t", 3},
      {"u3", "t", 4},
  });
  ItemPartition part;
  part.group_of = {{"h", kHead}, {"m", kMid}, {"t", kTail}};
  UserGroups groups;
  groups.group_of = {{"u1", 0}, {"u2", 1}, {"u3", 2}};
  groups.sizes = {1, 1, 1};

  SUBCASE("perfectly calibrated lists give zero") {
    std::vector<RankedList> run = {
        {"u1", {"h"}, "none"},
        {"u2", {"h", "t"}, "none"},
        {"u3", {"t"}, "none"},
    };
    auto r = user_popularity_deviation(run, train, part, groups);
    CHECK(r.average == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("maximally miscalibrated user contributes a full unit") {
    std::vector<RankedList> run = {
        {"u1", {"m"}, "none"},  // P=(1,0,0) vs Q=(0,1,0) -> JS = 1
        {"u2", {"h", "t"}, "none"},
        {"u3", {"t"}, "none"},
    };
    auto r = user_popularity_deviation(run, train, part, groups);
    CHECK(r.per_group[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.per_group[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.per_group[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.average == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("a group with no users in the run is rejected") {
    std::vector<RankedList> run = {{"u1", {"h"}, "none"}};
    CHECK_THROWS_AS(user_popularity_deviation(run, train, part, groups), Error);
  }
}

TEST_CASE("exposure_table covers the catalog sorted by popularity") {
  auto f = oracles::fixed_fixture();
  auto rows = exposure_table(f.run, f.train, f.part);
  REQUIRE(rows.size() == f.train.item_count());
  for (size_t k = 1; k < rows.size(); ++k) {
    bool ordered = rows[k - 1].rating_count > rows[k].rating_count ||
                   (rows[k - 1].rating_count == rows[k].rating_count &&
                    rows[k - 1].item < rows[k].item);
    CHECK(ordered);
  }
  for (const auto& row : rows) {
    CHECK(row.exposure >= 0.0);
    CHECK(row.exposure <= 1.0);
    long long expected = 0;
    for (const auto& l : f.run)
      expected += std::count(l.items.begin(), l.items.end(), row.item);
    CHECK(row.exposure ==
          doctest::Approx(static_cast<double>(expected) / f.run.size()).epsilon(1e-12));
  }
  // i1 is delivered once across 5 users; i5 once; i3 once
  auto find = [&](const std::string& id) {
    for (const auto& r : rows)
      if (r.item == id) return r;
    throw Error("row missing");
  };
  CHECK(find("i1").exposure == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(find("i1").group == "H");
}

TEST_CASE("evaluate_run agrees with the naive oracle on the fixed fixture") {
  auto f = oracles::fixed_fixture();
  auto rep = evaluate_run(f.run, f.train, f.test, f.part, f.spart, f.groups, f.suppliers);

  CHECK(rep.n == 2);
  CHECK(rep.users_evaluated == 5);
  CHECK(rep.users_skipped == 0);
  CHECK(std::fabs(rep.precision - oracles::naive_precision(f.run, f.test, 2,
                                                           kNoRatingThreshold)) < 1e-9);
  CHECK(std::fabs(rep.agg_div - oracles::naive_agg_div(f.run, f.train)) < 1e-9);
  CHECK(std::fabs(rep.lc - oracles::naive_lc(f.run, f.part)) < 1e-9);
  CHECK(std::fabs(rep.gini - oracles::naive_gini_sorted(f.run, f.train)) < 1e-9);
  CHECK(std::fabs(rep.gini - oracles::naive_gini_pairwise(f.run, f.train)) < 1e-9);
  CHECK(std::fabs(rep.esf - oracles::naive_esf(f.run, f.spart, f.suppliers)) < 1e-9);
  auto ipd = oracles::naive_ipd(f.run, f.part);
  auto spd = oracles::naive_spd(f.run, f.spart, f.suppliers);
  auto upd = oracles::naive_upd(f.run, f.train, f.part, f.groups);
  CHECK(std::fabs(rep.ipd - ipd.average) < 1e-9);
  CHECK(std::fabs(rep.spd - spd.average) < 1e-9);
  CHECK(std::fabs(rep.upd - upd.average) < 1e-9);
  for (int g = 0; g < 3; ++g) {
    CHECK(std::fabs(rep.ipd_group[g] - ipd.per_group[g]) < 1e-9);
    CHECK(std::fabs(rep.spd_group[g] - spd.per_group[g]) < 1e-9);
    CHECK(std::fabs(rep.upd_group[g] - upd.per_group[g]) < 1e-9);
  }

  // structural invariants stated for the report
  double abs_mean = (std::fabs(rep.ipd_group[0]) + std::fabs(rep.ipd_group[1]) +
                     std::fabs(rep.ipd_group[2])) /
                    3.0;
  CHECK(rep.ipd == doctest::Approx(abs_mean).epsilon(1e-12));
  CHECK(rep.upd ==
        doctest::Approx((rep.upd_group[0] + rep.upd_group[1] + rep.upd_group[2]) / 3.0)
            .epsilon(1e-12));
  CHECK(rep.lc <= rep.agg_div * static_cast<double>(f.train.item_count()) /
                      static_cast<double>(f.part.long_tail_size()) + 1e-12);
}

TEST_CASE("metrics are invariant to the order of lists") {
  auto f = oracles::fixed_fixture();
  auto rep1 = evaluate_run(f.run, f.train, f.test, f.part, f.spart, f.groups, f.suppliers);
  std::reverse(f.run.begin(), f.run.end());
  auto rep2 = evaluate_run(f.run, f.train, f.test, f.part, f.spart, f.groups, f.suppliers);
  CHECK(rep1.precision == rep2.precision);
  CHECK(rep1.agg_div == rep2.agg_div);
  CHECK(rep1.lc == rep2.lc);
  CHECK(rep1.gini == rep2.gini);
  CHECK(rep1.esf == rep2.esf);
  CHECK(rep1.ipd == rep2.ipd);
  CHECK(rep1.spd == rep2.spd);
  CHECK(rep1.upd == rep2.upd);
}

TEST_CASE("metric ranges hold on random fixtures") {
  Rng rng(2026);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = oracles::random_fixture(rng);
    auto rep = evaluate_run(f.run, f.train, f.test, f.part, f.spart, f.groups, f.suppliers);
    CHECK(rep.precision >= 0.0);
    CHECK(rep.precision <= 1.0);
    CHECK(rep.agg_div > 0.0);
    CHECK(rep.agg_div <= 1.0);
    CHECK(rep.lc >= 0.0);
    CHECK(rep.lc <= 1.0);
    CHECK(rep.gini >= -1e-12);
    CHECK(rep.gini <= 1.0 + 1e-12);
    CHECK(rep.esf >= 0.0);
    CHECK(rep.ipd >= 0.0);
    CHECK(rep.ipd <= 1.0);
    CHECK(rep.spd >= 0.0);
    CHECK(rep.spd <= 1.0);
    CHECK(rep.upd >= 0.0);
    CHECK(rep.upd <= 1.0 + 1e-12);
  }
}
