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
#include <map>
#include <set>

#include "calirec/common.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace calirec;
using testutil::TempDir;

namespace {
const testutil::QuietLogs quiet_logs;

std::vector<Interaction> rows(const std::vector<std::tuple<std::string, std::string, double>>& t) {
  std::vector<Interaction> out;
  for (const auto& [u, i, v] : t) out.push_back(Interaction{u, i, v, std::nullopt});
  return out;
}
}  // namespace

TEST_CASE("load_ratings parses delimited rows") {
  TempDir dir("load");
  SUBCASE("double-colon delimiter with timestamp") {
    testutil::write_file(dir.file("r.dat"), "1::1193::5::978300760\n");
    auto rs = load_ratings(dir.file("r.dat"), "::");
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].user == "1");
    CHECK(rs[0].item == "1193");
    CHECK(rs[0].value == 5.0);
    REQUIRE(rs[0].timestamp.has_value());
    CHECK(*rs[0].timestamp == 978300760);
  }
  SUBCASE("comma delimiter without timestamp") {
    testutil::write_file(dir.file("r.csv"), "a,b,3.5\n");
    auto rs = load_ratings(dir.file("r.csv"), ",");
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].user == "a");
    CHECK(rs[0].item == "b");
    CHECK(rs[0].value == 3.5);
    CHECK(!rs[0].timestamp.has_value());
  }
  SUBCASE("rows preserved in file order, blank lines skipped") {
    testutil::write_file(dir.file("r.tsv"), "u2\ti1\t4\n\nu1\ti2\t3\n");
    auto rs = load_ratings(dir.file("r.tsv"), "\t");
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].user == "u2");
    CHECK(rs[1].user == "u1");
  }
}

TEST_CASE("load_ratings errors name the offending line") {
  TempDir dir("load_err");
  testutil::write_file(dir.file("bad.tsv"), "u\ti\t4\nu\ti\n");
  CHECK_THROWS_WITH_AS(load_ratings(dir.file("bad.tsv"), "\t"),
                       doctest::Contains(":2"), Error);

  testutil::write_file(dir.file("badval.tsv"), "u\ti\tnope\n");
  CHECK_THROWS_AS(load_ratings(dir.file("badval.tsv"), "\t"), Error);

  testutil::write_file(dir.file("neg.tsv"), "u\ti\t-1\n");
  CHECK_THROWS_AS(load_ratings(dir.file("neg.tsv"), "\t"), Error);

  testutil::write_file(dir.file("empty.tsv"), "");
  CHECK_THROWS_WITH_AS(load_ratings(dir.file("empty.tsv"), "\t"),
                       doctest::Contains("no interactions"), Error);

  CHECK_THROWS_AS(load_ratings(dir.file("missing.tsv"), "\t"), Error);
}

TEST_CASE("Dataset interning is independent of row order") {
  auto a = testutil::make_dataset({{"u2", "i2", 4}, {"u1", "i1", 5}, {"u1", "i3", 2}});
  auto b = testutil::make_dataset({{"u1", "i3", 2}, {"u1", "i1", 5}, {"u2", "i2", 4}});
  REQUIRE(a.user_count() == 2);
  REQUIRE(a.item_count() == 3);
  CHECK(a.users() == b.users());
  CHECK(a.items() == b.items());
  CHECK(std::is_sorted(a.users().begin(), a.users().end()));
  CHECK(std::is_sorted(a.items().begin(), a.items().end()));
  for (size_t u = 0; u < a.user_count(); ++u) {
    CHECK(a.profile(static_cast<int>(u)) == b.profile(static_cast<int>(u)));
  }
}

TEST_CASE("Dataset lookups and duplicate handling") {
  size_t dupes = 0;
  auto d = Dataset::from_ratings(
      {{"u1", "i1", 3}, {"u1", "i1", 5}, {"u2", "i1", 4}, {"u2", "i2", 1}}, &dupes);
  CHECK(dupes == 1);
  CHECK(d.rating_count() == 3);
  int u1 = d.user_index("u1");
  int i1 = d.item_index("i1");
  int i2 = d.item_index("i2");
  REQUIRE(u1 >= 0);
  REQUIRE(i1 >= 0);
  REQUIRE(i2 >= 0);
  CHECK(d.rating(u1, i1) == 5.0);  // last value wins
  CHECK(d.user_rated(u1, i1));
  CHECK(!d.rating(u1, i2).has_value());
  CHECK(!d.user_rated(u1, i2));
  CHECK(d.user_index("ghost") == -1);
  CHECK(d.item_index("ghost") == -1);
  // item_ratings mirrors profiles
  REQUIRE(d.item_ratings(i1).size() == 2);
  CHECK(d.item_ratings(i1)[0].first == d.user_index("u1"));
}

TEST_CASE("frequency_to_ratings maps play counts to 1..5 by within-user quantile") {
  SUBCASE("all-tied counts rate 5") {
    auto d = frequency_to_ratings(rows({{"u", "a", 1}, {"u", "b", 1}, {"u", "c", 1}}));
    for (const auto& item : {"a", "b", "c"}) {
      CHECK(d.rating(d.user_index("u"), d.item_index(item)) == 5.0);
    }
  }
  SUBCASE("spread counts") {
    auto d = frequency_to_ratings(
        rows({{"u", "a", 10}, {"u", "b", 5}, {"u", "c", 1}, {"u", "d", 1}, {"u", "e", 1}}));
    int u = d.user_index("u");
    CHECK(d.rating(u, d.item_index("a")) == 5.0);
    CHECK(d.rating(u, d.item_index("b")) == 4.0);
    double rc = *d.rating(u, d.item_index("c"));
    CHECK(d.rating(u, d.item_index("d")) == rc);
    CHECK(d.rating(u, d.item_index("e")) == rc);
  }
  SUBCASE("single item rates 5") {
    auto d = frequency_to_ratings(rows({{"u", "a", 17}}));
    CHECK(d.rating(0, 0) == 5.0);
  }
  SUBCASE("repeated rows accumulate before ranking") {
    // a: 2+3=5 plays, b: 1 play
    auto d = frequency_to_ratings(rows({{"u", "a", 2}, {"u", "b", 1}, {"u", "a", 3}}));
    int u = d.user_index("u");
    CHECK(d.rating(u, d.item_index("a")) == 5.0);
    CHECK(*d.rating(u, d.item_index("b")) < 5.0);
  }
}

TEST_CASE("frequency_to_ratings is monotone in count within each user") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Interaction> events;
    int n_items = 2 + static_cast<int>(rng.next_below(10));
    std::map<std::string, double> count_of;
    for (int i = 0; i < n_items; ++i) {
      std::string item = strf("i%02d", i);
      double c = 1.0 + static_cast<double>(rng.next_below(50));
      count_of[item] = c;
      events.push_back(Interaction{"u", item, c, std::nullopt});
    }
    auto d = frequency_to_ratings(events);
    int u = d.user_index("u");
    double max_count = 0;
    for (const auto& [item, c] : count_of) max_count = std::max(max_count, c);
    for (const auto& [ia, ca] : count_of) {
      double ra = *d.rating(u, d.item_index(ia));
      CHECK(ra >= 1.0);
      CHECK(ra <= 5.0);
      if (ca == max_count) CHECK(ra == 5.0);
      for (const auto& [ib, cb] : count_of) {
        double rb = *d.rating(u, d.item_index(ib));
        if (ca > cb) CHECK(ra >= rb);
        if (ca == cb) CHECK(ra == rb);
      }
    }
  }
}

TEST_CASE("filter_min_profile drops small users then orphaned items") {
  auto d = testutil::make_dataset({
      {"u1", "a", 5}, {"u1", "b", 4}, {"u1", "c", 3},
      {"u2", "a", 2}, {"u2", "d", 1},
      {"u3", "e", 5},
  });
  auto f = filter_min_profile(d, 2);
  CHECK(f.user_count() == 2);
  CHECK(f.user_index("u3") == -1);
  CHECK(f.item_index("e") == -1);  // only u3 rated e
  CHECK(f.item_index("a") >= 0);
  CHECK(f.rating_count() == 5);

  auto same = filter_min_profile(f, 2);
  CHECK(same.rating_count() == f.rating_count());

  CHECK_THROWS_WITH_AS(filter_min_profile(d, 100), doctest::Contains("removed all users"), Error);
}

TEST_CASE("split is per-user stratified and seed-deterministic") {
  std::vector<std::tuple<std::string, std::string, double>> triples;
  for (int u = 0; u < 8; ++u) {
    for (int i = 0; i < 10; ++i) {
      triples.emplace_back(strf("u%d", u), strf("i%02d", (u * 3 + i) % 17), 1.0 + (i % 5));
    }
  }
  auto d = testutil::make_dataset(triples);
  auto s1 = split(d, 0.8, 7);
  auto s2 = split(d, 0.8, 7);
  auto s3 = split(d, 0.8, 8);

  CHECK(s1.train.rating_count() + s1.test.rating_count() == d.rating_count());
  for (size_t u = 0; u < d.user_count(); ++u) {
    int tu = s1.train.user_index(d.user_id(static_cast<int>(u)));
    REQUIRE(tu >= 0);
    CHECK(s1.train.profile(tu).size() == 8);  // round(0.8 * 10)
  }
  // train and test are disjoint per user
  for (size_t u = 0; u < s1.test.user_count(); ++u) {
    const std::string& uid = s1.test.user_id(static_cast<int>(u));
    int tu = s1.train.user_index(uid);
    for (const auto& [i, v] : s1.test.profile(static_cast<int>(u))) {
      const std::string& iid = s1.test.item_id(i);
      int ti = s1.train.item_index(iid);
      if (ti >= 0) CHECK(!s1.train.user_rated(tu, ti));
    }
  }
  // deterministic per seed
  CHECK(s1.train.rating_count() == s2.train.rating_count());
  for (size_t u = 0; u < s1.train.user_count(); ++u) {
    CHECK(s1.train.profile(static_cast<int>(u)) == s2.train.profile(static_cast<int>(u)));
  }
  // different seed picks a different subset for at least one of 8 users
  bool any_diff = false;
  for (size_t u = 0; u < s1.train.user_count() && !any_diff; ++u) {
    any_diff = s1.train.profile(static_cast<int>(u)) != s3.train.profile(static_cast<int>(u));
  }
  CHECK(any_diff);

  CHECK_THROWS_AS(split(d, 0.0, 1), Error);
  CHECK_THROWS_AS(split(d, 1.0, 1), Error);
  CHECK_THROWS_AS(split(Dataset(), 0.8, 1), Error);
}

TEST_CASE("split keeps single-rating users in train") {
  auto d = testutil::make_dataset({{"u1", "a", 5}});
  auto s = split(d, 0.8, 3);
  CHECK(s.train.rating_count() == 1);
  CHECK(s.test.rating_count() == 0);
}

TEST_CASE("split of one user is unaffected by other users") {
  auto solo = testutil::make_dataset({
      {"u5", "a", 1}, {"u5", "b", 2}, {"u5", "c", 3}, {"u5", "d", 4}, {"u5", "e", 5},
  });
  std::vector<std::tuple<std::string, std::string, double>> both = {
      {"u5", "a", 1}, {"u5", "b", 2}, {"u5", "c", 3}, {"u5", "d", 4}, {"u5", "e", 5},
      {"zz", "a", 1}, {"zz", "b", 2},
  };
  auto crowd = testutil::make_dataset(both);
  auto s_solo = split(solo, 0.6, 11);
  auto s_crowd = split(crowd, 0.6, 11);
  int u_solo = s_solo.train.user_index("u5");
  int u_crowd = s_crowd.train.user_index("u5");
  std::set<std::string> items_solo, items_crowd;
  for (const auto& [i, v] : s_solo.train.profile(u_solo)) items_solo.insert(s_solo.train.item_id(i));
  for (const auto& [i, v] : s_crowd.train.profile(u_crowd)) items_crowd.insert(s_crowd.train.item_id(i));
  CHECK(items_solo == items_crowd);
}

TEST_CASE("load_supplier_map restricts both directions") {
  TempDir dir("sup");
  auto d = testutil::make_dataset({
      {"u1", "a", 5}, {"u1", "b", 4}, {"u2", "c", 3}, {"u2", "d", 2}, {"u1", "e", 1},
  });
  SUBCASE("partial coverage drops unmapped items") {
    testutil::write_file(dir.file("s.tsv"), "a\ts1\nb\ts1\nc\ts2\nd\ts2\nzz\ts9\n");
    auto [map, restricted] = load_supplier_map(dir.file("s.tsv"), d);
    CHECK(map.of_item.size() == 4);  // e dropped, zz not in dataset
    CHECK(!map.contains("e"));
    CHECK(!map.contains("zz"));
    CHECK(restricted.item_count() == 4);
    CHECK(restricted.item_index("e") == -1);
    CHECK(map.supplier("a") == "s1");
    CHECK_THROWS_AS(map.supplier("e"), Error);
  }
  SUBCASE("full coverage is identity") {
    testutil::write_file(dir.file("s.tsv"), "a\ts1\nb\ts1\nc\ts2\nd\ts2\ne\ts3\n");
    auto [map, restricted] = load_supplier_map(dir.file("s.tsv"), d);
    CHECK(restricted.rating_count() == d.rating_count());
    CHECK(restricted.item_count() == d.item_count());
  }
  SUBCASE("conflicting assignment rejected") {
    testutil::write_file(dir.file("s.tsv"), "a\ts1\na\ts2\n");
    CHECK_THROWS_WITH_AS(load_supplier_map(dir.file("s.tsv"), d),
                         doctest::Contains("conflicting"), Error);
  }
  SUBCASE("no overlap rejected") {
    testutil::write_file(dir.file("s.tsv"), "zz\ts1\n");
    CHECK_THROWS_AS(load_supplier_map(dir.file("s.tsv"), d), Error);
  }
}

TEST_CASE("ratings tsv round-trips") {
  TempDir dir("roundtrip");
  auto d = testutil::make_dataset({
      {"u1", "a", 4.5}, {"u1", "b", 3}, {"u2", "a", 0.125}, {"u2", "c", 5},
  });
  write_ratings_tsv(d, dir.file("r.tsv"));
  auto back = read_ratings_tsv(dir.file("r.tsv"));
  CHECK(back.users() == d.users());
  CHECK(back.items() == d.items());
  REQUIRE(back.rating_count() == d.rating_count());
  for (size_t u = 0; u < d.user_count(); ++u) {
    CHECK(back.profile(static_cast<int>(u)) == d.profile(static_cast<int>(u)));
  }
}

TEST_CASE("supplier tsv round-trips") {
  TempDir dir("suprt");
  SupplierMap map;
  map.of_item = {{"a", "s1"}, {"b", "s2"}, {"c", "s1"}};
  write_supplier_tsv(map, dir.file("s.tsv"));
  auto back = read_supplier_tsv(dir.file("s.tsv"));
  CHECK(back.of_item == map.of_item);
}
