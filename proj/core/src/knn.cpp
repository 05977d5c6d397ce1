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
#include "calirec/knn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "calirec/common.hpp"

namespace calirec {

double SimilarityModel::similarity(int i, int j) const {
  for (const auto& [nb, s] : neighbors.at(i)) {
    if (nb == j) return s;
  }
  return 0.0;
}

SimilarityModel fit(const Dataset& train, int k, double shrinkage) {
  if (train.empty()) throw Error("fit: empty train set");
  if (k < 1) throw Error("fit: k must be positive");
  if (shrinkage < 0.0) throw Error("fit: shrinkage must be non-negative");

  const size_t n_items = train.item_count();
  SimilarityModel model;
  model.k = k;
  model.shrinkage = shrinkage;
  model.neighbors.resize(n_items);
  model.reverse.resize(n_items);
  model.item_popularity.resize(n_items);

  std::vector<double> norm(n_items, 0.0);
  for (size_t i = 0; i < n_items; ++i) {
    double s = 0.0;
    for (const auto& [u, v] : train.item_ratings(static_cast<int>(i))) s += v * v;
    norm[i] = std::sqrt(s);
    model.item_popularity[i] = static_cast<long long>(train.item_ratings(static_cast<int>(i)).size());
  }

  // one dense accumulator pass per item over its raters' profiles
  std::vector<double> dot(n_items, 0.0);
  std::vector<int> co(n_items, 0);
  std::vector<int> touched;
  touched.reserve(n_items);

  for (size_t i = 0; i < n_items; ++i) {
    const int ii = static_cast<int>(i);
    for (const auto& [u, vi] : train.item_ratings(ii)) {
      for (const auto& [j, vj] : train.profile(u)) {
        if (static_cast<size_t>(j) <= i) continue;  // each pair once, never the diagonal
        if (co[j] == 0) touched.push_back(j);
        dot[j] += vi * vj;
        co[j] += 1;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int j : touched) {
      double cos = dot[j] / (norm[i] * norm[j]);
      double sim = cos * static_cast<double>(co[j]) / (static_cast<double>(co[j]) + shrinkage);
      if (sim != 0.0) {
        model.neighbors[i].emplace_back(j, sim);
        model.neighbors[j].emplace_back(ii, sim);
      }
      dot[j] = 0.0;
      co[j] = 0;
    }
    touched.clear();
  }

  auto by_sim = [](const std::pair<int, double>& a, const std::pair<int, double>& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  for (size_t i = 0; i < n_items; ++i) {
    auto& nbs = model.neighbors[i];
    std::sort(nbs.begin(), nbs.end(), by_sim);
    if (nbs.size() > static_cast<size_t>(k)) nbs.resize(static_cast<size_t>(k));
    nbs.shrink_to_fit();
  }
  for (size_t i = 0; i < n_items; ++i) {
    for (const auto& [j, s] : model.neighbors[i]) {
      model.reverse[j].emplace_back(static_cast<int>(i), s);
    }
  }
  return model;
}

CandidateList recommend(const SimilarityModel& model, const Dataset& train, int user_index, int m) {
  if (user_index < 0 || static_cast<size_t>(user_index) >= train.user_count()) {
    throw Error("recommend: unknown user");
  }
  const auto& prof = train.profile(user_index);
  if (prof.empty()) throw Error("recommend: user has an empty profile");
  if (m < 1) throw Error("recommend: m must be positive");

  const size_t n_items = train.item_count();
  std::vector<double> num(n_items, 0.0), den(n_items, 0.0);
  std::vector<char> rated(n_items, 0);
  std::vector<int> touched;
  for (const auto& [j, r] : prof) rated[j] = 1;
  for (const auto& [j, r] : prof) {
    for (const auto& [i, s] : model.reverse.at(j)) {
      if (rated[i]) continue;
      if (den[i] == 0.0) touched.push_back(i);
      num[i] += s * r;
      den[i] += std::fabs(s);
    }
  }

  struct Scored {
    int item;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(touched.size());
  std::sort(touched.begin(), touched.end());
  for (int i : touched) {
    if (den[i] > 0.0) scored.push_back({i, num[i] / den[i]});
  }
  std::sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (model.item_popularity[a.item] != model.item_popularity[b.item]) {
      return model.item_popularity[a.item] > model.item_popularity[b.item];
    }
    return train.item_id(a.item) < train.item_id(b.item);
  });
  if (scored.size() > static_cast<size_t>(m)) scored.resize(static_cast<size_t>(m));

  CandidateList out;
  out.user = train.user_id(user_index);
  out.entries.reserve(scored.size());
  for (const auto& s : scored) out.entries.push_back({train.item_id(s.item), s.score});
  return out;
}

std::vector<CandidateList> recommend_all(const SimilarityModel& model, const Dataset& train, int m) {
  std::vector<CandidateList> lists;
  lists.reserve(train.user_count());
  size_t short_lists = 0;
  for (size_t u = 0; u < train.user_count(); ++u) {
    lists.push_back(recommend(model, train, static_cast<int>(u), m));
    if (lists.back().entries.size() < static_cast<size_t>(m)) ++short_lists;
  }
  if (short_lists > 0) {
    log::info(strf("%zu of %zu candidate lists shorter than m=%d", short_lists, lists.size(), m));
  }
  return lists;
}

void write_candidates_tsv(const std::vector<CandidateList>& lists, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& list : lists) {
    for (size_t r = 0; r < list.entries.size(); ++r) {
      out << list.user << '\t' << list.entries[r].item << '\t'
          << strf("%.17g", list.entries[r].score) << '\t' << (r + 1) << '\n';
    }
  }
}

std::vector<CandidateList> read_candidates_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open candidates file '" + path + "'");
  std::vector<CandidateList> lists;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t t1 = line.find('\t');
    size_t t2 = (t1 == std::string::npos) ? std::string::npos : line.find('\t', t1 + 1);
    size_t t3 = (t2 == std::string::npos) ? std::string::npos : line.find('\t', t2 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos || t3 == std::string::npos) {
      throw Error(strf("malformed candidates row at %s:%zu", path.c_str(), lineno));
    }
    std::string user = line.substr(0, t1);
    std::string item = line.substr(t1 + 1, t2 - t1 - 1);
    double score = 0.0;
    try {
      score = std::stod(line.substr(t2 + 1, t3 - t2 - 1));
    } catch (const std::exception&) {
      throw Error(strf("bad score at %s:%zu", path.c_str(), lineno));
    }
    if (lists.empty() || lists.back().user != user) {
      lists.push_back({user, {}});
    }
    lists.back().entries.push_back({item, score});
  }
  if (lists.empty()) throw Error("no candidates in '" + path + "'");
  return lists;
}

}  // namespace calirec
