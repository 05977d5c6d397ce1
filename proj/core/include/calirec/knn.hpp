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

#include <string>
#include <vector>

#include "calirec/dataset.hpp"

namespace calirec {

// Item-item cosine similarity model with shrinkage damping and per-item
// top-k neighborhood truncation. Item indices refer to the train Dataset
// the model was fit on.
struct SimilarityModel {
  int k = 40;
  double shrinkage = 10.0;
  // per item: (neighbor item index, similarity), similarity descending
  std::vector<std::vector<std::pair<int, double>>> neighbors;
  // reverse adjacency: rev[j] lists items i with j in neighbors[i]
  std::vector<std::vector<std::pair<int, double>>> reverse;
  std::vector<long long> item_popularity;  // train rating counts, for tie-breaks

  double similarity(int i, int j) const;  // 0 when j not retained for i
};

struct ScoredItem {
  std::string item;
  double score = 0.0;
};

// Scored top-m candidates for one user, score descending with the
// deterministic tie-break (score, item popularity, item id).
struct CandidateList {
  std::string user;
  std::vector<ScoredItem> entries;
};

// sim(i,j) = cos(i,j) * n_ij / (n_ij + shrinkage) over co-rating user
// vectors; per item the top-k neighbors by similarity are retained.
SimilarityModel fit(const Dataset& train, int k = 40, double shrinkage = 10.0);

// Weighted-average prediction over the user's rated items among i's
// retained neighbors:
//   score(u,i) = sum_j sim(i,j) r(u,j) / sum_j |sim(i,j)|.
// Items from the user's train profile are never candidates.
CandidateList recommend(const SimilarityModel& model, const Dataset& train, int user_index, int m = 100);

std::vector<CandidateList> recommend_all(const SimilarityModel& model, const Dataset& train, int m = 100);

// candidates.tsv: user, item, score, rank
void write_candidates_tsv(const std::vector<CandidateList>& lists, const std::string& path);
std::vector<CandidateList> read_candidates_tsv(const std::string& path);

}  // namespace calirec
