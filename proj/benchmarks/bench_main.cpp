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
#include <benchmark/benchmark.h>

#include "calirec/knn.hpp"
#include "calirec/partition.hpp"
#include "calirec/rerank.hpp"
#include "calirec/synthetic.hpp"

namespace {

using namespace calirec;

// Shared medium-sized fixture: 800 users, 600 items, strong popularity skew.
const SyntheticData& fixture() {
  static SyntheticData data = generate_synthetic(800, 600, 60, 1.2, 99);
  return data;
}

void BM_JsDivergence(benchmark::State& state) {
  std::vector<double> p = {0.5, 0.3, 0.2};
  std::vector<double> q = {0.1, 0.4, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(js_divergence(p, q));
}
BENCHMARK(BM_JsDivergence);

void BM_KnnFit(benchmark::State& state) {
  const Dataset& train = fixture().ratings;
  for (auto _ : state) benchmark::DoNotOptimize(fit(train, 40, 10.0));
}
BENCHMARK(BM_KnnFit)->Unit(benchmark::kMillisecond);

void BM_CpRerankUser(benchmark::State& state) {
  const Dataset& train = fixture().ratings;
  SimilarityModel model = fit(train, 40, 10.0);
  ItemPartition part = partition_items(train);
  CandidateList cands = recommend(model, train, 0, 100);
  CategoryDistribution profile = profile_distribution(0, train, part);
  RerankConfig cfg;
  cfg.lambda = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(cp_rerank(cands, profile, part, cfg));
}
BENCHMARK(BM_CpRerankUser);

void BM_DmRerank(benchmark::State& state) {
  const Dataset& train = fixture().ratings;
  SimilarityModel model = fit(train, 40, 10.0);
  std::vector<CandidateList> all = recommend_all(model, train, 50);
  RerankConfig cfg;
  cfg.n = 5;
  auto target = uniform_target(all, cfg.n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(dm_rerank(all, target, cfg));
}
BENCHMARK(BM_DmRerank)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
