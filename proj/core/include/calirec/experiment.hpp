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
#include <map>
#include <string>
#include <vector>

#include "calirec/flatconfig.hpp"
#include "calirec/metrics.hpp"
#include "calirec/rerank.hpp"

namespace calirec {

// Everything one end-to-end sweep needs. Defaults mirror the library-level
// defaults; `from_config` reads the flat key = value file documented in the
// README and rejects unknown keys.
struct ExperimentConfig {
  std::string source = "file";  // "file" or "synthetic"

  std::string ratings_path;
  std::string delimiter = "\t";
  std::string value_mode = "explicit";  // "playcount" maps play counts to 1..5
  std::string suppliers_path;
  int supplier_count = 0;  // synthesize this many suppliers when no path given
  uint64_t supplier_seed = 7;

  int synth_users = 500;
  int synth_items = 300;
  int synth_suppliers = 60;
  double synth_exponent = 1.5;
  uint64_t synth_seed = 13;

  int min_profile = 20;
  double split_ratio = 0.8;
  uint64_t split_seed = 42;
  double head_share = 0.2;
  double tail_share = 0.2;
  int knn_k = 40;
  double knn_shrinkage = 10.0;
  int m = 100;
  int n = 10;

  std::vector<std::string> algos{"cp"};
  std::vector<double> cp_lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 0.9};
  std::vector<double> xq_lambdas{0.0, 0.2, 0.4, 0.6, 0.8, 0.9};
  std::vector<double> fs_p{0.25, 0.5, 0.75, 0.95};
  std::vector<double> fs_alpha{0.05, 0.1, 0.15};
  std::vector<double> dm_scales{0.25, 0.5, 0.75, 1.0};

  double target_precision = 0.0;  // 0 = match against the base run's precision
  double precision_tol = 0.05;
  double min_rating = kNoRatingThreshold;
  int threads = 0;  // 0 = hardware concurrency

  static ExperimentConfig from_config(const FlatConfig& cfg);
  void validate() const;

  // Canonical dump of every effective field; identical configs hash alike.
  std::string canonical() const;
  uint64_t hash() const;
};

struct GridPoint {
  std::string algo;    // cp, xq, fs or dm
  std::string params;  // e.g. "lambda=0.5" or "p=0.25 alpha=0.1"
  double x = 0.0;      // swept scalar: lambda, p, or target scale
  RerankConfig rerank;
  double dm_scale = 1.0;
  bool failed = false;
  std::string error;
  MetricsReport report;
};

struct SweepResult {
  MetricsReport base;
  std::vector<GridPoint> points;
  std::map<std::string, size_t> matched;  // algo -> index of the chosen point
  std::map<std::string, bool> match_ok;   // chosen |precision - target| <= tol
  double target = 0.0;
};

// Runs ingest, partition, fit, recommend, rerank and evaluate for every grid
// point, persisting all artifacts under <out_dir>/run-<config hash>/. A
// failing grid point is recorded and skipped; the sweep continues.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

// Per algorithm, the non-failed grid point whose precision is closest to
// `target`; `ok` gets false when even the closest point misses by > tol.
std::map<std::string, size_t> precision_match(const SweepResult& sweep, double target,
                                              double tol,
                                              std::map<std::string, bool>* ok = nullptr);

// Writes table1.csv, groups.csv, exposure.csv, sweep.csv, matched.csv and
// failed.csv into `dir` (headers documented in the README).
void emit_report(const SweepResult& sweep, const std::string& dir);

}  // namespace calirec
