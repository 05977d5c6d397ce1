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

#include "calirec/dataset.hpp"

namespace calirec {

struct SyntheticData {
  Dataset ratings;
  SupplierMap suppliers;
};

// Deterministic rating fixture with a controllable popularity skew.
//
// Item popularity follows a discrete power law: item k is drawn with weight
// (k + 1)^-exponent. Every user gets a personal head propensity
// theta ~ Uniform(0,1) and draws 20..24 distinct items, each draw taken from
// the popularity law with probability theta and uniformly otherwise, so users
// span the spectrum from popularity-focused to indifferent. Rating values
// decrease in popularity rank (popular items skew good) plus per-user
// leniency and per-draw noise, clamped to 1..5, so neighborhood models score
// popular items higher the way they do on real rating dumps. Suppliers own
// contiguous popularity-rank blocks of items with 10% of items reassigned at
// random, which gives the supplier partition the same head/mid/tail texture
// as the items.
SyntheticData generate_synthetic(int users, int items, int suppliers,
                                 double exponent, uint64_t seed);

// Assigns existing catalog items to `suppliers` synthetic suppliers using the
// same popularity-block rule, for datasets that lack supplier metadata.
SupplierMap synthetic_suppliers(const Dataset& train, int suppliers, uint64_t seed);

}  // namespace calirec
