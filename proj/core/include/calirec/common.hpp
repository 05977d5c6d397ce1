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

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace calirec {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// printf-style std::string builder
inline std::string strf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  va_list args2;
  va_copy(args2, args);
  int len = std::vsnprintf(nullptr, 0, fmt, args);
  va_end(args);
  std::string out(len > 0 ? static_cast<size_t>(len) : 0, '\0');
  if (len > 0) std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
  va_end(args2);
  return out;
}

namespace log {
inline bool& quiet() {
  static bool q = false;
  return q;
}
inline void info(const std::string& msg) {
  if (!quiet()) std::fprintf(stderr, "[calirec] %s\n", msg.c_str());
}
inline void warn(const std::string& msg) {
  if (!quiet()) std::fprintf(stderr, "[calirec] warning: %s\n", msg.c_str());
}
}  // namespace log

// 64-bit FNV-1a, used for seed mixing and config fingerprints
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}
inline uint64_t fnv1a64(const std::string& s, uint64_t seed = 14695981039346656037ull) {
  return fnv1a64(s.data(), s.size(), seed);
}

// Deterministic RNG wrapper. mt19937_64 output is pinned by the standard;
// the sampling helpers below avoid std::*_distribution, whose sequences are
// implementation-defined.
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, k), k > 0, unbiased via rejection
  uint64_t next_below(uint64_t k) {
    if (k == 0) throw Error("Rng::next_below: k must be positive");
    uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % k;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace calirec
