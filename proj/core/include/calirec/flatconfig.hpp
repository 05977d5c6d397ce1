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
#include <string>
#include <unordered_map>
#include <vector>

namespace calirec {

// Flat `key = value` configuration file. Supported values: booleans
// (true/false), numbers, strings (quoted or bare), and homogeneous arrays
// in brackets. `#` starts a comment. Keys may not repeat.
class FlatConfig {
public:
  static FlatConfig parse_file(const std::string& path);
  static FlatConfig parse_string(const std::string& text,
                                 const std::string& origin = "<config>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  double get_number(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_numbers(const std::string& key) const;
  std::vector<double> get_numbers(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  // Rejects keys outside the allowed set, catching config typos early.
  void check_known(const std::vector<std::string>& allowed) const;

  // Canonical "key = value" dump with keys sorted, for hashing and run logs.
  std::string canonical() const;

private:
  enum class Kind { kBool, kNumber, kString, kNumberList, kStringList, kEmptyList };
  struct Value {
    Kind kind;
    bool b = false;
    double num = 0.0;
    std::string str;
    std::vector<double> nums;
    std::vector<std::string> strs;
    size_t line = 0;
  };

  const Value& require(const std::string& key) const;
  const Value* find(const std::string& key) const;

  std::string origin_;
  std::unordered_map<std::string, Value> values_;
};

}  // namespace calirec
