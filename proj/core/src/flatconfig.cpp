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
#include "calirec/flatconfig.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "calirec/common.hpp"

namespace calirec {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

// Unquotes "..." with \" \\ \n \t escapes; bare tokens pass through trimmed.
std::string parse_scalar_string(const std::string& token, const std::string& origin,
                                size_t line) {
  if (!token.empty() && token.front() == '"') {
    if (token.size() < 2 || token.back() != '"')
      throw Error(strf("%s:%zu: unterminated string", origin.c_str(), line));
    std::string out;
    for (size_t i = 1; i + 1 < token.size(); ++i) {
      char c = token[i];
      if (c == '"')
        throw Error(strf("%s:%zu: stray quote inside string", origin.c_str(), line));
      if (c == '\\') {
        if (i + 2 >= token.size())
          throw Error(strf("%s:%zu: dangling escape", origin.c_str(), line));
        char e = token[++i];
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default:
            throw Error(strf("%s:%zu: unknown escape '\\%c'", origin.c_str(), line, e));
        }
      } else {
        out.push_back(c);
      }
    }
    return out;
  }
  return token;
}

// Splits a bracket body on commas, respecting quoted elements.
std::vector<std::string> split_elements(const std::string& body, const std::string& origin,
                                        size_t line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quote = false;
  for (size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (in_quote) {
      cur.push_back(c);
      if (c == '\\' && i + 1 < body.size()) {
        cur.push_back(body[++i]);
      } else if (c == '"') {
        in_quote = false;
      }
    } else if (c == '"') {
      cur.push_back(c);
      in_quote = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (in_quote) throw Error(strf("%s:%zu: unterminated string", origin.c_str(), line));
  std::string last = trim(cur);
  if (!last.empty()) out.push_back(last);
  for (const std::string& e : out)
    if (e.empty()) throw Error(strf("%s:%zu: empty array element", origin.c_str(), line));
  return out;
}

std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quote) {
      if (c == '\\') ++i;
      else if (c == '"') in_quote = false;
    } else if (c == '"') {
      in_quote = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string format_number(double v) {
  if (v == std::floor(v) && std::fabs(v) < 1e15)
    return strf("%lld", static_cast<long long>(v));
  return strf("%.17g", v);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') { out += "\\n"; continue; }
    if (c == '\t') { out += "\\t"; continue; }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

FlatConfig FlatConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(strf("cannot open '%s'", path.c_str()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

FlatConfig FlatConfig::parse_string(const std::string& text, const std::string& origin) {
  FlatConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(strf("%s:%zu: expected 'key = value'", origin.c_str(), lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw Error(strf("%s:%zu: bad key '%s'", origin.c_str(), lineno, key.c_str()));
    if (cfg.values_.count(key))
      throw Error(strf("%s:%zu: duplicate key '%s'", origin.c_str(), lineno, key.c_str()));
    if (val.empty())
      throw Error(strf("%s:%zu: missing value for '%s'", origin.c_str(), lineno, key.c_str()));

    Value v;
    v.line = lineno;
    if (val.front() == '[') {
      if (val.back() != ']')
        throw Error(strf("%s:%zu: unterminated array", origin.c_str(), lineno));
      std::vector<std::string> elems =
          split_elements(val.substr(1, val.size() - 2), origin, lineno);
      if (elems.empty()) {
        v.kind = Kind::kEmptyList;
      } else {
        double num = 0.0;
        bool all_numbers = true;
        for (const std::string& e : elems)
          if (e.front() == '"' || !parse_number(e, &num)) {
            all_numbers = false;
            break;
          }
        if (all_numbers) {
          v.kind = Kind::kNumberList;
          for (const std::string& e : elems) {
            parse_number(e, &num);
            v.nums.push_back(num);
          }
        } else {
          v.kind = Kind::kStringList;
          for (const std::string& e : elems)
            v.strs.push_back(parse_scalar_string(e, origin, lineno));
        }
      }
    } else if (val == "true" || val == "false") {
      v.kind = Kind::kBool;
      v.b = val == "true";
    } else if (double num = 0.0; val.front() != '"' && parse_number(val, &num)) {
      v.kind = Kind::kNumber;
      v.num = num;
    } else {
      v.kind = Kind::kString;
      v.str = parse_scalar_string(val, origin, lineno);
    }
    cfg.values_.emplace(std::move(key), std::move(v));
  }
  return cfg;
}

const FlatConfig::Value* FlatConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

const FlatConfig::Value& FlatConfig::require(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw Error(strf("%s: missing required key '%s'", origin_.c_str(), key.c_str()));
  return *v;
}

bool FlatConfig::get_bool(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Kind::kBool)
    throw Error(strf("%s:%zu: '%s' is not a boolean", origin_.c_str(), v.line, key.c_str()));
  return v.b;
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  return find(key) ? get_bool(key) : fallback;
}

double FlatConfig::get_number(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Kind::kNumber)
    throw Error(strf("%s:%zu: '%s' is not a number", origin_.c_str(), v.line, key.c_str()));
  return v.num;
}

double FlatConfig::get_number(const std::string& key, double fallback) const {
  return find(key) ? get_number(key) : fallback;
}

int64_t FlatConfig::get_int(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Kind::kNumber || v.num != std::floor(v.num) || std::fabs(v.num) > 9e15)
    throw Error(strf("%s:%zu: '%s' is not an integer", origin_.c_str(), v.line, key.c_str()));
  return static_cast<int64_t>(v.num);
}

int64_t FlatConfig::get_int(const std::string& key, int64_t fallback) const {
  return find(key) ? get_int(key) : fallback;
}

std::string FlatConfig::get_string(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind != Kind::kString)
    throw Error(strf("%s:%zu: '%s' is not a string", origin_.c_str(), v.line, key.c_str()));
  return v.str;
}

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key) ? get_string(key) : fallback;
}

std::vector<double> FlatConfig::get_numbers(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind == Kind::kEmptyList) return {};
  if (v.kind == Kind::kNumber) return {v.num};
  if (v.kind != Kind::kNumberList)
    throw Error(strf("%s:%zu: '%s' is not a numeric array", origin_.c_str(), v.line,
                     key.c_str()));
  return v.nums;
}

std::vector<double> FlatConfig::get_numbers(const std::string& key,
                                            const std::vector<double>& fallback) const {
  return find(key) ? get_numbers(key) : fallback;
}

std::vector<std::string> FlatConfig::get_strings(const std::string& key) const {
  const Value& v = require(key);
  if (v.kind == Kind::kEmptyList) return {};
  if (v.kind == Kind::kString) return {v.str};
  if (v.kind != Kind::kStringList)
    throw Error(strf("%s:%zu: '%s' is not a string array", origin_.c_str(), v.line,
                     key.c_str()));
  return v.strs;
}

std::vector<std::string> FlatConfig::get_strings(
    const std::string& key, const std::vector<std::string>& fallback) const {
  return find(key) ? get_strings(key) : fallback;
}

void FlatConfig::check_known(const std::vector<std::string>& allowed) const {
  std::unordered_set<std::string> ok(allowed.begin(), allowed.end());
  std::vector<std::pair<size_t, std::string>> bad;
  for (const auto& [key, value] : values_)
    if (!ok.count(key)) bad.emplace_back(value.line, key);
  if (bad.empty()) return;
  std::sort(bad.begin(), bad.end());
  throw Error(strf("%s:%zu: unknown key '%s'", origin_.c_str(), bad[0].first,
                   bad[0].second.c_str()));
}

std::string FlatConfig::canonical() const {
  std::vector<std::string> keys;
  keys.reserve(values_.size());
  for (const auto& kv : values_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const std::string& key : keys) {
    const Value& v = values_.at(key);
    out += key;
    out += " = ";
    switch (v.kind) {
      case Kind::kBool:
        out += v.b ? "true" : "false";
        break;
      case Kind::kNumber:
        out += format_number(v.num);
        break;
      case Kind::kString:
        out += quote(v.str);
        break;
      case Kind::kEmptyList:
        out += "[]";
        break;
      case Kind::kNumberList: {
        out += "[";
        for (size_t i = 0; i < v.nums.size(); ++i) {
          if (i) out += ", ";
          out += format_number(v.nums[i]);
        }
        out += "]";
        break;
      }
      case Kind::kStringList: {
        out += "[";
        for (size_t i = 0; i < v.strs.size(); ++i) {
          if (i) out += ", ";
          out += quote(v.strs[i]);
        }
        out += "]";
        break;
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace calirec
