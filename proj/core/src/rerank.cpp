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
#include "calirec/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "calirec/common.hpp"
#include "calirec/min_cost_flow.hpp"

namespace calirec {

namespace {

void check_list_args(const CandidateList& cands, int n) {
  if (cands.entries.empty())
    throw Error(strf("empty candidate list for user '%s'", cands.user.c_str()));
  if (n <= 0) throw Error("list length n must be positive");
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(strf("lambda %g outside [0, 1]", lambda));
}

// Delivered length: n, or the whole candidate list when it is shorter.
int effective_length(const CandidateList& cands, int n) {
  int avail = static_cast<int>(cands.entries.size());
  if (avail < n) {
    log::warn(strf("user '%s' has only %d candidates for a length-%d list",
                   cands.user.c_str(), avail, n));
    return avail;
  }
  return n;
}

void check_profile(const CategoryDistribution& profile) {
  if (profile.p.size() != kItemGroupLabels.size())
    throw Error(strf("profile distribution has %zu categories, expected %zu",
                     profile.p.size(), kItemGroupLabels.size()));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw Error(strf("distribution size mismatch: %zu vs %zu", p.size(), q.size()));
  double accum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    double m = 0.5 * (p[i] + q[i]);
    double from_p = p[i] > 0.0 ? 0.5 * p[i] * std::log2(p[i] / m) : 0.0;
    double from_q = q[i] > 0.0 ? 0.5 * q[i] * std::log2(q[i] / m) : 0.0;
    // Adding the two halves before accumulating keeps the evaluation order
    // identical under argument swap, so symmetry holds exactly.
    accum += from_p + from_q;
  }
  // Guard against cancellation pushing a near-zero result below zero.
  return std::max(0.0, accum);
}

std::vector<double> minmax_normalize(const CandidateList& cands) {
  if (cands.entries.empty())
    throw Error(strf("empty candidate list for user '%s'", cands.user.c_str()));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const ScoredItem& e : cands.entries) {
    lo = std::min(lo, e.score);
    hi = std::max(hi, e.score);
  }
  std::vector<double> out(cands.entries.size());
  if (hi == lo) {
    std::fill(out.begin(), out.end(), 1.0);
  } else {
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = (cands.entries[i].score - lo) / (hi - lo);
  }
  return out;
}

RankedList top_n(const CandidateList& cands, int n) {
  check_list_args(cands, n);
  int len = effective_length(cands, n);
  RankedList out{cands.user, {}, "none"};
  out.items.reserve(len);
  for (int i = 0; i < len; ++i) out.items.push_back(cands.entries[i].item);
  return out;
}

RankedList cp_rerank(const CandidateList& cands, const CategoryDistribution& profile,
                     const ItemPartition& part, const RerankConfig& cfg) {
  check_list_args(cands, cfg.n);
  check_lambda(cfg.lambda);
  check_profile(profile);
  int len = effective_length(cands, cfg.n);
  std::vector<double> rel = minmax_normalize(cands);

  size_t m = cands.entries.size();
  std::vector<int> grp(m);
  for (size_t i = 0; i < m; ++i) grp[i] = part.group(cands.entries[i].item);

  RankedList out{cands.user, {}, strf("cp lambda=%g", cfg.lambda)};
  out.items.reserve(len);
  std::vector<char> used(m, 0);
  std::vector<double> counts(kItemGroupLabels.size(), 0.0);
  std::vector<double> q(kItemGroupLabels.size(), 0.0);
  double rel_sum = 0.0;

  for (int step = 0; step < len; ++step) {
    int best = -1;
    double best_obj = 0.0, best_rel = 0.0;
    for (size_t c = 0; c < m; ++c) {
      if (used[c]) continue;
      for (size_t g = 0; g < q.size(); ++g)
        q[g] = (counts[g] + (grp[c] == static_cast<int>(g) ? 1.0 : 0.0)) / (step + 1);
      double obj = (1.0 - cfg.lambda) * (rel_sum + rel[c]) -
                   cfg.lambda * js_divergence(profile.p, q);
      // Full ties keep the earliest candidate, so lambda = 0 reproduces the
      // candidate order bit for bit.
      bool better = best < 0 || obj > best_obj || (obj == best_obj && rel[c] > best_rel);
      if (better) {
        best = static_cast<int>(c);
        best_obj = obj;
        best_rel = rel[c];
      }
    }
    used[best] = 1;
    counts[grp[best]] += 1.0;
    rel_sum += rel[best];
    out.items.push_back(cands.entries[best].item);
  }
  return out;
}

RankedList xq_rerank(const CandidateList& cands, const CategoryDistribution& profile,
                     const ItemPartition& part, const RerankConfig& cfg) {
  check_list_args(cands, cfg.n);
  check_lambda(cfg.lambda);
  check_profile(profile);
  int len = effective_length(cands, cfg.n);
  std::vector<double> rel = minmax_normalize(cands);

  // Two aspects: head, and the long tail folding mid + tail together.
  double mass[2] = {profile.p[kHead], profile.p[kMid] + profile.p[kTail]};
  size_t m = cands.entries.size();
  std::vector<int> aspect(m);
  for (size_t i = 0; i < m; ++i)
    aspect[i] = part.group(cands.entries[i].item) == kHead ? 0 : 1;

  RankedList out{cands.user, {}, strf("xq lambda=%g", cfg.lambda)};
  out.items.reserve(len);
  std::vector<char> used(m, 0);
  bool covered[2] = {false, false};

  for (int step = 0; step < len; ++step) {
    int best = -1;
    double best_obj = 0.0, best_rel = 0.0;
    for (size_t c = 0; c < m; ++c) {
      if (used[c]) continue;
      double gain = covered[aspect[c]] ? 0.0 : mass[aspect[c]];
      double obj = (1.0 - cfg.lambda) * rel[c] + cfg.lambda * gain;
      // Full ties keep the earliest candidate, so lambda = 0 reproduces the
      // candidate order bit for bit.
      bool better = best < 0 || obj > best_obj || (obj == best_obj && rel[c] > best_rel);
      if (better) {
        best = static_cast<int>(c);
        best_obj = obj;
        best_rel = rel[c];
      }
    }
    used[best] = 1;
    covered[aspect[best]] = true;
    out.items.push_back(cands.entries[best].item);
  }
  return out;
}

std::vector<int> fs_min_protected_table(int n, double protected_share, double alpha) {
  if (n <= 0) throw Error("table length must be positive");
  if (!(protected_share > 0.0 && protected_share < 1.0))
    throw Error(strf("protected share %g outside (0, 1)", protected_share));
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(strf("alpha %g outside (0, 1)", alpha));

  std::vector<int> tab(n);
  double p = protected_share;
  double q = 1.0 - p;
  for (int j = 1; j <= n; ++j) {
    // Walk the binomial CDF upward until it exceeds alpha.
    double pmf = std::pow(q, j);
    double cdf = pmf;
    int t = 0;
    while (cdf <= alpha && t < j) {
      pmf *= (static_cast<double>(j - t) / (t + 1)) * (p / q);
      ++t;
      cdf += pmf;
    }
    tab[j - 1] = t;
  }
  return tab;
}

RankedList fs_rerank(const CandidateList& cands, const ItemPartition& part,
                     const RerankConfig& cfg) {
  check_list_args(cands, cfg.n);
  int len = effective_length(cands, cfg.n);
  std::vector<int> tab = fs_min_protected_table(len, cfg.fs_protected_share, cfg.fs_alpha);

  // Queue indices keep candidate rank order, so merging compares by rank.
  std::vector<int> prot, unprot;
  for (size_t i = 0; i < cands.entries.size(); ++i) {
    if (part.group(cands.entries[i].item) == kHead)
      unprot.push_back(static_cast<int>(i));
    else
      prot.push_back(static_cast<int>(i));
  }

  RankedList out{cands.user, {},
                 strf("fs p=%g alpha=%g", cfg.fs_protected_share, cfg.fs_alpha)};
  out.items.reserve(len);
  size_t pi = 0, ui = 0;
  int prot_count = 0;
  bool warned = false;
  for (int pos = 1; pos <= len; ++pos) {
    bool need = prot_count < tab[pos - 1];
    int pick;
    bool is_prot;
    if (need && pi < prot.size()) {
      pick = prot[pi++];
      is_prot = true;
    } else {
      if (need && !warned) {
        log::warn(strf("user '%s': protected candidates exhausted before position %d",
                       cands.user.c_str(), pos));
        warned = true;
      }
      bool take_prot;
      if (pi >= prot.size())
        take_prot = false;
      else if (ui >= unprot.size())
        take_prot = true;
      else
        take_prot = prot[pi] < unprot[ui];
      if (take_prot) {
        pick = prot[pi++];
        is_prot = true;
      } else {
        pick = unprot[ui++];
        is_prot = false;
      }
    }
    if (is_prot) ++prot_count;
    out.items.push_back(cands.entries[pick].item);
  }
  return out;
}

std::unordered_map<std::string, int64_t> uniform_target(
    const std::vector<CandidateList>& all, int n, double scale) {
  if (all.empty()) throw Error("no candidate lists");
  if (n <= 0) throw Error("list length n must be positive");
  if (scale < 0.0) throw Error(strf("target scale %g must be non-negative", scale));
  std::unordered_map<std::string, int64_t> target;
  for (const CandidateList& c : all)
    for (const ScoredItem& e : c.entries) target.emplace(e.item, 0);
  if (target.empty()) throw Error("candidate lists contain no items");
  auto per = static_cast<int64_t>(
      std::floor(scale * static_cast<double>(n) * all.size() / target.size()));
  for (auto& kv : target) kv.second = per;
  return target;
}

DmResult dm_rerank(const std::vector<CandidateList>& all,
                   const std::unordered_map<std::string, int64_t>& target,
                   const RerankConfig& cfg) {
  if (all.empty()) throw Error("no candidate lists");
  if (cfg.n <= 0) throw Error("list length n must be positive");

  int n_users = static_cast<int>(all.size());
  std::unordered_set<std::string> seen_users;
  std::vector<std::string> items;
  for (const CandidateList& c : all) {
    if (!seen_users.insert(c.user).second)
      throw Error(strf("duplicate candidate list for user '%s'", c.user.c_str()));
    if (static_cast<int>(c.entries.size()) < cfg.n)
      throw Error(strf("user '%s' has %zu candidates; exposure assignment needs %d",
                       c.user.c_str(), c.entries.size(), cfg.n));
    std::unordered_set<std::string> seen_items;
    for (const ScoredItem& e : c.entries) {
      if (!seen_items.insert(e.item).second)
        throw Error(strf("user '%s' lists item '%s' twice", c.user.c_str(),
                         e.item.c_str()));
      items.push_back(e.item);
    }
  }
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  std::unordered_map<std::string, int> item_ix;
  item_ix.reserve(items.size());
  for (size_t i = 0; i < items.size(); ++i) item_ix.emplace(items[i], static_cast<int>(i));

  int64_t slots = static_cast<int64_t>(cfg.n) * n_users;
  int64_t total_target = 0;
  for (const auto& kv : target) {
    if (kv.second < 0)
      throw Error(strf("negative exposure target for item '%s'", kv.first.c_str()));
    total_target += kv.second;
  }
  if (total_target > slots)
    throw Error(strf("exposure targets total %lld but only %lld slots are deliverable",
                     static_cast<long long>(total_target), static_cast<long long>(slots)));

  // Node layout: source, users, items, sink.
  const int src = 0;
  const int first_user = 1;
  const int first_item = 1 + n_users;
  const int sink = first_item + static_cast<int>(items.size());
  MinCostFlow mcf(sink + 1);

  const int64_t kScale = 1000000;
  const int64_t big = kScale * slots + 1;

  for (int u = 0; u < n_users; ++u) mcf.add_edge(src, first_user + u, cfg.n, 0);

  // Relevance cost in [0, kScale]; the big-cost sink edge dominates any
  // relevance difference, so minimum cost first maximizes target coverage.
  std::vector<std::vector<std::pair<int, int>>> pick_edges(n_users);
  for (int u = 0; u < n_users; ++u) {
    std::vector<double> rel = minmax_normalize(all[u]);
    pick_edges[u].reserve(all[u].entries.size());
    for (size_t c = 0; c < all[u].entries.size(); ++c) {
      int node = first_item + item_ix.at(all[u].entries[c].item);
      auto cost = static_cast<int64_t>(std::llround((1.0 - rel[c]) * kScale));
      int id = mcf.add_edge(first_user + u, node, 1, cost);
      pick_edges[u].emplace_back(id, static_cast<int>(c));
    }
  }
  for (size_t i = 0; i < items.size(); ++i) {
    auto it = target.find(items[i]);
    int64_t want = it == target.end() ? 0 : it->second;
    int node = first_item + static_cast<int>(i);
    if (want > 0) mcf.add_edge(node, sink, want, 0);
    mcf.add_edge(node, sink, slots, big);
  }

  auto [flow, cost] = mcf.solve(src, sink, slots);
  if (flow != slots)
    throw Error(strf("assignment delivered %lld of %lld slots",
                     static_cast<long long>(flow), static_cast<long long>(slots)));

  DmResult result;
  result.flow_cost = cost;
  result.lists.reserve(n_users);
  std::unordered_map<std::string, int64_t> delivered;
  for (int u = 0; u < n_users; ++u) {
    RankedList list{all[u].user, {}, "dm"};
    list.items.reserve(cfg.n);
    for (const auto& [edge, c] : pick_edges[u]) {
      if (mcf.flow_on(edge) > 0) {
        list.items.push_back(all[u].entries[c].item);
        ++delivered[all[u].entries[c].item];
      }
    }
    if (static_cast<int>(list.items.size()) != cfg.n)
      throw Error(strf("user '%s' received %zu of %d slots", all[u].user.c_str(),
                       list.items.size(), cfg.n));
    result.lists.push_back(std::move(list));
  }
  for (const auto& kv : target) {
    auto it = delivered.find(kv.first);
    int64_t got = it == delivered.end() ? 0 : it->second;
    if (got < kv.second) result.discrepancy += kv.second - got;
  }
  return result;
}

void write_lists_tsv(const std::string& path, const std::vector<RankedList>& lists) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(strf("cannot open '%s' for writing", path.c_str()));
  for (const RankedList& l : lists) {
    for (size_t r = 0; r < l.items.size(); ++r)
      out << l.user << '\t' << l.items[r] << '\t' << (r + 1) << '\t' << l.provenance
          << '\n';
  }
  out.flush();
  if (!out) throw Error(strf("failed writing '%s'", path.c_str()));
}

std::vector<RankedList> read_lists_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(strf("cannot open '%s'", path.c_str()));
  std::vector<RankedList> out;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (f.size() != 4)
      throw Error(strf("%s:%zu: expected 4 tab-separated fields, got %zu",
                       path.c_str(), lineno, f.size()));
    if (out.empty() || out.back().user != f[0]) {
      if (!seen.insert(f[0]).second)
        throw Error(strf("%s:%zu: user '%s' appears in two separate blocks",
                         path.c_str(), lineno, f[0].c_str()));
      out.push_back({f[0], {}, f[3]});
    }
    RankedList& cur = out.back();
    if (f[3] != cur.provenance)
      throw Error(strf("%s:%zu: provenance changes within user '%s'", path.c_str(),
                       lineno, f[0].c_str()));
    char* end = nullptr;
    long rank = std::strtol(f[2].c_str(), &end, 10);
    if (end == f[2].c_str() || *end != '\0')
      throw Error(strf("%s:%zu: bad rank '%s'", path.c_str(), lineno, f[2].c_str()));
    if (rank != static_cast<long>(cur.items.size()) + 1)
      throw Error(strf("%s:%zu: rank %ld out of order for user '%s'", path.c_str(),
                       lineno, rank, f[0].c_str()));
    if (std::find(cur.items.begin(), cur.items.end(), f[1]) != cur.items.end())
      throw Error(strf("%s:%zu: item '%s' repeats for user '%s'", path.c_str(), lineno,
                       f[1].c_str(), f[0].c_str()));
    cur.items.push_back(f[1]);
  }
  if (out.empty()) throw Error(strf("no rows in '%s'", path.c_str()));
  return out;
}

}  // namespace calirec
