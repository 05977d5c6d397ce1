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
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calirec/common.hpp"
#include "calirec/dataset.hpp"
#include "calirec/experiment.hpp"
#include "calirec/flatconfig.hpp"
#include "calirec/knn.hpp"
#include "calirec/metrics.hpp"
#include "calirec/partition.hpp"
#include "calirec/rerank.hpp"

namespace fs = std::filesystem;
using namespace calirec;

namespace {

// Lets users type --delim "\t" or "::" without shell quoting tricks.
std::string unescape_delim(const std::string& d) {
  if (d == "\\t") return "\t";
  return d;
}

std::unordered_map<std::string, int64_t> read_target_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(strf("cannot open '%s'", path.c_str()));
  std::unordered_map<std::string, int64_t> target;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(strf("%s:%zu: expected item<TAB>count", path.c_str(), lineno));
    std::string item = line.substr(0, tab);
    char* end = nullptr;
    long long count = std::strtoll(line.c_str() + tab + 1, &end, 10);
    if (end == line.c_str() + tab + 1 || *end != '\0' || count < 0)
      throw Error(strf("%s:%zu: bad target count", path.c_str(), lineno));
    if (!target.emplace(item, count).second)
      throw Error(strf("%s:%zu: item '%s' listed twice", path.c_str(), lineno,
                       item.c_str()));
  }
  if (target.empty()) throw Error(strf("no rows in '%s'", path.c_str()));
  return target;
}

int run_ingest(const std::string& ratings, const std::string& format,
               const std::string& delim, const std::string& suppliers, int min_profile,
               double ratio, uint64_t seed, const std::string& out) {
  std::vector<Interaction> rows = load_ratings(ratings, unescape_delim(delim));
  Dataset d = format == "playcount" ? frequency_to_ratings(rows)
                                    : ratings_from_explicit(rows);
  SupplierMap smap;
  bool have_suppliers = !suppliers.empty();
  if (have_suppliers) {
    auto [m, restricted] = load_supplier_map(suppliers, d, unescape_delim(delim));
    smap = std::move(m);
    d = std::move(restricted);
  }
  d = filter_min_profile(d, min_profile);
  SplitDataset sd = split(d, ratio, seed);
  fs::create_directories(out);
  write_ratings_tsv(sd.train, (fs::path(out) / "train.tsv").string());
  write_ratings_tsv(sd.test, (fs::path(out) / "test.tsv").string());
  if (have_suppliers) write_supplier_tsv(smap, (fs::path(out) / "suppliers.tsv").string());
  log::info(strf("ingested %zu users, %zu items, %zu train + %zu test ratings",
                 d.user_count(), d.item_count(), sd.train.rating_count(),
                 sd.test.rating_count()));
  return 0;
}

int run_partition(const std::string& train_path, const std::string& suppliers_path,
                  double head, double tail, const std::string& out) {
  Dataset train = read_ratings_tsv(train_path);
  fs::create_directories(out);
  ItemPartition part = partition_items(train, head, tail);
  write_item_partition_tsv(part, (fs::path(out) / "partition_items.tsv").string());
  UserGroups groups = partition_users(train, part);
  write_user_groups_tsv(groups, (fs::path(out) / "partition_users.tsv").string());

  fs::path shares_path = fs::path(out) / "shares.txt";
  std::ofstream shares(shares_path, std::ios::trunc);
  if (!shares) throw Error(strf("cannot open '%s' for writing", shares_path.string().c_str()));
  for (int g = 0; g < 3; ++g)
    shares << strf("items %s size=%zu rating_share=%.6f\n", kItemGroupLabels[g],
                   part.sizes[g], part.rating_share[g]);
  for (int g = 0; g < 3; ++g)
    shares << strf("users %s size=%zu\n", kUserGroupLabels[g], groups.sizes[g]);
  if (!suppliers_path.empty()) {
    SupplierMap smap = read_supplier_tsv(suppliers_path);
    SupplierPartition spart = partition_suppliers(train, smap, head, tail);
    write_supplier_partition_tsv(spart,
                                 (fs::path(out) / "partition_suppliers.tsv").string());
    for (int g = 0; g < 3; ++g)
      shares << strf("suppliers %s size=%zu rating_share=%.6f\n", kSupplierGroupLabels[g],
                     spart.sizes[g], spart.rating_share[g]);
  }
  shares.flush();
  if (!shares) throw Error(strf("failed writing '%s'", shares_path.string().c_str()));
  return 0;
}

int run_recommend(const std::string& train_path, int m, int k, double shrink,
                  const std::string& out) {
  Dataset train = read_ratings_tsv(train_path);
  SimilarityModel model = fit(train, k, shrink);
  std::vector<CandidateList> cands = recommend_all(model, train, m);
  write_candidates_tsv(cands, out);
  log::info(strf("wrote %zu candidate lists to %s", cands.size(), out.c_str()));
  return 0;
}

int run_rerank(const std::string& algo, const std::string& candidates_path,
               const std::string& train_path, const std::string& partition_dir,
               double lambda, int n, double fs_p, double fs_alpha,
               const std::string& dm_target_path, double dm_scale,
               const std::string& out) {
  std::vector<CandidateList> cands = read_candidates_tsv(candidates_path);
  std::vector<RankedList> lists;
  lists.reserve(cands.size());

  RerankConfig cfg;
  cfg.lambda = lambda;
  cfg.n = n;
  cfg.fs_protected_share = fs_p;
  cfg.fs_alpha = fs_alpha;

  if (algo == "none") {
    for (const CandidateList& c : cands) lists.push_back(top_n(c, n));
  } else if (algo == "dm") {
    auto target = dm_target_path.empty() ? uniform_target(cands, n, dm_scale)
                                         : read_target_tsv(dm_target_path);
    DmResult dm = dm_rerank(cands, target, cfg);
    log::info(strf("exposure discrepancy %lld, assignment cost %lld",
                   static_cast<long long>(dm.discrepancy),
                   static_cast<long long>(dm.flow_cost)));
    lists = std::move(dm.lists);
  } else {
    ItemPartition part = read_item_partition_tsv(
        (fs::path(partition_dir) / "partition_items.tsv").string());
    if (algo == "fs") {
      for (const CandidateList& c : cands) lists.push_back(fs_rerank(c, part, cfg));
    } else {
      Dataset train = read_ratings_tsv(train_path);
      for (const CandidateList& c : cands) {
        int u = train.user_index(c.user);
        if (u < 0) throw Error(strf("user '%s' has no train profile", c.user.c_str()));
        CategoryDistribution profile = profile_distribution(u, train, part);
        if (algo == "cp")
          lists.push_back(cp_rerank(c, profile, part, cfg));
        else if (algo == "xq")
          lists.push_back(xq_rerank(c, profile, part, cfg));
        else
          throw Error(strf("unknown algorithm '%s'", algo.c_str()));
      }
    }
  }
  write_lists_tsv(out, lists);
  log::info(strf("wrote %zu lists to %s", lists.size(), out.c_str()));
  return 0;
}

int run_evaluate(const std::string& lists_path, const std::string& train_path,
                 const std::string& test_path, const std::string& partition_dir,
                 const std::string& suppliers_path, double min_rating,
                 const std::string& out) {
  std::vector<RankedList> run = read_lists_tsv(lists_path);
  Dataset train = read_ratings_tsv(train_path);
  Dataset test = read_ratings_tsv(test_path);
  fs::path pdir(partition_dir);
  ItemPartition part = read_item_partition_tsv((pdir / "partition_items.tsv").string());
  UserGroups groups = read_user_groups_tsv((pdir / "partition_users.tsv").string());

  size_t longest = 0;
  for (const RankedList& l : run) longest = std::max(longest, l.items.size());
  int n = static_cast<int>(longest);

  MetricsReport rep;
  rep.n = n;
  rep.precision =
      precision_at_n(run, test, n, min_rating, &rep.users_evaluated, &rep.users_skipped);
  rep.agg_div = aggregate_diversity(run, train);
  rep.lc = long_tail_coverage(run, part);
  rep.gini = gini_index(run, train);
  Deviation ipd = item_popularity_deviation(run, part);
  rep.ipd = ipd.average;
  rep.ipd_group = ipd.per_group;
  UpdResult upd = user_popularity_deviation(run, train, part, groups);
  rep.upd = upd.average;
  rep.upd_group = upd.per_group;
  rep.exposure = exposure_table(run, train, part);

  bool have_suppliers = !suppliers_path.empty();
  if (have_suppliers) {
    SupplierMap smap = read_supplier_tsv(suppliers_path);
    SupplierPartition spart =
        read_supplier_partition_tsv((pdir / "partition_suppliers.tsv").string());
    rep.esf = equity_of_attention(run, spart, smap);
    Deviation spd = supplier_popularity_deviation(run, spart, smap);
    rep.spd = spd.average;
    rep.spd_group = spd.per_group;
  }

  std::ofstream rout(out, std::ios::trunc);
  if (!rout) throw Error(strf("cannot open '%s' for writing", out.c_str()));
  rout << "provenance,n,users_evaluated,users_skipped,precision,agg_div,lc,gini,esf,ipd,"
          "upd,spd,ipd_H,ipd_M,ipd_T,spd_S1,spd_S2,spd_S3,upd_G1,upd_G2,upd_G3\n";
  rout << run.front().provenance << "," << rep.n << "," << rep.users_evaluated << ","
       << rep.users_skipped << "," << strf("%.10g", rep.precision) << ","
       << strf("%.10g", rep.agg_div) << "," << strf("%.10g", rep.lc) << ","
       << strf("%.10g", rep.gini) << ",";
  rout << (have_suppliers ? strf("%.10g", rep.esf) : "") << ",";
  rout << strf("%.10g", rep.ipd) << "," << strf("%.10g", rep.upd) << ",";
  rout << (have_suppliers ? strf("%.10g", rep.spd) : "");
  for (int g = 0; g < 3; ++g) rout << "," << strf("%.10g", rep.ipd_group[g]);
  for (int g = 0; g < 3; ++g)
    rout << "," << (have_suppliers ? strf("%.10g", rep.spd_group[g]) : "");
  for (int g = 0; g < 3; ++g) rout << "," << strf("%.10g", rep.upd_group[g]);
  rout << "\n";
  rout.flush();
  if (!rout) throw Error(strf("failed writing '%s'", out.c_str()));

  fs::path exposure_path = fs::path(out).parent_path() / "exposure.csv";
  std::ofstream eout(exposure_path, std::ios::trunc);
  if (!eout)
    throw Error(strf("cannot open '%s' for writing", exposure_path.string().c_str()));
  eout << "item,rating_count,group,exposure\n";
  for (const ExposureRow& e : rep.exposure)
    eout << e.item << "," << e.rating_count << "," << e.group << ","
         << strf("%.10g", e.exposure) << "\n";
  eout.flush();
  if (!eout) throw Error(strf("failed writing '%s'", exposure_path.string().c_str()));

  log::info(strf("precision=%.4f agg_div=%.4f lc=%.4f gini=%.4f ipd=%.4f upd=%.4f",
                 rep.precision, rep.agg_div, rep.lc, rep.gini, rep.ipd, rep.upd));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"popularity-calibrated re-ranking toolkit"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress progress logging");

  // ingest
  std::string in_ratings, in_format = "explicit", in_delim = "\t", in_suppliers, in_out;
  int in_min_profile = 20;
  double in_split = 0.8;
  uint64_t in_seed = 42;
  CLI::App* ingest = app.add_subcommand("ingest", "load, filter and split a rating file");
  ingest->add_option("--ratings", in_ratings, "rating file")->required();
  ingest->add_option("--format", in_format, "explicit or playcount")
      ->check(CLI::IsMember({"explicit", "playcount"}));
  ingest->add_option("--delim", in_delim, "field delimiter (default tab)");
  ingest->add_option("--suppliers", in_suppliers, "item<delim>supplier file");
  ingest->add_option("--min-profile", in_min_profile, "minimum ratings per user");
  ingest->add_option("--split", in_split, "train fraction");
  ingest->add_option("--seed", in_seed, "split seed");
  ingest->add_option("--out", in_out, "output directory")->required();

  // partition
  std::string pa_train, pa_suppliers, pa_out;
  double pa_head = 0.2, pa_tail = 0.2;
  CLI::App* partition = app.add_subcommand("partition", "head/mid/tail group assignment");
  partition->add_option("--train", pa_train, "train ratings tsv")->required();
  partition->add_option("--suppliers", pa_suppliers, "supplier tsv");
  partition->add_option("--head", pa_head, "head rating share");
  partition->add_option("--tail", pa_tail, "tail rating share");
  partition->add_option("--out", pa_out, "output directory")->required();

  // recommend
  std::string re_train, re_out;
  int re_m = 100, re_k = 40;
  double re_shrink = 10.0;
  CLI::App* recommend_cmd =
      app.add_subcommand("recommend", "item-based CF candidate generation");
  recommend_cmd->add_option("--train", re_train, "train ratings tsv")->required();
  recommend_cmd->add_option("--m", re_m, "candidates per user");
  recommend_cmd->add_option("--k", re_k, "neighbors per item");
  recommend_cmd->add_option("--shrink", re_shrink, "similarity shrinkage");
  recommend_cmd->add_option("--out", re_out, "candidates tsv")->required();

  // rerank
  std::string rr_algo, rr_candidates, rr_train, rr_partition, rr_dm_target, rr_out;
  double rr_lambda = 0.5, rr_fs_p = 0.5, rr_fs_alpha = 0.1, rr_dm_scale = 1.0;
  int rr_n = 10;
  CLI::App* rerank = app.add_subcommand("rerank", "re-rank candidate lists");
  rerank->add_option("--algo", rr_algo, "cp, xq, fs, dm or none")
      ->required()
      ->check(CLI::IsMember({"cp", "xq", "fs", "dm", "none"}));
  rerank->add_option("--candidates", rr_candidates, "candidates tsv")->required();
  rerank->add_option("--train", rr_train, "train ratings tsv (cp/xq)");
  rerank->add_option("--partition", rr_partition, "partition directory (cp/xq/fs)");
  rerank->add_option("--lambda", rr_lambda, "trade-off weight");
  rerank->add_option("--n", rr_n, "list length");
  rerank->add_option("--fs-p", rr_fs_p, "protected share");
  rerank->add_option("--fs-alpha", rr_fs_alpha, "significance level");
  rerank->add_option("--dm-target", rr_dm_target, "item<TAB>count exposure targets");
  rerank->add_option("--dm-scale", rr_dm_scale, "uniform target scale");
  rerank->add_option("--out", rr_out, "lists tsv")->required();

  // evaluate
  std::string ev_lists, ev_train, ev_test, ev_partition, ev_suppliers, ev_out;
  double ev_min_rating = kNoRatingThreshold;
  CLI::App* evaluate = app.add_subcommand("evaluate", "metric suite over ranked lists");
  evaluate->add_option("--lists", ev_lists, "lists tsv")->required();
  evaluate->add_option("--train", ev_train, "train ratings tsv")->required();
  evaluate->add_option("--test", ev_test, "test ratings tsv")->required();
  evaluate->add_option("--partition", ev_partition, "partition directory")->required();
  evaluate->add_option("--suppliers", ev_suppliers, "supplier tsv");
  evaluate->add_option("--min-rating", ev_min_rating, "test relevance threshold");
  evaluate->add_option("--out", ev_out, "report csv")->required();

  // experiment
  std::string ex_config, ex_out;
  CLI::App* experiment = app.add_subcommand("experiment", "config-driven sweep");
  experiment->add_option("--config", ex_config, "flat key = value config file")
      ->required();
  experiment->add_option("--out", ex_out, "output directory")->required();

  try {
    app.parse(argc, argv);
    log::quiet() = quiet;
    if (*ingest)
      return run_ingest(in_ratings, in_format, in_delim, in_suppliers, in_min_profile,
                        in_split, in_seed, in_out);
    if (*partition) return run_partition(pa_train, pa_suppliers, pa_head, pa_tail, pa_out);
    if (*recommend_cmd) return run_recommend(re_train, re_m, re_k, re_shrink, re_out);
    if (*rerank)
      return run_rerank(rr_algo, rr_candidates, rr_train, rr_partition, rr_lambda, rr_n,
                        rr_fs_p, rr_fs_alpha, rr_dm_target, rr_dm_scale, rr_out);
    if (*evaluate)
      return run_evaluate(ev_lists, ev_train, ev_test, ev_partition, ev_suppliers,
                          ev_min_rating, ev_out);
    if (*experiment) {
      ExperimentConfig cfg = ExperimentConfig::from_config(FlatConfig::parse_file(ex_config));
      run_sweep(cfg, ex_out);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[calirec] error: %s\n", e.what());
    return 1;
  }
  return 0;
}
