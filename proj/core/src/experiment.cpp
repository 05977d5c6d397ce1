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
#include "calirec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "calirec/common.hpp"
#include "calirec/knn.hpp"
#include "calirec/synthetic.hpp"

namespace fs = std::filesystem;

namespace calirec {

namespace {

const std::vector<std::string> kConfigKeys = {
    "source",         "ratings",        "delimiter",      "value_mode",
    "suppliers",      "supplier_count", "supplier_seed",  "synth_users",
    "synth_items",    "synth_suppliers", "synth_exponent", "synth_seed",
    "min_profile",    "split_ratio",    "split_seed",     "head_share",
    "tail_share",     "knn_k",          "knn_shrinkage",  "m",
    "n",              "algos",          "cp_lambdas",     "xq_lambdas",
    "fs_p",           "fs_alpha",       "dm_scales",      "target_precision",
    "precision_tol",  "min_rating",     "threads"};

std::string fmt_value(double v) { return strf("%.10g", v); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(strf("cannot open '%s' for writing", path.string().c_str()));
  return out;
}

void finish_out(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(strf("failed writing '%s'", path.string().c_str()));
}

std::string point_slug(size_t index, const GridPoint& p) {
  std::string slug = strf("p%02zu_%s", index, p.algo.c_str());
  for (char c : p.params) {
    bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '.' || c == '-';
    slug.push_back(keep ? c : '_');
  }
  return slug;
}

void write_point_report(const fs::path& path, const MetricsReport& r) {
  std::ofstream out = open_out(path);
  out << "metric,value\n";
  out << "precision," << fmt_value(r.precision) << "\n";
  out << "agg_div," << fmt_value(r.agg_div) << "\n";
  out << "lc," << fmt_value(r.lc) << "\n";
  out << "gini," << fmt_value(r.gini) << "\n";
  out << "esf," << fmt_value(r.esf) << "\n";
  out << "ipd," << fmt_value(r.ipd) << "\n";
  out << "upd," << fmt_value(r.upd) << "\n";
  out << "spd," << fmt_value(r.spd) << "\n";
  for (int g = 0; g < 3; ++g)
    out << "ipd_" << kItemGroupLabels[g] << "," << fmt_value(r.ipd_group[g]) << "\n";
  for (int g = 0; g < 3; ++g)
    out << "spd_" << kSupplierGroupLabels[g] << "," << fmt_value(r.spd_group[g]) << "\n";
  for (int g = 0; g < 3; ++g)
    out << "upd_" << kUserGroupLabels[g] << "," << fmt_value(r.upd_group[g]) << "\n";
  out << "n," << r.n << "\n";
  out << "users_evaluated," << r.users_evaluated << "\n";
  out << "users_skipped," << r.users_skipped << "\n";
  finish_out(out, path);
}

struct PipelineData {
  Dataset train;
  Dataset test;
  SupplierMap suppliers;
  ItemPartition part;
  SupplierPartition spart;
  UserGroups groups;
  std::vector<CandidateList> candidates;
  std::vector<CategoryDistribution> profiles;  // aligned with candidates
};

std::vector<RankedList> run_point_lists(const PipelineData& data, const GridPoint& p) {
  std::vector<RankedList> lists;
  lists.reserve(data.candidates.size());
  if (p.algo == "dm") {
    auto target = uniform_target(data.candidates, p.rerank.n, p.dm_scale);
    DmResult dm = dm_rerank(data.candidates, target, p.rerank);
    return std::move(dm.lists);
  }
  for (size_t i = 0; i < data.candidates.size(); ++i) {
    if (p.algo == "cp")
      lists.push_back(cp_rerank(data.candidates[i], data.profiles[i], data.part, p.rerank));
    else if (p.algo == "xq")
      lists.push_back(xq_rerank(data.candidates[i], data.profiles[i], data.part, p.rerank));
    else if (p.algo == "fs")
      lists.push_back(fs_rerank(data.candidates[i], data.part, p.rerank));
    else
      throw Error(strf("unknown algorithm '%s'", p.algo.c_str()));
  }
  return lists;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const FlatConfig& cfg) {
  cfg.check_known(kConfigKeys);
  ExperimentConfig e;
  e.source = cfg.get_string("source", e.source);
  e.ratings_path = cfg.get_string("ratings", e.ratings_path);
  e.delimiter = cfg.get_string("delimiter", e.delimiter);
  e.value_mode = cfg.get_string("value_mode", e.value_mode);
  e.suppliers_path = cfg.get_string("suppliers", e.suppliers_path);
  e.supplier_count = static_cast<int>(cfg.get_int("supplier_count", e.supplier_count));
  e.supplier_seed = static_cast<uint64_t>(cfg.get_int("supplier_seed", e.supplier_seed));
  e.synth_users = static_cast<int>(cfg.get_int("synth_users", e.synth_users));
  e.synth_items = static_cast<int>(cfg.get_int("synth_items", e.synth_items));
  e.synth_suppliers = static_cast<int>(cfg.get_int("synth_suppliers", e.synth_suppliers));
  e.synth_exponent = cfg.get_number("synth_exponent", e.synth_exponent);
  e.synth_seed = static_cast<uint64_t>(cfg.get_int("synth_seed", e.synth_seed));
  e.min_profile = static_cast<int>(cfg.get_int("min_profile", e.min_profile));
  e.split_ratio = cfg.get_number("split_ratio", e.split_ratio);
  e.split_seed = static_cast<uint64_t>(cfg.get_int("split_seed", e.split_seed));
  e.head_share = cfg.get_number("head_share", e.head_share);
  e.tail_share = cfg.get_number("tail_share", e.tail_share);
  e.knn_k = static_cast<int>(cfg.get_int("knn_k", e.knn_k));
  e.knn_shrinkage = cfg.get_number("knn_shrinkage", e.knn_shrinkage);
  e.m = static_cast<int>(cfg.get_int("m", e.m));
  e.n = static_cast<int>(cfg.get_int("n", e.n));
  e.algos = cfg.get_strings("algos", e.algos);
  e.cp_lambdas = cfg.get_numbers("cp_lambdas", e.cp_lambdas);
  e.xq_lambdas = cfg.get_numbers("xq_lambdas", e.xq_lambdas);
  e.fs_p = cfg.get_numbers("fs_p", e.fs_p);
  e.fs_alpha = cfg.get_numbers("fs_alpha", e.fs_alpha);
  e.dm_scales = cfg.get_numbers("dm_scales", e.dm_scales);
  e.target_precision = cfg.get_number("target_precision", e.target_precision);
  e.precision_tol = cfg.get_number("precision_tol", e.precision_tol);
  e.min_rating = cfg.get_number("min_rating", e.min_rating);
  e.threads = static_cast<int>(cfg.get_int("threads", e.threads));
  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  if (source != "file" && source != "synthetic")
    throw Error(strf("source '%s' must be 'file' or 'synthetic'", source.c_str()));
  if (source == "file") {
    if (ratings_path.empty()) throw Error("file source needs a ratings path");
    if (!fs::exists(ratings_path))
      throw Error(strf("ratings file '%s' does not exist", ratings_path.c_str()));
    if (value_mode != "explicit" && value_mode != "playcount")
      throw Error(strf("value_mode '%s' must be 'explicit' or 'playcount'",
                       value_mode.c_str()));
    if (!suppliers_path.empty() && !fs::exists(suppliers_path))
      throw Error(strf("supplier file '%s' does not exist", suppliers_path.c_str()));
    if (suppliers_path.empty() && supplier_count < 3)
      throw Error("file source needs a supplier file or supplier_count >= 3");
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0))
    throw Error(strf("split_ratio %g outside (0, 1)", split_ratio));
  if (min_profile < 1) throw Error("min_profile must be at least 1");
  if (n <= 0 || m <= 0 || n > m) throw Error(strf("need 0 < n <= m, got n=%d m=%d", n, m));
  if (knn_k <= 0) throw Error("knn_k must be positive");
  if (threads < 0) throw Error("threads must be non-negative");
  if (algos.empty()) throw Error("no algorithms selected");
  std::unordered_set<std::string> seen;
  for (const std::string& a : algos) {
    if (a != "cp" && a != "xq" && a != "fs" && a != "dm")
      throw Error(strf("unknown algorithm '%s'", a.c_str()));
    if (!seen.insert(a).second) throw Error(strf("algorithm '%s' listed twice", a.c_str()));
    bool empty = (a == "cp" && cp_lambdas.empty()) || (a == "xq" && xq_lambdas.empty()) ||
                 (a == "fs" && (fs_p.empty() || fs_alpha.empty())) ||
                 (a == "dm" && dm_scales.empty());
    if (empty) throw Error(strf("empty hyperparameter grid for '%s'", a.c_str()));
  }
  for (double l : cp_lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw Error(strf("cp lambda %g outside [0, 1]", l));
  for (double l : xq_lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw Error(strf("xq lambda %g outside [0, 1]", l));
  for (double p : fs_p)
    if (!(p > 0.0 && p < 1.0)) throw Error(strf("fs p %g outside (0, 1)", p));
  for (double a : fs_alpha)
    if (!(a > 0.0 && a < 1.0)) throw Error(strf("fs alpha %g outside (0, 1)", a));
  for (double s : dm_scales)
    if (!(s >= 0.0 && s <= 1.0)) throw Error(strf("dm scale %g outside [0, 1]", s));
  if (precision_tol < 0.0) throw Error("precision_tol must be non-negative");
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  auto add = [&out](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  };
  auto add_list = [&add](const char* key, const std::vector<double>& vs) {
    std::string s = "[";
    for (size_t i = 0; i < vs.size(); ++i) {
      if (i) s += ", ";
      s += strf("%.17g", vs[i]);
    }
    add(key, s + "]");
  };
  add("source", source);
  add("ratings", ratings_path);
  add("delimiter", delimiter);
  add("value_mode", value_mode);
  add("suppliers", suppliers_path);
  add("supplier_count", strf("%d", supplier_count));
  add("supplier_seed", strf("%llu", static_cast<unsigned long long>(supplier_seed)));
  add("synth_users", strf("%d", synth_users));
  add("synth_items", strf("%d", synth_items));
  add("synth_suppliers", strf("%d", synth_suppliers));
  add("synth_exponent", strf("%.17g", synth_exponent));
  add("synth_seed", strf("%llu", static_cast<unsigned long long>(synth_seed)));
  add("min_profile", strf("%d", min_profile));
  add("split_ratio", strf("%.17g", split_ratio));
  add("split_seed", strf("%llu", static_cast<unsigned long long>(split_seed)));
  add("head_share", strf("%.17g", head_share));
  add("tail_share", strf("%.17g", tail_share));
  add("knn_k", strf("%d", knn_k));
  add("knn_shrinkage", strf("%.17g", knn_shrinkage));
  add("m", strf("%d", m));
  add("n", strf("%d", n));
  std::string alist = "[";
  for (size_t i = 0; i < algos.size(); ++i) {
    if (i) alist += ", ";
    alist += algos[i];
  }
  add("algos", alist + "]");
  add_list("cp_lambdas", cp_lambdas);
  add_list("xq_lambdas", xq_lambdas);
  add_list("fs_p", fs_p);
  add_list("fs_alpha", fs_alpha);
  add_list("dm_scales", dm_scales);
  add("target_precision", strf("%.17g", target_precision));
  add("precision_tol", strf("%.17g", precision_tol));
  add("min_rating", std::isfinite(min_rating) ? strf("%.17g", min_rating) : "none");
  add("threads", strf("%d", threads));
  return out;
}

uint64_t ExperimentConfig::hash() const {
  std::string c = canonical();
  return fnv1a64(c.data(), c.size());
}

std::map<std::string, size_t> precision_match(const SweepResult& sweep, double target,
                                              double tol,
                                              std::map<std::string, bool>* ok) {
  std::map<std::string, size_t> matched;
  if (ok) ok->clear();
  for (size_t i = 0; i < sweep.points.size(); ++i) {
    const GridPoint& p = sweep.points[i];
    if (p.failed) continue;
    double gap = std::fabs(p.report.precision - target);
    auto it = matched.find(p.algo);
    if (it == matched.end() ||
        gap < std::fabs(sweep.points[it->second].report.precision - target)) {
      matched[p.algo] = i;
    }
  }
  if (ok)
    for (const auto& [algo, idx] : matched)
      (*ok)[algo] = std::fabs(sweep.points[idx].report.precision - target) <= tol;
  return matched;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::path run_dir =
      fs::path(out_dir) / strf("run-%016llx", static_cast<unsigned long long>(cfg.hash()));
  fs::create_directories(run_dir / "points");
  {
    std::ofstream out = open_out(run_dir / "config.txt");
    out << cfg.canonical();
    finish_out(out, run_dir / "config.txt");
  }
  log::info(strf("run directory: %s", run_dir.string().c_str()));

  PipelineData data;
  {
    Dataset full;
    if (cfg.source == "synthetic") {
      SyntheticData synth =
          generate_synthetic(cfg.synth_users, cfg.synth_items, cfg.synth_suppliers,
                             cfg.synth_exponent, cfg.synth_seed);
      full = std::move(synth.ratings);
      data.suppliers = std::move(synth.suppliers);
      full = filter_min_profile(full, cfg.min_profile);
    } else {
      std::vector<Interaction> rows = load_ratings(cfg.ratings_path, cfg.delimiter);
      full = cfg.value_mode == "playcount" ? frequency_to_ratings(rows)
                                           : ratings_from_explicit(rows);
      if (!cfg.suppliers_path.empty()) {
        auto [smap, restricted] = load_supplier_map(cfg.suppliers_path, full);
        data.suppliers = std::move(smap);
        full = std::move(restricted);
        full = filter_min_profile(full, cfg.min_profile);
      } else {
        full = filter_min_profile(full, cfg.min_profile);
        data.suppliers = synthetic_suppliers(full, cfg.supplier_count, cfg.supplier_seed);
      }
    }
    SplitDataset sd = split(full, cfg.split_ratio, cfg.split_seed);
    data.train = std::move(sd.train);
    data.test = std::move(sd.test);
  }
  write_ratings_tsv(data.train, (run_dir / "train.tsv").string());
  write_ratings_tsv(data.test, (run_dir / "test.tsv").string());
  write_supplier_tsv(data.suppliers, (run_dir / "suppliers.tsv").string());

  data.part = partition_items(data.train, cfg.head_share, cfg.tail_share);
  data.spart = partition_suppliers(data.train, data.suppliers, cfg.head_share,
                                   cfg.tail_share);
  data.groups = partition_users(data.train, data.part);
  write_item_partition_tsv(data.part, (run_dir / "partition_items.tsv").string());
  write_supplier_partition_tsv(data.spart, (run_dir / "partition_suppliers.tsv").string());
  write_user_groups_tsv(data.groups, (run_dir / "partition_users.tsv").string());

  SimilarityModel model = fit(data.train, cfg.knn_k, cfg.knn_shrinkage);
  data.candidates = recommend_all(model, data.train, cfg.m);
  write_candidates_tsv(data.candidates, (run_dir / "candidates.tsv").string());

  data.profiles.reserve(data.candidates.size());
  for (const CandidateList& c : data.candidates)
    data.profiles.push_back(
        profile_distribution(data.train.user_index(c.user), data.train, data.part));

  SweepResult sweep;
  {
    std::vector<RankedList> base;
    base.reserve(data.candidates.size());
    for (const CandidateList& c : data.candidates) base.push_back(top_n(c, cfg.n));
    sweep.base = evaluate_run(base, data.train, data.test, data.part, data.spart,
                              data.groups, data.suppliers, cfg.min_rating);
    fs::path dir = run_dir / "points" / "base";
    fs::create_directories(dir);
    write_lists_tsv((dir / "lists.tsv").string(), base);
    write_point_report(dir / "report.csv", sweep.base);
    log::info(strf("base: precision=%.4f agg_div=%.4f gini=%.4f upd=%.4f", sweep.base.precision,
              sweep.base.agg_div, sweep.base.gini, sweep.base.upd));
  }

  for (const std::string& algo : cfg.algos) {
    if (algo == "cp" || algo == "xq") {
      const auto& lambdas = algo == "cp" ? cfg.cp_lambdas : cfg.xq_lambdas;
      for (double l : lambdas) {
        GridPoint p;
        p.algo = algo;
        p.params = strf("lambda=%g", l);
        p.x = l;
        p.rerank.lambda = l;
        p.rerank.n = cfg.n;
        sweep.points.push_back(std::move(p));
      }
    } else if (algo == "fs") {
      for (double pp : cfg.fs_p)
        for (double a : cfg.fs_alpha) {
          GridPoint p;
          p.algo = algo;
          p.params = strf("p=%g alpha=%g", pp, a);
          p.x = pp;
          p.rerank.n = cfg.n;
          p.rerank.fs_protected_share = pp;
          p.rerank.fs_alpha = a;
          sweep.points.push_back(std::move(p));
        }
    } else {
      for (double s : cfg.dm_scales) {
        GridPoint p;
        p.algo = algo;
        p.params = strf("scale=%g", s);
        p.x = s;
        p.rerank.n = cfg.n;
        p.dm_scale = s;
        sweep.points.push_back(std::move(p));
      }
    }
  }

  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  if (sweep.points.size() < workers) workers = static_cast<unsigned>(sweep.points.size());
  if (workers == 0) workers = 1;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= sweep.points.size()) return;
      GridPoint& p = sweep.points[i];
      try {
        std::vector<RankedList> lists = run_point_lists(data, p);
        p.report = evaluate_run(lists, data.train, data.test, data.part, data.spart,
                                data.groups, data.suppliers, cfg.min_rating);
        fs::path dir = run_dir / "points" / point_slug(i, p);
        fs::create_directories(dir);
        write_lists_tsv((dir / "lists.tsv").string(), lists);
        write_point_report(dir / "report.csv", p.report);
        log::info(strf("%s %s: precision=%.4f upd=%.4f", p.algo.c_str(), p.params.c_str(),
                  p.report.precision, p.report.upd));
      } catch (const std::exception& ex) {
        p.failed = true;
        p.error = ex.what();
        log::warn(strf("%s %s failed: %s", p.algo.c_str(), p.params.c_str(), ex.what()));
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  sweep.target = cfg.target_precision > 0.0 ? cfg.target_precision : sweep.base.precision;
  sweep.matched = precision_match(sweep, sweep.target, cfg.precision_tol, &sweep.match_ok);
  emit_report(sweep, run_dir.string());
  return sweep;
}

void emit_report(const SweepResult& sweep, const std::string& dir) {
  fs::path base(dir);
  fs::create_directories(base);

  // One row per run: the base list plus each algorithm's matched point.
  struct Row {
    std::string algo, params;
    const MetricsReport* report;
  };
  std::vector<Row> rows;
  rows.push_back({"base", "", &sweep.base});
  for (const auto& [algo, idx] : sweep.matched)
    rows.push_back({algo, sweep.points[idx].params, &sweep.points[idx].report});

  {
    fs::path path = base / "table1.csv";
    std::ofstream out = open_out(path);
    out << "algorithm,params,precision,agg_div,lc,gini,esf,ipd,upd,spd\n";
    for (const Row& r : rows)
      out << r.algo << "," << r.params << "," << fmt_value(r.report->precision) << ","
          << fmt_value(r.report->agg_div) << "," << fmt_value(r.report->lc) << ","
          << fmt_value(r.report->gini) << "," << fmt_value(r.report->esf) << ","
          << fmt_value(r.report->ipd) << "," << fmt_value(r.report->upd) << ","
          << fmt_value(r.report->spd) << "\n";
    finish_out(out, path);
  }
  {
    fs::path path = base / "groups.csv";
    std::ofstream out = open_out(path);
    out << "algorithm,params,metric,group,value\n";
    for (const Row& r : rows) {
      for (int g = 0; g < 3; ++g)
        out << r.algo << "," << r.params << ",ipd," << kItemGroupLabels[g] << ","
            << fmt_value(r.report->ipd_group[g]) << "\n";
      for (int g = 0; g < 3; ++g)
        out << r.algo << "," << r.params << ",spd," << kSupplierGroupLabels[g] << ","
            << fmt_value(r.report->spd_group[g]) << "\n";
      for (int g = 0; g < 3; ++g)
        out << r.algo << "," << r.params << ",upd," << kUserGroupLabels[g] << ","
            << fmt_value(r.report->upd_group[g]) << "\n";
    }
    finish_out(out, path);
  }
  {
    fs::path path = base / "exposure.csv";
    std::ofstream out = open_out(path);
    out << "algorithm,params,item,rating_count,group,exposure\n";
    for (const Row& r : rows)
      for (const ExposureRow& e : r.report->exposure)
        out << r.algo << "," << r.params << "," << e.item << "," << e.rating_count << ","
            << e.group << "," << fmt_value(e.exposure) << "\n";
    finish_out(out, path);
  }
  {
    fs::path path = base / "sweep.csv";
    std::ofstream out = open_out(path);
    out << "algorithm,params,x,metric,value\n";
    for (const GridPoint& p : sweep.points) {
      if (p.failed) continue;
      const MetricsReport& r = p.report;
      const std::pair<const char*, double> metrics[] = {
          {"precision", r.precision}, {"agg_div", r.agg_div}, {"lc", r.lc},
          {"gini", r.gini},           {"esf", r.esf},         {"ipd", r.ipd},
          {"upd", r.upd},             {"spd", r.spd}};
      for (const auto& [name, value] : metrics)
        out << p.algo << "," << p.params << "," << fmt_value(p.x) << "," << name << ","
            << fmt_value(value) << "\n";
    }
    finish_out(out, path);
  }
  {
    fs::path path = base / "matched.csv";
    std::ofstream out = open_out(path);
    out << "algorithm,params,precision,target,within_tol\n";
    for (const auto& [algo, idx] : sweep.matched)
      out << algo << "," << sweep.points[idx].params << ","
          << fmt_value(sweep.points[idx].report.precision) << "," << fmt_value(sweep.target)
          << "," << (sweep.match_ok.at(algo) ? "true" : "false") << "\n";
    finish_out(out, path);
  }
  {
    fs::path path = base / "failed.csv";
    std::ofstream out = open_out(path);
    out << "algorithm,params,error\n";
    for (const GridPoint& p : sweep.points) {
      if (!p.failed) continue;
      std::string msg = p.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << p.algo << "," << p.params << "," << msg << "\n";
    }
    finish_out(out, path);
  }
}

}  // namespace calirec
