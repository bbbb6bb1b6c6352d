#pragma once

// Benchmark protocol: dataset loading with discretization, default parent
// limits, stratified folds, macro metrics, cross-validation of BKB and BN
// classifiers, and the MDL / call-count comparison.

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bkbforge/bkbsl.hpp"
#include "bkbforge/bnlearn.hpp"
#include "bkbforge/discretize.hpp"
#include "bkbforge/ingest.hpp"
#include "bkbforge/io.hpp"
#include "bkbforge/parallel.hpp"
#include "bkbforge/reason.hpp"

namespace bkbforge {

// Parent-set limits used for the KEEL benchmarks, by dataset name.
inline const std::map<std::string, std::size_t>& default_parent_limits() {
  static const std::map<std::string, std::size_t> table{
      {"australian", 6},  {"balance", 4},       {"banana", 2},         {"bands", 5},
      {"breast", 9},      {"bupa", 6},          {"car", 6},            {"cleveland", 10},
      {"contraceptive", 9}, {"crx", 5},         {"ecoli", 7},          {"flare", 6},
      {"glass", 9},       {"haberman", 3},      {"hayes-roth", 4},     {"heart", 10},
      {"hepatitis", 6},   {"housevotes", 7},    {"iris", 4},           {"kr-vs-k", 3},
      {"led7digit", 7},   {"lymphography", 5},  {"mammographic", 5},   {"monk-2", 6},
      {"newthyroid", 5},  {"nursery", 8},       {"phoneme", 5},        {"pima", 8},
      {"poker", 1},       {"post-operative", 8}, {"saheart", 9},       {"tae", 5},
      {"tic-tac-toe", 9}, {"titanic", 3},       {"vowel", 5},          {"wine", 8},
      {"winequality-red", 10}, {"winequality-white", 4}, {"yeast", 8},  {"zoo", 7},
  };
  return table;
}

// Known datasets use the table; others allow every other variable up to 4.
inline std::size_t default_parent_limit(const std::string& path, std::size_t num_variables) {
  const auto stem = std::filesystem::path(path).stem().string();
  const auto& table = default_parent_limits();
  if (auto it = table.find(stem); it != table.end()) return it->second;
  return std::min<std::size_t>(num_variables > 0 ? num_variables - 1 : 0, 4);
}

struct ExperimentConfig {
  std::string data_path;
  TableFormat format = TableFormat::kAuto;
  std::string target;  // empty: KEEL output or last column
  std::optional<std::size_t> parent_limit;
  std::size_t folds = 10;
  Backend backend = Backend::kExact;
  double delta = kDefaultDelta;
  BnVariant variant = BnVariant::kLamBacchus;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: worker_count()
};

struct LoadedData {
  Dataset dataset;
  VarId target = 0;
  std::size_t parent_limit = 0;
  std::map<std::string, std::vector<double>> cuts;
  std::vector<std::string> warnings;
};

// Reads the table and discretizes numeric columns against the target.
inline LoadedData load_experiment_data(const ExperimentConfig& cfg) {
  const auto table = read_table(cfg.data_path, cfg.format);
  LoadedData out;
  const auto target = resolve_target(table, cfg.target);
  auto disc = discretize_entropy_mdl(table, target);
  out.dataset = std::move(disc.dataset);
  out.cuts = std::move(disc.cuts);
  out.warnings = std::move(disc.warnings);
  out.target = static_cast<VarId>(target);
  out.parent_limit = cfg.parent_limit ? *cfg.parent_limit : default_parent_limit(cfg.data_path, out.dataset.num_variables());
  return out;
}

// Stratified folds: rows of each class are shuffled with the seed and dealt
// round-robin, continuing the deal across classes.
inline std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& data, VarId target, std::size_t folds,
                                                              std::uint64_t seed) {
  if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
  if (folds > data.num_rows()) throw InputError("more folds than rows");
  std::vector<std::vector<std::size_t>> by_class(data.variable(target).arity());
  for (std::size_t r = 0; r < data.num_rows(); ++r) by_class[data.row(r)[target]].push_back(r);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t next = 0;
  for (auto& rows : by_class) {
    for (std::size_t i = rows.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(rows[i - 1], rows[pick(rng)]);
    }
    for (auto r : rows) out[next++ % folds].push_back(r);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

struct MetricsRow {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t failed = 0;
};

// Macro metrics for one set of predictions. Classes are those appearing as
// truth or prediction; abstentions count as misses for their true class.
inline MetricsRow macro_metrics(std::span<const StateId> truth, std::span<const std::optional<StateId>> predicted) {
  std::set<StateId> labels(truth.begin(), truth.end());
  MetricsRow m;
  for (const auto& p : predicted) {
    if (p) {
      labels.insert(*p);
    } else {
      ++m.failed;
    }
  }
  if (labels.empty()) return m;
  for (StateId c : labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool is_pred = predicted[i] && *predicted[i] == c;
      if (truth[i] == c && is_pred) ++tp;
      if (truth[i] != c && is_pred) ++fp;
      if (truth[i] == c && !is_pred) ++fn;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.precision += p;
    m.recall += r;
    m.f1 += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  const double k = static_cast<double>(labels.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

struct FoldResult {
  MetricsRow bkb;
  MetricsRow bn;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

struct CrossValReport {
  std::string dataset;
  std::size_t parent_limit = 0;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> per_fold;
  MetricsRow bkb;  // averaged over folds; failed is the total
  MetricsRow bn;
};

inline MetricsRow average(std::span<const FoldResult> folds, bool bkb) {
  MetricsRow out;
  for (const auto& f : folds) {
    const auto& m = bkb ? f.bkb : f.bn;
    out.precision += m.precision;
    out.recall += m.recall;
    out.f1 += m.f1;
    out.failed += m.failed;
  }
  const double n = static_cast<double>(folds.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  return out;
}

inline FoldResult run_fold(const Dataset& data, VarId target, std::span<const std::size_t> test_rows,
                           std::size_t parent_limit, const ExperimentConfig& cfg) {
  std::vector<bool> is_test(data.num_rows(), false);
  for (auto r : test_rows) is_test[r] = true;
  std::vector<std::size_t> train_rows;
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    if (!is_test[r]) train_rows.push_back(r);
  }
  const auto train = data.subset(train_rows);

  LearnOptions lopt;
  lopt.parent_limit = parent_limit;
  lopt.backend = cfg.backend;
  lopt.delta = cfg.delta;
  lopt.greedy.seed = cfg.seed;
  lopt.threads = 1;
  const auto bkb = learn(train, lopt);

  BnLearnOptions bopt;
  bopt.parent_limit = parent_limit;
  bopt.variant = cfg.variant;
  bopt.delta = cfg.delta;
  const auto bn = learn_bn(train, bopt);

  std::vector<StateId> truth;
  std::vector<std::optional<StateId>> bkb_pred, bn_pred;
  for (auto r : test_rows) {
    const auto& row = data.row(r);
    truth.push_back(row[target]);
    bkb_pred.push_back(classify(bkb.model, row, target).best);
    bn_pred.push_back(bn_classify(bn.bn, row, target).best);
  }
  FoldResult out;
  out.bkb = macro_metrics(truth, bkb_pred);
  out.bn = macro_metrics(truth, bn_pred);
  out.train_rows = train_rows.size();
  out.test_rows = test_rows.size();
  return out;
}

inline CrossValReport crossval(const ExperimentConfig& cfg) {
  const auto loaded = load_experiment_data(cfg);
  const auto folds = stratified_folds(loaded.dataset, loaded.target, cfg.folds, cfg.seed);
  CrossValReport report;
  report.dataset = std::filesystem::path(cfg.data_path).stem().string();
  report.parent_limit = loaded.parent_limit;
  report.folds = cfg.folds;
  report.seed = cfg.seed;
  report.per_fold.resize(folds.size());
  parallel_for(
      folds.size(),
      [&](std::size_t f) {
        report.per_fold[f] = run_fold(loaded.dataset, loaded.target, folds[f], loaded.parent_limit, cfg);
      },
      cfg.threads ? cfg.threads : worker_count());
  report.bkb = average(report.per_fold, true);
  report.bn = average(report.per_fold, false);
  return report;
}

struct MdlComparison {
  std::string dataset;
  std::size_t parent_limit = 0;
  std::size_t num_rows = 0;
  std::size_t num_worlds = 0;
  MdlBreakdown bkb;
  double bkb_model_bits_without_sources = 0.0;
  double bkb_data_bits_with_priors = 0.0;
  CallCounter bkb_calls;
  MdlBreakdown bn;
  double bn_model_bits_other_variant = 0.0;
  CallCounter bn_calls;
  double bkb_world_entropy = 0.0;  // sum over unique worlds of the fragment entropy
  double bn_world_entropy = 0.0;   // same worlds scored with the BN structure
};

// Trains both models on the full data, each with its own probability
// engine so call counts stay separate.
inline MdlComparison compare_mdl(const Dataset& data, std::size_t parent_limit, const ExperimentConfig& cfg) {
  LearnOptions lopt;
  lopt.parent_limit = parent_limit;
  lopt.backend = cfg.backend;
  lopt.delta = cfg.delta;
  lopt.greedy.seed = cfg.seed;
  lopt.threads = cfg.threads;
  const auto bkb = learn(data, lopt);

  BnLearnOptions bopt;
  bopt.parent_limit = parent_limit;
  bopt.variant = cfg.variant;
  bopt.delta = cfg.delta;
  const auto bn = learn_bn(data, bopt);

  MdlComparison out;
  out.parent_limit = parent_limit;
  out.num_rows = data.num_rows();
  out.num_worlds = bkb.worlds.size();
  out.bkb = bkb.mdl;
  out.bkb_model_bits_without_sources = bkb.model_bits_without_sources;
  out.bkb_data_bits_with_priors = bkb.data_bits_with_priors;
  out.bkb_calls = bkb.calls;
  out.bn = bn.mdl;
  const auto other = cfg.variant == BnVariant::kSuzuki ? BnVariant::kLamBacchus : BnVariant::kSuzuki;
  out.bn_model_bits_other_variant = bn_model_bits(bn.bn.parents, arities_of(bn.bn.variables), data.num_rows(), other, cfg.delta);
  out.bn_calls = bn.calls;
  ProbEngine audit(data);
  for (const auto& s : bkb.per_world_scores) out.bkb_world_entropy += s.entropy;
  for (const auto& w : bkb.worlds) out.bn_world_entropy += bn_world_entropy(bn.bn, audit, w.assignment);
  return out;
}

inline MdlComparison compare_mdl(const ExperimentConfig& cfg) {
  const auto loaded = load_experiment_data(cfg);
  auto out = compare_mdl(loaded.dataset, loaded.parent_limit, cfg);
  out.dataset = std::filesystem::path(cfg.data_path).stem().string();
  return out;
}

inline Json to_json(const MetricsRow& m) {
  return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"failed", m.failed}};
}

inline Json to_json(const CrossValReport& r) {
  Json folds = Json::array();
  for (const auto& f : r.per_fold) {
    folds.push_back(Json{{"train_rows", f.train_rows}, {"test_rows", f.test_rows}, {"bkb", to_json(f.bkb)},
                         {"bn", to_json(f.bn)}});
  }
  return Json{{"dataset", r.dataset}, {"parent_limit", r.parent_limit}, {"folds", r.folds}, {"seed", r.seed},
              {"bkb", to_json(r.bkb)},   {"bn", to_json(r.bn)},                 {"per_fold", folds}};
}

inline Json to_json(const MdlComparison& c) {
  Json bkb = to_json(c.bkb);
  bkb["model_bits_without_sources"] = c.bkb_model_bits_without_sources;
  bkb["data_bits_with_priors"] = c.bkb_data_bits_with_priors;
  bkb["calls"] = to_json(c.bkb_calls);
  bkb["world_entropy_total"] = c.bkb_world_entropy;
  Json bn = to_json(c.bn);
  bn["model_bits_other_variant"] = c.bn_model_bits_other_variant;
  bn["calls"] = to_json(c.bn_calls);
  bn["world_entropy_total"] = c.bn_world_entropy;
  return Json{{"dataset", c.dataset},
              {"parent_limit", c.parent_limit},
              {"rows", c.num_rows},
              {"unique_worlds", c.num_worlds},
              {"bkb", bkb},
              {"bn", bn},
              {"data_bits_difference", c.bkb.data_bits - c.bn.data_bits},
              {"calls_difference", static_cast<std::int64_t>(c.bkb_calls.unique) -
                                       static_cast<std::int64_t>(c.bn_calls.unique)}};
}

inline std::string format_table_row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string c = cells[i];
    if (c.size() < widths[i]) c = (i == 0 ? c + std::string(widths[i] - c.size(), ' ')
                                          : std::string(widths[i] - c.size(), ' ') + c);
    out += (i ? "  " : "") + c;
  }
  return out + "\n";
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string text_table(const MdlComparison& c) {
  const std::vector<std::size_t> w{12, 10, 10, 10, 10, 10};
  return format_table_row({"Dataset", "BKB MDL", "BN MDL", "BKB Calls", "BN Calls", "Calls Diff"}, w) +
         format_table_row({c.dataset, fixed(c.bkb.data_mdl_signed(), 1), fixed(c.bn.data_mdl_signed(), 1),
                           std::to_string(c.bkb_calls.unique), std::to_string(c.bn_calls.unique),
                           std::to_string(static_cast<std::int64_t>(c.bkb_calls.unique) -
                                          static_cast<std::int64_t>(c.bn_calls.unique))},
                          w);
}

inline std::string text_table(const CrossValReport& r) {
  const std::vector<std::size_t> w{12, 8, 8, 8, 8, 8, 8, 8};
  return format_table_row({"", "Prec BKB", "Prec BN", "Rec BKB", "Rec BN", "F1 BKB", "F1 BN", "Failed"}, w) +
         format_table_row({r.dataset, fixed(r.bkb.precision, 3), fixed(r.bn.precision, 3), fixed(r.bkb.recall, 3),
                           fixed(r.bn.recall, 3), fixed(r.bkb.f1, 3), fixed(r.bn.f1, 3), std::to_string(r.bkb.failed)},
                          w);
}

}  // namespace bkbforge
