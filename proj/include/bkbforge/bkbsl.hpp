#pragma once

// Structure learning end to end: one minimal-entropy fragment per unique
// world, fused into a single BKB and scored with the BKB MDL.

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/daglearn.hpp"
#include "bkbforge/fusion.hpp"
#include "bkbforge/parallel.hpp"
#include "bkbforge/prob.hpp"
#include "bkbforge/reason.hpp"
#include "bkbforge/scores.hpp"

namespace bkbforge {

enum class Backend { kExact, kGreedy };

inline std::string to_string(Backend b) { return b == Backend::kGreedy ? "greedy" : "exact"; }

inline Backend parse_backend(const std::string& s) {
  if (s == "exact") return Backend::kExact;
  if (s == "greedy") return Backend::kGreedy;
  throw InputError("unknown backend '" + s + "' (expected exact or greedy)");
}

struct LearnOptions {
  std::size_t parent_limit = 0;
  Backend backend = Backend::kExact;
  double lambda = 0.0;
  double delta = kDefaultDelta;
  std::size_t exact_limit = kDefaultExactLimit;
  GreedyOptions greedy;
  std::map<std::string, double> reliabilities;  // overrides keyed by source label
  std::size_t threads = 0;                      // 0: worker_count()
};

struct WorldScore {
  std::size_t world = 0;  // index into LearnReport::worlds
  std::string source;
  double entropy = 0.0;   // total instantiated conditional entropy of the fragment
};

struct LearnReport {
  FusedBkb model;
  std::vector<World> worlds;
  MdlBreakdown mdl;                        // model bits include source S-nodes
  double model_bits_without_sources = 0.0;
  double data_bits_with_priors = 0.0;      // -sum c log2 of the full world probability
  CallCounter calls;
  std::vector<WorldScore> per_world_scores;
  double wall_seconds = 0.0;               // not serialized
};

inline std::string world_label(const World& w) { return "row_" + std::to_string(w.first_row); }

// Probability each data world receives for the data-encoding term: the
// best inference's S-node weights with the source selection given.
inline std::vector<double> source_conditioned_probabilities(const FusedBkb& model, std::span<const World> worlds) {
  std::vector<double> q;
  q.reserve(worlds.size());
  for (const auto& w : worlds) q.push_back(source_conditioned_probability(model, w.assignment));
  return q;
}

inline double model_bits_excluding_sources(const FusedBkb& model, double log2_m, double delta) {
  double total = 0.0;
  for (const auto& q : model.bkb.snodes()) {
    if (model.is_source_variable(q.head.var)) continue;
    std::size_t data_parents = 0;
    for (const auto& p : q.parents) data_parents += model.is_source_variable(p.var) ? 0 : 1;
    total += static_cast<double>(data_parents + 1) * log2_m + delta;
  }
  return total;
}

inline LearnReport learn(const Dataset& data, const LearnOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  LearnReport report;
  report.worlds = dedupe_worlds(data);
  ProbEngine engine(data);
  const ScoreTableOptions table_opt{opt.parent_limit, opt.lambda, opt.delta};

  const std::size_t count = report.worlds.size();
  std::vector<Fragment> fragments(count);
  report.per_world_scores.resize(count);
  parallel_for(
      count,
      [&](std::size_t t) {
        const auto& w = report.worlds[t];
        const auto table = build_score_table(engine, data, w.assignment, table_opt);
        const auto dag = opt.backend == Backend::kExact ? solve_exact(table, opt.exact_limit)
                                                        : solve_greedy(table, opt.greedy);
        fragments[t] = dag_to_fragment(dag, w.assignment, data, engine, world_label(w),
                                       static_cast<double>(w.multiplicity));
        report.per_world_scores[t] = {t, world_label(w), dag.total_score};
      },
      opt.threads ? opt.threads : worker_count());

  report.model = fuse(fragments, opt.reliabilities);
  report.calls = engine.counter();

  auto& mdl = report.mdl;
  mdl.delta = opt.delta;
  mdl.log2_m = data.log2_world_space();
  mdl.n = data.num_variables();
  mdl.variant = "bkb";
  mdl.model_bits = bkb_model_bits(report.model.bkb, mdl.log2_m, opt.delta);
  report.model_bits_without_sources = model_bits_excluding_sources(report.model, mdl.log2_m, opt.delta);
  mdl.data_bits = data_bits(report.worlds, source_conditioned_probabilities(report.model, report.worlds),
                            data.variables());
  std::vector<double> full;
  for (const auto& w : report.worlds) full.push_back(world_probability(report.model, w.assignment));
  report.data_bits_with_priors = data_bits(report.worlds, full, data.variables());
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

struct DataScore {
  double data_bits = 0.0;
  double data_mdl_signed = 0.0;
  double data_bits_with_priors = 0.0;
};

// Data-encoding length of a dataset under a fused model. Every unique world
// must receive positive probability; otherwise all uncovered worlds are
// listed in the error.
inline DataScore data_mdl_of(const FusedBkb& model, const Dataset& data) {
  if (data.num_variables() != model.num_data_variables) {
    throw InputError("dataset and model disagree on the variables");
  }
  for (VarId v = 0; v < data.num_variables(); ++v) {
    if (!(data.variable(v) == model.bkb.variables()[v])) {
      throw InputError("dataset and model disagree on variable '" + data.variable(v).name + "'");
    }
  }
  const auto worlds = dedupe_worlds(data);
  const auto q = source_conditioned_probabilities(model, worlds);
  std::vector<double> full;
  std::string uncovered;
  std::size_t missing = 0;
  for (std::size_t t = 0; t < worlds.size(); ++t) {
    full.push_back(world_probability(model, worlds[t].assignment));
    if (!(q[t] > 0.0)) {
      ++missing;
      uncovered += "\n  " + describe_world(data.variables(), worlds[t].assignment);
    }
  }
  if (missing) {
    throw CannotEncodeError(std::to_string(missing) + " data world(s) have no consistent inference:" + uncovered);
  }
  DataScore s;
  s.data_bits = data_bits(worlds, q, data.variables());
  s.data_mdl_signed = s.data_bits == 0.0 ? 0.0 : -s.data_bits;
  s.data_bits_with_priors = data_bits(worlds, full, data.variables());
  return s;
}

}  // namespace bkbforge
