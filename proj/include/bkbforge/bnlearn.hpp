#pragma once

// Exact MDL Bayesian-network structure learning on the shared subset DP,
// BN -> BKB conversion, and the head-permutation improvement pass over
// causal rule sets.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/daglearn.hpp"
#include "bkbforge/prob.hpp"
#include "bkbforge/reason.hpp"
#include "bkbforge/scores.hpp"

namespace bkbforge {

struct CptRow {
  std::vector<std::uint64_t> counts;  // per state
  std::uint64_t total = 0;            // rows with this parent configuration
};

struct BayesNet {
  std::vector<Variable> variables;
  std::vector<VarMask> parents;
  // Per variable: parent configuration index -> counts. Only configurations
  // seen in the training data are stored.
  std::vector<std::map<std::uint64_t, CptRow>> cpts;

  std::size_t num_variables() const { return variables.size(); }

  // Mixed-radix index of the parent configuration, parents in id order,
  // the last parent varying fastest.
  std::uint64_t config_index(VarId v, const Assignment& world) const {
    std::uint64_t idx = 0;
    for (VarId p : mask_to_vars(parents[v])) idx = idx * variables[p].arity() + world[p];
    return idx;
  }

  // p(x_v | parents) from counts; empty when the configuration is unseen.
  std::optional<double> conditional(VarId v, const Assignment& world) const {
    auto it = cpts[v].find(config_index(v, world));
    if (it == cpts[v].end() || it->second.total == 0) return std::nullopt;
    return static_cast<double>(it->second.counts[world[v]]) / static_cast<double>(it->second.total);
  }

  // Product of CPT entries; 0 when a needed configuration is unseen.
  double joint(const Assignment& world) const {
    double p = 1.0;
    for (VarId v = 0; v < num_variables(); ++v) {
      auto c = conditional(v, world);
      if (!c) return 0.0;
      p *= *c;
    }
    return p;
  }
};

struct BnLearnOptions {
  std::size_t parent_limit = 0;
  BnVariant variant = BnVariant::kLamBacchus;
  double delta = kDefaultDelta;
  std::size_t exact_limit = kDefaultExactLimit;
};

// Family score: N * H(X_i | S) plus the variant's per-family penalty.
inline double bn_family_score(const ProbEngine& engine, VarId v, VarMask parents, std::size_t n,
                              const BnLearnOptions& opt) {
  const auto pv = mask_to_vars(parents);
  const double data = static_cast<double>(engine.num_rows()) * rv_cond_entropy(engine, v, pv);
  double c = 1.0;
  for (VarId p : pv) c *= static_cast<double>(engine.arity(p));
  const double r = static_cast<double>(engine.arity(v));
  if (opt.variant == BnVariant::kSuzuki) {
    return data + (r - 1.0) * c / 2.0 * std::log2(static_cast<double>(engine.num_rows()));
  }
  const double log2_n = n > 1 ? std::log2(static_cast<double>(n)) : 0.0;
  return data + static_cast<double>(pv.size()) * log2_n + opt.delta * (r - 1.0) * c;
}

inline LocalScoreTable build_bn_score_table(const ProbEngine& engine, const BnLearnOptions& opt) {
  const std::size_t n = engine.num_variables();
  LocalScoreTable table;
  table.num_variables = n;
  table.parent_limit = opt.parent_limit;
  table.candidates.resize(n);
  for (VarId v = 0; v < n; ++v) {
    for (VarMask m : candidate_parent_sets(n, v, opt.parent_limit)) {
      table.candidates[v].push_back({m, bn_family_score(engine, v, m, n, opt)});
    }
  }
  table.sort_candidates();
  return table;
}

// Counts every CPT entry; queries go through the engine so they are
// included in the call accounting.
inline BayesNet fit_bn(const ProbEngine& engine, const std::vector<Variable>& vars, std::vector<VarMask> parents) {
  BayesNet bn{vars, std::move(parents), {}};
  bn.cpts.resize(vars.size());
  for (VarId v = 0; v < vars.size(); ++v) {
    const auto pv = mask_to_vars(bn.parents[v]);
    const auto ar = arities_of(engine, pv);
    std::uint64_t idx = 0;
    for_each_configuration(pv, ar, [&](std::span<const INode> config) {
      const Query pi(std::vector<INode>(config.begin(), config.end()));
      const auto total = engine.joint(pi).count;
      if (total > 0) {
        CptRow row{std::vector<std::uint64_t>(vars[v].arity(), 0), total};
        for (StateId s = 0; s < vars[v].arity(); ++s) row.counts[s] = engine.joint(pi.with({v, s})).count;
        bn.cpts[v].emplace(idx, std::move(row));
      }
      ++idx;
    });
  }
  return bn;
}

struct BnModel {
  BayesNet bn;
  MdlBreakdown mdl;
  CallCounter calls;
};

inline std::vector<std::size_t> arities_of(const std::vector<Variable>& vars) {
  std::vector<std::size_t> out;
  for (const auto& v : vars) out.push_back(v.arity());
  return out;
}

inline MdlBreakdown bn_mdl(const BayesNet& bn, const Dataset& data, BnVariant variant, double delta = kDefaultDelta) {
  MdlBreakdown mdl;
  mdl.delta = delta;
  mdl.log2_m = data.log2_world_space();
  mdl.n = data.num_variables();
  mdl.variant = to_string(variant);
  const auto ar = arities_of(bn.variables);
  mdl.model_bits = bn_model_bits(bn.parents, ar, data.num_rows(), variant, delta);
  const auto worlds = dedupe_worlds(data);
  std::vector<double> q;
  for (const auto& w : worlds) q.push_back(bn.joint(w.assignment));
  mdl.data_bits = data_bits(worlds, q, data.variables());
  return mdl;
}

// Globally MDL-optimal BN under the parent limit; uses its own engine so
// call counts are not shared with other learners.
inline BnModel learn_bn(const Dataset& data, const BnLearnOptions& opt) {
  ProbEngine engine(data);
  const auto table = build_bn_score_table(engine, opt);
  const auto dag = solve_exact(table, opt.exact_limit);
  BnModel out{fit_bn(engine, data.variables(), dag.parent_choice), {}, {}};
  out.mdl = bn_mdl(out.bn, data, opt.variant, opt.delta);
  out.calls = engine.counter();
  return out;
}

// One S-node per CPT entry of every seen parent configuration, including
// zero-weight entries.
inline Bkb bn_to_bkb(const BayesNet& bn) {
  Bkb bkb(bn.variables);
  for (VarId v = 0; v < bn.num_variables(); ++v) {
    const auto pv = mask_to_vars(bn.parents[v]);
    for (const auto& [idx, row] : bn.cpts[v]) {
      std::vector<INode> parents(pv.size());
      std::uint64_t rest = idx;
      for (std::size_t j = pv.size(); j-- > 0;) {
        const auto r = bn.variables[pv[j]].arity();
        parents[j] = {pv[j], static_cast<StateId>(rest % r)};
        rest /= r;
      }
      for (StateId s = 0; s < bn.variables[v].arity(); ++s) {
        const double w = static_cast<double>(row.counts[s]) / static_cast<double>(row.total);
        bkb.add(SNode{{v, s}, parents, w});
      }
    }
  }
  bkb.sort_canonical();
  return bkb;
}

// CPT product per target state; abstains when every state needs an unseen
// parent configuration.
inline Prediction bn_classify(const BayesNet& bn, Assignment evidence, VarId target) {
  if (target >= bn.num_variables()) throw InputError("unknown target variable");
  std::vector<double> scores(bn.variables[target].arity(), 0.0);
  for (StateId y = 0; y < scores.size(); ++y) {
    evidence[target] = y;
    scores[y] = bn.joint(evidence);
  }
  return argmax_prediction(target, std::move(scores));
}

// Instantiated conditional entropy of the world under the BN structure.
inline double bn_world_entropy(const BayesNet& bn, const ProbEngine& engine, const Assignment& world) {
  double total = 0.0;
  for (VarId v = 0; v < bn.num_variables(); ++v) {
    std::vector<INode> parents;
    for (VarId p : mask_to_vars(bn.parents[v])) parents.push_back({p, world[p]});
    total += inst_cond_entropy(engine, {v, world[v]}, parents);
  }
  return total;
}

struct CausalRuleSet {
  VarId variable = 0;
  std::vector<std::size_t> snodes;
};

inline std::vector<CausalRuleSet> causal_rule_sets(const Bkb& bkb) {
  std::vector<CausalRuleSet> out(bkb.num_variables());
  for (VarId v = 0; v < out.size(); ++v) out[v].variable = v;
  for (std::size_t i = 0; i < bkb.size(); ++i) out[bkb.snodes()[i].head.var].snodes.push_back(i);
  return out;
}

inline double snode_mutual_info(const ProbEngine& engine, const SNode& q) {
  return inst_mutual_info(engine, q.head, q.parents);
}

// Total weight: for every unique world, the instantiated mutual
// information of each S-node whose I-nodes all hold in that world.
inline double mutual_info_weight(const Bkb& bkb, const ProbEngine& engine, std::span<const World> worlds) {
  double total = 0.0;
  for (const auto& w : worlds) {
    for (const auto& q : bkb.snodes()) {
      if (w.assignment[q.head.var] != q.head.state) continue;
      bool holds = true;
      for (const auto& p : q.parents) holds = holds && w.assignment[p.var] == p.state;
      if (holds) total += snode_mutual_info(engine, q);
    }
  }
  return total;
}

// For each S-node, tries every member of its I-node set as the head and
// keeps the orientation with the largest mutual-information summand
// (the original on ties). Reoriented S-nodes get p(head | rest) from
// counts and thereby move to the head's causal rule set.
inline Bkb crs_improve(const Bkb& bkb, const ProbEngine& engine) {
  Bkb out(bkb.variables());
  for (const auto& q : bkb.snodes()) {
    std::vector<INode> members = q.parents;
    members.push_back(q.head);
    std::sort(members.begin(), members.end());
    double best = snode_mutual_info(engine, q);
    std::optional<SNode> chosen;
    for (std::size_t h = 0; h < members.size(); ++h) {
      if (members[h] == q.head) continue;
      std::vector<INode> rest;
      for (std::size_t j = 0; j < members.size(); ++j) {
        if (j != h) rest.push_back(members[j]);
      }
      const double mi = inst_mutual_info(engine, members[h], rest);
      if (mi > best + 1e-12 * std::max(1.0, std::abs(best))) {
        best = mi;
        const Query pi(rest);
        const auto parent = engine.joint(pi);
        const double w = parent.count == 0 ? 0.0
                                           : static_cast<double>(engine.joint(pi.with(members[h])).count) /
                                                 static_cast<double>(parent.count);
        chosen = SNode{members[h], rest, w};
      }
    }
    out.add(chosen ? *chosen : q);
  }
  out.sort_canonical();
  return out;
}

}  // namespace bkbforge
