#pragma once

// Inference over fused BKBs: complete-world probability as the sum of all
// consistent inference weights, bounded marginals for partial evidence, and
// classification with abstention.

#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/daglearn.hpp"
#include "bkbforge/fusion.hpp"
#include "bkbforge/graph.hpp"

namespace bkbforge {

// One way of supporting a variable's instantiation in a given world: the
// observed variables its S-node depends on and the weight it contributes.
struct VariableChoice {
  VarMask parents = 0;
  double weight = 0.0;
};

// Largest strongly connected block of the candidate graph handled exactly.
inline constexpr std::size_t kMaxCyclicBlock = 16;

namespace detail {

inline std::vector<std::vector<VariableChoice>> aggregate_choices(
    const std::vector<std::vector<VariableChoice>>& choices, bool keep_max) {
  std::vector<std::vector<VariableChoice>> out(choices.size());
  for (std::size_t v = 0; v < choices.size(); ++v) {
    std::map<VarMask, double> by_mask;
    for (const auto& c : choices[v]) {
      if (c.weight <= 0.0) continue;
      auto [it, inserted] = by_mask.emplace(c.parents, c.weight);
      if (!inserted) it->second = keep_max ? std::max(it->second, c.weight) : it->second + c.weight;
    }
    for (const auto& [m, w] : by_mask) out[v].push_back({m, w});
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> candidate_blocks(const std::vector<std::vector<VariableChoice>>& choices) {
  const std::size_t n = choices.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v) {
    VarMask any = 0;
    for (const auto& c : choices[v]) any |= c.parents;
    for (VarId u : mask_to_vars(any)) adj[u].push_back(v);
  }
  return strongly_connected_components(adj);
}

// Re-expresses each member's choices over block-local bit positions,
// keeping only parents inside the block.
inline std::vector<std::vector<VariableChoice>> localize(const std::vector<std::vector<VariableChoice>>& choices,
                                                         const std::vector<std::size_t>& block) {
  std::vector<std::vector<VariableChoice>> out(block.size());
  for (std::size_t a = 0; a < block.size(); ++a) {
    for (const auto& c : choices[block[a]]) {
      VarMask local = 0;
      for (std::size_t b = 0; b < block.size(); ++b) {
        if (c.parents & (VarMask{1} << block[b])) local |= VarMask{1} << b;
      }
      out[a].push_back({local, c.weight});
    }
  }
  return out;
}

}  // namespace detail

// Sum over all acyclic selections (one choice per variable) of the product
// of chosen weights. Variables outside cycles of the candidate graph factor
// out; each cyclic block is summed exactly by inclusion-exclusion over its
// sink sets.
inline double acyclic_choice_sum(const std::vector<std::vector<VariableChoice>>& raw) {
  const auto choices = detail::aggregate_choices(raw, false);
  for (const auto& c : choices) {
    if (c.empty()) return 0.0;
  }
  double total = 1.0;
  for (const auto& block : detail::candidate_blocks(choices)) {
    if (block.size() == 1) {
      double s = 0.0;
      for (const auto& c : choices[block[0]]) s += c.weight;
      total *= s;
      continue;
    }
    if (block.size() > kMaxCyclicBlock) {
      throw CapacityError("cyclic dependency block of " + std::to_string(block.size()) +
                          " variables exceeds the exact summation limit of " + std::to_string(kMaxCyclicBlock));
    }
    const auto local = detail::localize(choices, block);
    const std::size_t s = block.size();
    const std::size_t full = std::size_t{1} << s;
    // within[v][T]: total weight of v's choices whose in-block parents lie in T.
    std::vector<std::vector<double>> within(s, std::vector<double>(full, 0.0));
    for (std::size_t v = 0; v < s; ++v) {
      for (const auto& c : local[v]) within[v][c.parents] += c.weight;
      for (std::size_t bit = 0; bit < s; ++bit) {
        for (std::size_t t = 0; t < full; ++t) {
          if (t & (std::size_t{1} << bit)) within[v][t] += within[v][t ^ (std::size_t{1} << bit)];
        }
      }
    }
    std::vector<double> g(full, 0.0);
    g[0] = 1.0;
    for (std::size_t u = 1; u < full; ++u) {
      double acc = 0.0;
      for (std::size_t sinks = u; sinks; sinks = (sinks - 1) & u) {
        const std::size_t rest = u & ~sinks;
        double term = g[rest];
        for (std::size_t m = sinks; m && term != 0.0; m &= m - 1) term *= within[std::countr_zero(m)][rest];
        acc += (std::popcount(sinks) % 2 == 1) ? term : -term;
      }
      g[u] = acc;
    }
    total *= g[full - 1];
  }
  return std::max(0.0, total);
}

// Largest product of chosen weights over acyclic selections; 0 if none.
inline double acyclic_choice_max(const std::vector<std::vector<VariableChoice>>& raw) {
  const auto choices = detail::aggregate_choices(raw, true);
  for (const auto& c : choices) {
    if (c.empty()) return 0.0;
  }
  double total = 1.0;
  for (const auto& block : detail::candidate_blocks(choices)) {
    if (block.size() == 1) {
      double best = 0.0;
      for (const auto& c : choices[block[0]]) best = std::max(best, c.weight);
      total *= best;
      continue;
    }
    if (block.size() > kDefaultExactLimit) {
      throw CapacityError("cyclic dependency block of " + std::to_string(block.size()) + " variables is too large");
    }
    const auto local = detail::localize(choices, block);
    const std::size_t s = block.size();
    const std::size_t full = std::size_t{1} << s;
    std::vector<double> best(full, 0.0);
    best[0] = 1.0;
    for (std::size_t u = 1; u < full; ++u) {
      double cur = 0.0;
      for (std::size_t m = u; m; m &= m - 1) {
        const std::size_t v = static_cast<std::size_t>(std::countr_zero(m));
        const std::size_t rest = u & ~(std::size_t{1} << v);
        double w = 0.0;
        for (const auto& c : local[v]) {
          if ((c.parents & ~rest) == 0) w = std::max(w, c.weight);
        }
        cur = std::max(cur, w * best[rest]);
      }
      best[u] = cur;
    }
    total *= best[full - 1];
  }
  return total;
}

namespace detail {

// Per-variable choices for a complete assignment of the first
// num_observed variables. Parents beyond them are hidden source I-nodes;
// their parentless prior S-node weight multiplies in when include_priors is
// set, and must be positive either way.
inline std::vector<std::vector<VariableChoice>> world_choices(const Bkb& bkb, std::size_t num_observed,
                                                              const Assignment& world, bool include_priors) {
  if (world.size() != num_observed) throw InputError("world must assign every data variable");
  std::vector<std::vector<VariableChoice>> choices(num_observed);
  const auto& snodes = bkb.snodes();
  for (VarId i = 0; i < num_observed; ++i) {
    if (world[i] >= bkb.variables()[i].arity()) throw InputError("world state out of range");
    for (auto id : bkb.supporting(INode{i, world[i]})) {
      const auto& q = snodes[id];
      VariableChoice c{0, q.weight};
      bool consistent = true;
      for (const auto& p : q.parents) {
        if (p.var < num_observed) {
          if (world[p.var] != p.state) {
            consistent = false;
            break;
          }
          c.parents |= VarMask{1} << p.var;
        } else {
          double prior = 0.0;
          for (auto pid : bkb.supporting(p)) {
            if (snodes[pid].parents.empty()) prior += snodes[pid].weight;
          }
          if (prior <= 0.0) {
            consistent = false;
            break;
          }
          if (include_priors) c.weight *= prior;
        }
      }
      if (consistent) choices[i].push_back(c);
    }
  }
  return choices;
}

}  // namespace detail

// Probability of a complete world: the sum of the weights of every
// inference that instantiates exactly this world (source choices included).
// Zero when some variable has no consistent S-node.
inline double world_probability(const FusedBkb& fused, const Assignment& world) {
  if (fused.bkb.empty()) return 0.0;
  return acyclic_choice_sum(detail::world_choices(fused.bkb, fused.num_data_variables, world, true));
}

// Same quantity for a BKB without hidden variables.
inline double world_probability(const Bkb& bkb, const Assignment& world) {
  if (bkb.empty()) return 0.0;
  return acyclic_choice_sum(detail::world_choices(bkb, bkb.num_variables(), world, true));
}

// Weight of the best inference for the world with the source selection
// taken as given: the largest product of data S-node weights over valid
// inferences, source priors excluded.
inline double source_conditioned_probability(const FusedBkb& fused, const Assignment& world) {
  if (fused.bkb.empty()) return 0.0;
  return acyclic_choice_max(detail::world_choices(fused.bkb, fused.num_data_variables, world, false));
}

using Evidence = std::map<VarId, StateId>;

inline constexpr std::size_t kDefaultMaxFreeVars = 12;
inline constexpr std::uint64_t kMaxCompletions = std::uint64_t{1} << 24;

// Sum of world probabilities over every completion of the evidence.
inline double marginal(const FusedBkb& fused, const Evidence& evidence,
                       std::size_t max_free_vars = kDefaultMaxFreeVars) {
  const std::size_t n = fused.num_data_variables;
  std::vector<VarId> free;
  for (VarId v = 0; v < n; ++v) {
    if (!evidence.contains(v)) free.push_back(v);
  }
  for (const auto& [v, s] : evidence) {
    if (v >= n || s >= fused.bkb.variables()[v].arity()) throw InputError("evidence references unknown variable/state");
  }
  if (free.size() > max_free_vars) {
    throw CapacityError(std::to_string(free.size()) + " unassigned variables exceed the marginalization limit of " +
                        std::to_string(max_free_vars) + "; use classification with complete evidence");
  }
  std::uint64_t completions = 1;
  for (VarId v : free) {
    completions *= fused.bkb.variables()[v].arity();
    if (completions > kMaxCompletions) {
      throw CapacityError("marginalization would enumerate more than " + std::to_string(kMaxCompletions) +
                          " completions");
    }
  }
  if (fused.bkb.empty()) return 0.0;
  Assignment world(n, 0);
  for (const auto& [v, s] : evidence) world[v] = s;
  double total = 0.0;
  for (std::uint64_t c = 0; c < completions; ++c) {
    std::uint64_t rest = c;
    for (auto it = free.rbegin(); it != free.rend(); ++it) {
      const auto r = fused.bkb.variables()[*it].arity();
      world[*it] = static_cast<StateId>(rest % r);
      rest /= r;
    }
    total += world_probability(fused, world);
  }
  return total;
}

struct Prediction {
  VarId target = 0;
  std::vector<double> scores;     // Q(Y = y, E) per target state
  std::optional<StateId> best;    // empty means abstain

  bool abstained() const { return !best.has_value(); }
};

// Chooses the target state maximizing a per-state joint score; ties go to
// the lowest state index, all-zero scores abstain.
inline Prediction argmax_prediction(VarId target, std::vector<double> scores) {
  Prediction p{target, std::move(scores), std::nullopt};
  double top = 0.0;
  for (std::size_t s = 0; s < p.scores.size(); ++s) {
    if (p.scores[s] > top) {
      top = p.scores[s];
      p.best = static_cast<StateId>(s);
    }
  }
  return p;
}

// evidence must assign every data variable; the target's entry is ignored.
inline Prediction classify(const FusedBkb& fused, Assignment evidence, VarId target) {
  if (target >= fused.num_data_variables) throw InputError("unknown target variable");
  const auto r = fused.bkb.variables()[target].arity();
  std::vector<double> scores(r, 0.0);
  for (StateId y = 0; y < r; ++y) {
    evidence[target] = y;
    scores[y] = world_probability(fused, evidence);
  }
  return argmax_prediction(target, std::move(scores));
}

}  // namespace bkbforge
