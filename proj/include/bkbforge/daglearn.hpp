#pragma once

// Per-world minimal-entropy inference graphs: local score tables over
// candidate parent sets, an exact subset-DP DAG solver, an order-based
// greedy fallback, and conversion of a solved DAG into a fragment.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bkbforge/core.hpp"
#include "bkbforge/error.hpp"
#include "bkbforge/prob.hpp"

namespace bkbforge {

using VarMask = std::uint64_t;

inline std::vector<VarId> mask_to_vars(VarMask m) {
  std::vector<VarId> out;
  while (m) {
    out.push_back(static_cast<VarId>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

inline VarMask vars_to_mask(std::span<const VarId> vars) {
  VarMask m = 0;
  for (auto v : vars) m |= VarMask{1} << v;
  return m;
}

// Lexicographic order of the sorted member lists.
inline bool mask_lex_less(VarMask a, VarMask b) {
  while (a && b) {
    const int la = std::countr_zero(a), lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

struct Candidate {
  VarMask parents = 0;
  double score = 0.0;
};

// Candidates sort by score, then fewer parents, then lexicographic order.
inline bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score < b.score;
  const int pa = std::popcount(a.parents), pb = std::popcount(b.parents);
  if (pa != pb) return pa < pb;
  return mask_lex_less(a.parents, b.parents);
}

struct LocalScoreTable {
  std::size_t num_variables = 0;
  std::size_t parent_limit = 0;
  std::vector<std::vector<Candidate>> candidates;  // per variable, sorted by candidate_less
  std::optional<Assignment> world;                 // set for instantiated tables

  void sort_candidates() {
    for (auto& c : candidates) std::sort(c.begin(), c.end(), candidate_less);
  }

  // Best candidate for v whose parents all lie in allowed; the empty set is
  // always a candidate so this never fails on a well-formed table.
  const Candidate& best_within(VarId v, VarMask allowed) const {
    for (const auto& c : candidates[v]) {
      if ((c.parents & ~allowed) == 0) return c;
    }
    throw InputError("score table for variable " + std::to_string(v) + " lacks the empty parent set");
  }

  std::optional<double> score_of(VarId v, VarMask parents) const {
    for (const auto& c : candidates[v]) {
      if (c.parents == parents) return c.score;
    }
    return std::nullopt;
  }
};

struct InferenceDag {
  std::vector<VarMask> parent_choice;
  double total_score = 0.0;
};

// All subsets of others with at most k members, by size then lexicographic.
inline std::vector<VarMask> candidate_parent_sets(std::size_t n, VarId self, std::size_t k) {
  std::vector<VarId> others;
  for (VarId j = 0; j < n; ++j) {
    if (j != self) others.push_back(j);
  }
  std::vector<VarMask> out{0};
  const std::size_t limit = std::min(k, others.size());
  for (std::size_t size = 1; size <= limit; ++size) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      VarMask m = 0;
      for (auto i : idx) m |= VarMask{1} << others[i];
      out.push_back(m);
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == others.size() - size + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

struct ScoreTableOptions {
  std::size_t parent_limit = 0;
  double lambda = 0.0;  // weight of the structure penalty
  double delta = 32.0;  // bits per stored probability
};

// (|S|+1) log2(m) + delta, the per-S-node model cost.
inline double structure_bits(std::size_t parent_count, double log2_m, double delta) {
  return static_cast<double>(parent_count + 1) * log2_m + delta;
}

// Instantiated local scores for one world: for each variable and each
// candidate parent set S with |S| <= k, the instantiated conditional
// entropy of x_i given the world's instantiation of S, plus the optional
// structure penalty.
inline LocalScoreTable build_score_table(const ProbEngine& engine, const Dataset& data, const Assignment& world,
                                         const ScoreTableOptions& opt) {
  const std::size_t n = data.num_variables();
  if (n > 64) throw CapacityError("score tables support at most 64 variables");
  if (world.size() != n) throw InputError("world does not cover the dataset variables");
  const double log2_m = data.log2_world_space();
  LocalScoreTable table;
  table.num_variables = n;
  table.parent_limit = opt.parent_limit;
  table.world = world;
  table.candidates.resize(n);
  for (VarId i = 0; i < n; ++i) {
    const INode head{i, world[i]};
    for (VarMask m : candidate_parent_sets(n, i, opt.parent_limit)) {
      std::vector<INode> parents;
      for (VarId j : mask_to_vars(m)) parents.push_back({j, world[j]});
      double score = inst_cond_entropy(engine, head, parents);
      if (opt.lambda != 0.0) {
        score += opt.lambda * structure_bits(parents.size(), log2_m, opt.delta);
      }
      table.candidates[i].push_back({m, score});
    }
  }
  table.sort_candidates();
  return table;
}

// Drops candidates that score no better than one of their strict subsets.
// Such supersets can never be needed by an optimal DAG.
inline LocalScoreTable prune_dominated(LocalScoreTable table) {
  for (auto& list : table.candidates) {
    std::vector<Candidate> kept;
    for (const auto& c : list) {
      bool dominated = false;
      for (const auto& other : list) {
        if (other.parents != c.parents && (other.parents & ~c.parents) == 0 && other.score <= c.score) {
          dominated = true;
          break;
        }
      }
      if (!dominated) kept.push_back(c);
    }
    list = std::move(kept);
  }
  return table;
}

inline double dag_score(const LocalScoreTable& table, std::span<const VarMask> parents) {
  double total = 0.0;
  for (VarId v = 0; v < table.num_variables; ++v) {
    auto s = table.score_of(v, parents[v]);
    if (!s) throw InputError("parent set is not a candidate in the score table");
    total += *s;
  }
  return total;
}

inline bool is_acyclic(std::span<const VarMask> parents) {
  const std::size_t n = parents.size();
  VarMask placed = 0;
  for (std::size_t round = 0; round < n; ++round) {
    bool progress = false;
    for (std::size_t v = 0; v < n; ++v) {
      const VarMask bit = VarMask{1} << v;
      if (!(placed & bit) && (parents[v] & ~placed) == 0) {
        placed |= bit;
        progress = true;
      }
    }
    if (!progress) break;
  }
  return std::popcount(placed) == static_cast<int>(n);
}

inline constexpr std::size_t kDefaultExactLimit = 25;

// Exact minimum-score DAG by dynamic programming over variable subsets:
// best(U) = min over sinks v in U of best_within(v, U \ {v}) + best(U \ {v}).
// Near-ties keep the smaller sink index.
inline InferenceDag solve_exact(const LocalScoreTable& table, std::size_t exact_limit = kDefaultExactLimit) {
  const std::size_t n = table.num_variables;
  if (n > exact_limit || n >= 63) {
    throw CapacityError("exact DAG solver limited to " + std::to_string(exact_limit) + " variables (got " +
                        std::to_string(n) + "); use the greedy backend");
  }
  const std::size_t full = (std::size_t{1} << n);
  std::vector<double> best(full, std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> sink(full, 0);
  best[0] = 0.0;
  for (std::size_t u = 1; u < full; ++u) {
    double cur = std::numeric_limits<double>::infinity();
    std::uint8_t cur_sink = 0;
    for (VarMask rest = u; rest; rest &= rest - 1) {
      const auto v = static_cast<VarId>(std::countr_zero(rest));
      const VarMask without = u & ~(VarMask{1} << v);
      const double cand = table.best_within(v, without).score + best[without];
      const bool better = std::isinf(cur) ? cand < cur : cand < cur - 1e-12 * std::max(1.0, std::abs(cur));
      if (better) {
        cur = cand;
        cur_sink = static_cast<std::uint8_t>(v);
      }
    }
    best[u] = cur;
    sink[u] = cur_sink;
  }
  InferenceDag dag;
  dag.parent_choice.assign(n, 0);
  VarMask u = full - 1;
  while (u) {
    const VarId v = sink[u];
    const VarMask without = u & ~(VarMask{1} << v);
    const auto& c = table.best_within(v, without);
    dag.parent_choice[v] = c.parents;
    dag.total_score += c.score;
    u = without;
  }
  // Re-sum in variable order so the total equals the sum of table scores.
  dag.total_score = dag_score(table, dag.parent_choice);
  return dag;
}

struct GreedyOptions {
  std::uint64_t seed = 0;
  std::size_t restarts = 4;
};

// Order-based hill climbing: each order induces its best DAG (every
// variable takes its best candidate among predecessors); insertion moves
// are applied while they improve the total. Restart 0 uses the identity
// order, later restarts use seeded shuffles.
inline InferenceDag solve_greedy(const LocalScoreTable& table, const GreedyOptions& opt = {}) {
  const std::size_t n = table.num_variables;
  auto evaluate = [&](const std::vector<VarId>& order) {
    double total = 0.0;
    VarMask before = 0;
    for (VarId v : order) {
      total += table.best_within(v, before).score;
      before |= VarMask{1} << v;
    }
    return total;
  };

  std::mt19937_64 rng(opt.seed);
  std::vector<VarId> best_order(n);
  std::iota(best_order.begin(), best_order.end(), 0);
  double best_total = evaluate(best_order);

  for (std::size_t r = 0; r <= opt.restarts; ++r) {
    std::vector<VarId> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (r > 0) {
      for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
      }
    }
    double total = evaluate(order);
    bool improved = true;
    while (improved) {
      improved = false;
      std::vector<VarId> move_best;
      double move_total = total;
      for (std::size_t from = 0; from < n; ++from) {
        for (std::size_t to = 0; to < n; ++to) {
          if (to == from) continue;
          auto trial = order;
          const VarId v = trial[from];
          trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(from));
          trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(to), v);
          const double t = evaluate(trial);
          if (t < move_total - 1e-12 * std::max(1.0, std::abs(move_total))) {
            move_total = t;
            move_best = std::move(trial);
          }
        }
      }
      if (!move_best.empty()) {
        order = std::move(move_best);
        total = move_total;
        improved = true;
      }
    }
    if (total < best_total - 1e-12 * std::max(1.0, std::abs(best_total))) {
      best_total = total;
      best_order = order;
    }
  }

  InferenceDag dag;
  dag.parent_choice.assign(n, 0);
  VarMask before = 0;
  for (VarId v : best_order) {
    dag.parent_choice[v] = table.best_within(v, before).parents;
    before |= VarMask{1} << v;
  }
  dag.total_score = dag_score(table, dag.parent_choice);
  return dag;
}

// Turns a solved DAG for one world into a fragment: one S-node per
// variable, head x_i, parents instantiated by the world, weight
// p(x_i | pi_i) from raw counts.
inline Fragment dag_to_fragment(const InferenceDag& dag, const Assignment& world, const Dataset& data,
                                const ProbEngine& engine, std::string source, double reliability) {
  const std::size_t n = data.num_variables();
  if (dag.parent_choice.size() != n || world.size() != n) {
    throw InputError("DAG and world must cover the dataset variables");
  }
  if (!is_acyclic(dag.parent_choice)) throw InputError("parent choice is cyclic");
  Bkb bkb(data.variables());
  for (VarId i = 0; i < n; ++i) {
    std::vector<INode> parents;
    for (VarId j : mask_to_vars(dag.parent_choice[i])) parents.push_back({j, world[j]});
    const INode head{i, world[i]};
    Query pi(parents);
    const auto joint = engine.joint(pi.with(head));
    const auto marginal = engine.joint(pi);
    if (joint.count == 0 && joint.alpha == 0.0) {
      throw InputError("world is not supported by the dataset counts");
    }
    const double w = joint.alpha == 0.0
                         ? static_cast<double>(joint.count) / static_cast<double>(marginal.count)
                         : joint.value() / marginal.value();
    bkb.add(SNode{head, std::move(parents), std::min(1.0, w)});
  }
  Fragment f{std::move(bkb), std::move(source), reliability};
  validate_fragment(f);
  return f;
}

}  // namespace bkbforge
