#pragma once

// Empirical joint probabilities over a dataset, memoized by canonical query
// with unique-call accounting, and the instantiated information quantities
// built on top of them.

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bkbforge/core.hpp"

namespace bkbforge {

// A partial assignment in canonical form: sorted by variable, one state per
// variable.
class Query {
 public:
  Query() = default;
  explicit Query(std::vector<INode> inodes) : inodes_(std::move(inodes)) {
    std::sort(inodes_.begin(), inodes_.end());
    inodes_.erase(std::unique(inodes_.begin(), inodes_.end()), inodes_.end());
    for (std::size_t i = 1; i < inodes_.size(); ++i) {
      if (inodes_[i - 1].var == inodes_[i].var) {
        throw InputError("query assigns two states to variable " + std::to_string(inodes_[i].var));
      }
    }
  }

  std::span<const INode> inodes() const { return inodes_; }
  bool empty() const { return inodes_.empty(); }

  Query with(INode extra) const {
    auto v = inodes_;
    v.push_back(extra);
    return Query(std::move(v));
  }

  std::string key() const {
    std::string k;
    k.reserve(inodes_.size() * 8);
    for (const auto& n : inodes_) {
      k.append(reinterpret_cast<const char*>(&n.var), sizeof(n.var));
      k.append(reinterpret_cast<const char*>(&n.state), sizeof(n.state));
    }
    return k;
  }

 private:
  std::vector<INode> inodes_;
};

// count/total, optionally Laplace-smoothed over the query's cells.
struct Probability {
  std::uint64_t count = 0;
  std::uint64_t total = 1;
  double alpha = 0.0;
  double cells = 1.0;

  double value() const {
    return (static_cast<double>(count) + alpha) / (static_cast<double>(total) + alpha * cells);
  }
  bool is_zero() const { return count == 0 && alpha == 0.0; }
};

struct CallCounter {
  std::uint64_t unique = 0;
  std::uint64_t total = 0;
};

class ProbEngine {
 public:
  explicit ProbEngine(const Dataset& data, double laplace_alpha = 0.0)
      : rows_(data.num_rows()), alpha_(laplace_alpha) {
    if (laplace_alpha < 0.0) throw InputError("Laplace alpha must be non-negative");
    const std::size_t words = (rows_ + 63) / 64;
    arity_.reserve(data.num_variables());
    offsets_.reserve(data.num_variables());
    std::size_t total = 0;
    for (const auto& v : data.variables()) {
      offsets_.push_back(total);
      arity_.push_back(v.arity());
      total += v.arity();
    }
    bits_.assign(total * words, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto& row = data.row(r);
      for (std::size_t i = 0; i < row.size(); ++i) {
        bits_[(offsets_[i] + row[i]) * words + r / 64] |= std::uint64_t{1} << (r % 64);
      }
    }
  }

  ProbEngine(const ProbEngine&) = delete;
  ProbEngine& operator=(const ProbEngine&) = delete;

  std::size_t num_rows() const { return rows_; }
  std::size_t num_variables() const { return arity_.size(); }
  std::size_t arity(VarId v) const { return arity_.at(v); }

  Probability joint(const Query& q) const {
    for (const auto& n : q.inodes()) {
      if (n.var >= arity_.size() || n.state >= arity_[n.var]) {
        throw InputError("query references unknown variable/state (" + std::to_string(n.var) + "," +
                         std::to_string(n.state) + ")");
      }
    }
    total_.fetch_add(1, std::memory_order_relaxed);
    const std::string k = q.key();
    std::uint64_t c = 0;
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(k);
      if (it != memo_.end()) return make(it->second, q);
    }
    {
      std::unique_lock lock(mu_);
      auto it = memo_.find(k);
      if (it != memo_.end()) return make(it->second, q);
      c = count(q);
      memo_.emplace(k, c);
    }
    return make(c, q);
  }

  Probability joint(std::vector<INode> inodes) const { return joint(Query(std::move(inodes))); }

  CallCounter counter() const {
    std::shared_lock lock(mu_);
    return {static_cast<std::uint64_t>(memo_.size()), total_.load()};
  }

  // Counts rows consistent with the query without touching the memo.
  std::uint64_t count_uncached(const Query& q) const { return count(q); }

 private:
  Probability make(std::uint64_t c, const Query& q) const {
    double cells = 1.0;
    for (const auto& n : q.inodes()) cells *= static_cast<double>(arity_[n.var]);
    return {c, rows_, alpha_, cells};
  }

  std::uint64_t count(const Query& q) const {
    if (q.empty()) return rows_;
    const std::size_t words = (rows_ + 63) / 64;
    const auto in = q.inodes();
    std::uint64_t c = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t acc = ~std::uint64_t{0};
      for (const auto& n : in) acc &= bits_[(offsets_[n.var] + n.state) * words + w];
      c += static_cast<std::uint64_t>(std::popcount(acc));
    }
    return c;
  }

  std::size_t rows_;
  double alpha_;
  std::vector<std::size_t> arity_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint64_t> bits_;

  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, std::uint64_t> memo_;
  mutable std::atomic<std::uint64_t> total_{0};
};

struct LocalScoreInputs {
  double joint = 0.0;             // p(x, pi)
  double parent_marginal = 0.0;   // p(pi)
  double head_marginal = 0.0;     // p(x)
};

inline LocalScoreInputs local_inputs(const ProbEngine& engine, INode head, std::span<const INode> parents) {
  Query pi(std::vector<INode>(parents.begin(), parents.end()));
  return {engine.joint(pi.with(head)).value(), engine.joint(pi).value(), engine.joint(Query({head})).value()};
}

// -p(x,pi) * log2(p(x,pi)/p(pi)); nonnegative, 0 when p(x,pi) is 0 or
// equals p(pi). Only p(x,pi) and p(pi) are queried.
inline double inst_cond_entropy(const ProbEngine& engine, INode head, std::span<const INode> parents) {
  for (const auto& p : parents) {
    if (p.var == head.var) throw InputError("head variable appears among parents");
  }
  Query pi(std::vector<INode>(parents.begin(), parents.end()));
  const Probability joint = engine.joint(pi.with(head));
  if (joint.is_zero()) return 0.0;
  const Probability parent = engine.joint(pi);
  if (joint.alpha == 0.0 && joint.count == parent.count) return 0.0;
  const double pj = joint.value();
  return -pj * std::log2(pj / parent.value());
}

// p(x,pi) * log2(p(x,pi) / (p(x) p(pi))); 0 when any factor is 0.
inline double inst_mutual_info(const ProbEngine& engine, INode head, std::span<const INode> parents) {
  for (const auto& p : parents) {
    if (p.var == head.var) throw InputError("head variable appears among parents");
  }
  Query pi(std::vector<INode>(parents.begin(), parents.end()));
  const Probability joint = engine.joint(pi.with(head));
  if (joint.is_zero()) return 0.0;
  const Probability parent = engine.joint(pi);
  const Probability marginal = engine.joint(Query({head}));
  if (parent.is_zero() || marginal.is_zero()) return 0.0;
  const double pj = joint.value();
  return pj * std::log2(pj / (marginal.value() * parent.value()));
}

// Calls fn(config) for every joint instantiation of the given variables,
// last variable varying fastest.
template <typename Fn>
void for_each_configuration(std::span<const VarId> vars, std::span<const std::size_t> arities, Fn&& fn) {
  std::vector<INode> config(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) config[i] = {vars[i], 0};
  while (true) {
    fn(std::span<const INode>(config));
    std::size_t i = vars.size();
    while (i > 0) {
      --i;
      if (++config[i].state < arities[i]) break;
      config[i].state = 0;
      if (i == 0) return;
    }
    if (vars.empty()) return;
  }
}

inline std::vector<std::size_t> arities_of(const ProbEngine& engine, std::span<const VarId> vars) {
  std::vector<std::size_t> out;
  out.reserve(vars.size());
  for (auto v : vars) out.push_back(engine.arity(v));
  return out;
}

// Random-variable mutual information I(X; Pi) as the sum of the
// instantiated terms over all joint instantiations.
inline double rv_mutual_info(const ProbEngine& engine, VarId var, std::span<const VarId> parent_vars) {
  for (auto p : parent_vars) {
    if (p == var) throw InputError("variable appears among its own parents");
  }
  if (parent_vars.empty()) return 0.0;
  std::vector<VarId> sorted(parent_vars.begin(), parent_vars.end());
  std::sort(sorted.begin(), sorted.end());
  const auto ar = arities_of(engine, sorted);
  double total = 0.0;
  for_each_configuration(sorted, ar, [&](std::span<const INode> config) {
    for (StateId s = 0; s < engine.arity(var); ++s) {
      total += inst_mutual_info(engine, INode{var, s}, config);
    }
  });
  return total;
}

// Sum of instantiated entropies -p(x) log2 p(x) over the states of var.
inline double rv_entropy(const ProbEngine& engine, VarId var) {
  double total = 0.0;
  for (StateId s = 0; s < engine.arity(var); ++s) total += inst_cond_entropy(engine, INode{var, s}, {});
  return total;
}

// Sum of instantiated conditional entropies over all joint instantiations.
inline double rv_cond_entropy(const ProbEngine& engine, VarId var, std::span<const VarId> parent_vars) {
  std::vector<VarId> sorted(parent_vars.begin(), parent_vars.end());
  std::sort(sorted.begin(), sorted.end());
  const auto ar = arities_of(engine, sorted);
  double total = 0.0;
  for_each_configuration(sorted, ar, [&](std::span<const INode> config) {
    for (StateId s = 0; s < engine.arity(var); ++s) {
      total += inst_cond_entropy(engine, INode{var, s}, config);
    }
  });
  return total;
}

}  // namespace bkbforge
