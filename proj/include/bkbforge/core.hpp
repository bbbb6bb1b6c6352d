#pragma once

// Domain types: datasets, worlds, I-nodes, S-nodes, BKBs and fragments,
// plus validators for the BKB mutual-exclusion properties and for
// inference subgraphs.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bkbforge/error.hpp"

namespace bkbforge {

using VarId = std::uint32_t;
using StateId = std::uint32_t;

// Tolerance for property-3 weight sums and source-prior normalization.
inline constexpr double kWeightEpsilon = 1e-9;

struct Variable {
  std::string name;
  std::vector<std::string> states;

  std::size_t arity() const { return states.size(); }

  std::optional<StateId> state_index(std::string_view label) const {
    for (std::size_t k = 0; k < states.size(); ++k) {
      if (states[k] == label) return static_cast<StateId>(k);
    }
    return std::nullopt;
  }

  friend bool operator==(const Variable&, const Variable&) = default;
};

inline void validate_variable(const Variable& v) {
  if (v.states.empty()) throw InputError("variable '" + v.name + "' has no states");
  std::vector<std::string> sorted = v.states;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("variable '" + v.name + "' has duplicate state labels");
  }
}

// One state index per variable, dense.
using Assignment = std::vector<StateId>;

class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<Variable> variables, std::vector<Assignment> rows)
      : variables_(std::move(variables)), rows_(std::move(rows)) {
    if (variables_.empty()) throw InputError("dataset has no variables");
    for (const auto& v : variables_) validate_variable(v);
    if (rows_.empty()) throw InputError("dataset has no rows");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      if (row.size() != variables_.size()) {
        throw InputError("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                         " values, expected " + std::to_string(variables_.size()));
      }
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] >= variables_[i].arity()) {
          throw InputError("row " + std::to_string(r) + ": state " + std::to_string(row[i]) +
                           " out of range for variable '" + variables_[i].name + "'");
        }
      }
    }
  }

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_rows() const { return rows_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(VarId i) const { return variables_.at(i); }
  const std::vector<Assignment>& rows() const { return rows_; }
  const Assignment& row(std::size_t r) const { return rows_.at(r); }

  std::optional<VarId> variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
      if (variables_[i].name == name) return static_cast<VarId>(i);
    }
    return std::nullopt;
  }

  // log2 of m = prod r_i, the number of complete worlds.
  double log2_world_space() const {
    double bits = 0.0;
    for (const auto& v : variables_) bits += std::log2(static_cast<double>(v.arity()));
    return bits;
  }

  std::size_t total_inodes() const {
    std::size_t total = 0;
    for (const auto& v : variables_) total += v.arity();
    return total;
  }

  Dataset subset(std::span<const std::size_t> row_indices) const {
    std::vector<Assignment> picked;
    picked.reserve(row_indices.size());
    for (auto r : row_indices) picked.push_back(rows_.at(r));
    return Dataset(variables_, std::move(picked));
  }

 private:
  std::vector<Variable> variables_;
  std::vector<Assignment> rows_;
};

struct World {
  Assignment assignment;
  std::uint64_t multiplicity = 0;
  std::size_t first_row = 0;
};

// Unique rows with multiplicities, in order of first appearance.
inline std::vector<World> dedupe_worlds(const Dataset& dataset) {
  std::vector<World> worlds;
  std::map<Assignment, std::size_t> seen;
  for (std::size_t r = 0; r < dataset.num_rows(); ++r) {
    const auto& row = dataset.row(r);
    auto [it, inserted] = seen.emplace(row, worlds.size());
    if (inserted) {
      worlds.push_back(World{row, 1, r});
    } else {
      ++worlds[it->second].multiplicity;
    }
  }
  return worlds;
}

struct INode {
  VarId var = 0;
  StateId state = 0;

  friend auto operator<=>(const INode&, const INode&) = default;
};

// Two I-node sets are mutex when they disagree on the state of some
// shared variable. Both inputs must be sorted by variable.
inline bool mutex(std::span<const INode> a, std::span<const INode> b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].var < b[j].var) {
      ++i;
    } else if (b[j].var < a[i].var) {
      ++j;
    } else {
      if (a[i].state != b[j].state) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

struct SNode {
  INode head;
  std::vector<INode> parents;  // sorted by variable, one per variable
  double weight = 0.0;

  friend bool operator==(const SNode&, const SNode&) = default;
};

// Canonical order on S-nodes: head, then parents, then weight.
inline bool snode_less(const SNode& a, const SNode& b) {
  if (a.head != b.head) return a.head < b.head;
  if (a.parents != b.parents) return a.parents < b.parents;
  return a.weight < b.weight;
}

// Builds an S-node, sorting parents and enforcing the local invariants:
// at most one instantiation per variable, head variable not among the
// parents, weight in [0,1].
inline SNode make_snode(INode head, std::vector<INode> parents, double weight) {
  std::sort(parents.begin(), parents.end());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (parents[i].var == head.var) {
      throw InputError("S-node head variable " + std::to_string(head.var) + " appears among its parents");
    }
    if (i > 0 && parents[i - 1].var == parents[i].var) {
      throw InputError("S-node has two instantiations of variable " + std::to_string(parents[i].var));
    }
  }
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw InputError("S-node weight " + std::to_string(weight) + " outside [0,1]");
  }
  return SNode{head, std::move(parents), weight};
}

class Bkb {
 public:
  Bkb() = default;
  explicit Bkb(std::vector<Variable> variables) : variables_(std::move(variables)) {
    for (const auto& v : variables_) validate_variable(v);
  }

  const std::vector<Variable>& variables() const { return variables_; }
  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<SNode>& snodes() const { return snodes_; }
  std::size_t size() const { return snodes_.size(); }
  bool empty() const { return snodes_.empty(); }

  VarId add_variable(Variable v) {
    validate_variable(v);
    variables_.push_back(std::move(v));
    return static_cast<VarId>(variables_.size() - 1);
  }

  std::size_t add(SNode q) {
    check_inode(q.head);
    for (const auto& p : q.parents) check_inode(p);
    SNode checked = make_snode(q.head, std::move(q.parents), q.weight);
    snodes_.push_back(std::move(checked));
    const std::size_t id = snodes_.size() - 1;
    by_head_[key(snodes_[id].head)].push_back(id);
    return id;
  }

  // S-nodes whose head is the given I-node.
  std::span<const std::size_t> supporting(INode head) const {
    auto it = by_head_.find(key(head));
    if (it == by_head_.end()) return {};
    return it->second;
  }

  // Every I-node that appears as a head or a parent, sorted.
  std::vector<INode> inodes() const {
    std::vector<INode> out;
    for (const auto& q : snodes_) {
      out.push_back(q.head);
      out.insert(out.end(), q.parents.begin(), q.parents.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void sort_canonical() {
    std::sort(snodes_.begin(), snodes_.end(), snode_less);
    by_head_.clear();
    for (std::size_t i = 0; i < snodes_.size(); ++i) by_head_[key(snodes_[i].head)].push_back(i);
  }

 private:
  static std::uint64_t key(INode n) { return (static_cast<std::uint64_t>(n.var) << 32) | n.state; }

  void check_inode(INode n) const {
    if (n.var >= variables_.size()) {
      throw InputError("I-node references unknown variable " + std::to_string(n.var));
    }
    if (n.state >= variables_[n.var].arity()) {
      throw InputError("I-node state " + std::to_string(n.state) + " out of range for variable '" +
                       variables_[n.var].name + "'");
    }
  }

  std::vector<Variable> variables_;
  std::vector<SNode> snodes_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_head_;
};

struct MutexViolation {
  enum class Kind { kNonMutexParents, kWeightSum };
  Kind kind;
  std::vector<std::size_t> snodes;
  INode head;            // shared head (kNonMutexParents) or a representative head
  double weight_sum = 0;  // only for kWeightSum

  std::string describe(const Bkb& bkb) const {
    std::ostringstream os;
    const auto& var = bkb.variables().at(head.var);
    if (kind == Kind::kNonMutexParents) {
      os << "S-nodes";
      for (auto s : snodes) os << ' ' << s;
      os << " support " << var.name << '=' << var.states.at(head.state)
         << " with parent sets that are not mutex";
    } else {
      os << "S-nodes";
      for (auto s : snodes) os << ' ' << s;
      os << " on variable " << var.name << " share a parent set and their weights sum to "
         << weight_sum;
    }
    return os.str();
  }
};

// Reports every same-head pair with non-mutex parent sets, and every group
// of mutex-head S-nodes sharing one parent-set signature whose weights sum
// above 1 + kWeightEpsilon. Empty result means the BKB is valid.
inline std::vector<MutexViolation> validate_mutex(const Bkb& bkb) {
  std::vector<MutexViolation> out;
  const auto& snodes = bkb.snodes();

  std::map<INode, std::vector<std::size_t>> by_head;
  for (std::size_t i = 0; i < snodes.size(); ++i) by_head[snodes[i].head].push_back(i);
  for (const auto& [head, ids] : by_head) {
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        if (!mutex(snodes[ids[a]].parents, snodes[ids[b]].parents)) {
          out.push_back({MutexViolation::Kind::kNonMutexParents, {ids[a], ids[b]}, head, 0.0});
        }
      }
    }
  }

  std::map<std::pair<VarId, std::vector<INode>>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < snodes.size(); ++i) {
    groups[{snodes[i].head.var, snodes[i].parents}].push_back(i);
  }
  for (const auto& [sig, ids] : groups) {
    // One S-node per distinct head state; same-head duplicates are already
    // reported above.
    std::map<StateId, double> per_state;
    for (auto id : ids) per_state.try_emplace(snodes[id].head.state, snodes[id].weight);
    double sum = 0.0;
    for (const auto& [s, w] : per_state) sum += w;
    if (per_state.size() > 1 && sum > 1.0 + kWeightEpsilon) {
      out.push_back({MutexViolation::Kind::kWeightSum, ids, snodes[ids.front()].head, sum});
    }
  }
  return out;
}

struct InferenceCheck {
  bool valid = false;
  double weight = 0.0;
};

// Checks whether the S-node subset forms an inference: every I-node it
// touches is supported by an S-node in the subset, each variable is
// instantiated at most once, and the I-node graph is acyclic. On success
// the weight is the product of S-node weights.
inline InferenceCheck is_inference(const Bkb& bkb, std::span<const std::size_t> subset) {
  const auto& snodes = bkb.snodes();
  std::map<VarId, StateId> inst;
  auto claim = [&inst](INode n) {
    auto [it, inserted] = inst.emplace(n.var, n.state);
    return inserted || it->second == n.state;
  };
  for (auto id : subset) {
    const auto& q = snodes.at(id);
    if (!claim(q.head)) return {};
    for (const auto& p : q.parents) {
      if (!claim(p)) return {};
    }
  }

  // With one instantiation per variable, I-nodes are keyed by variable.
  std::map<VarId, std::vector<std::size_t>> support;
  for (auto id : subset) support[snodes[id].head.var].push_back(id);
  for (const auto& [var, state] : inst) {
    if (!support.contains(var)) return {};
  }

  // Kahn's algorithm over variables: edge parent -> head for each S-node.
  std::map<VarId, std::size_t> indegree;
  std::map<VarId, std::vector<VarId>> children;
  for (const auto& [var, state] : inst) indegree[var] = 0;
  for (auto id : subset) {
    for (const auto& p : snodes[id].parents) {
      children[p.var].push_back(snodes[id].head.var);
      ++indegree[snodes[id].head.var];
    }
  }
  std::vector<VarId> ready;
  for (const auto& [v, d] : indegree) {
    if (d == 0) ready.push_back(v);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    VarId v = ready.back();
    ready.pop_back();
    ++visited;
    for (VarId c : children[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (visited != inst.size()) return {};

  double w = 1.0;
  for (auto id : subset) w *= snodes[id].weight;
  return {true, w};
}

// A single complete inference tagged with its source.
struct Fragment {
  Bkb bkb;
  std::string source;
  double reliability = 1.0;
};

// Checks the fragment invariants: exactly one S-node per variable and the
// whole S-node set is an inference.
inline void validate_fragment(const Fragment& f) {
  if (!(f.reliability > 0.0)) {
    throw InputError("fragment '" + f.source + "' has non-positive reliability");
  }
  const auto n = f.bkb.num_variables();
  std::vector<int> heads(n, 0);
  for (const auto& q : f.bkb.snodes()) ++heads[q.head.var];
  for (std::size_t i = 0; i < n; ++i) {
    if (heads[i] != 1) {
      throw InputError("fragment '" + f.source + "' must have exactly one S-node for variable '" +
                       f.bkb.variables()[i].name + "'");
    }
  }
  std::vector<std::size_t> all(f.bkb.size());
  std::iota(all.begin(), all.end(), 0);
  if (!is_inference(f.bkb, all).valid) {
    throw InputError("fragment '" + f.source + "' is not a valid inference");
  }
}

struct SourceVariable {
  VarId target_variable = 0;
  VarId source_variable = 0;  // id of the source variable inside the fused BKB
  std::vector<std::pair<std::string, double>> sources;  // (label, reliability)

  double rho() const {
    double total = 0.0;
    for (const auto& [label, r] : sources) total += r;
    return total;
  }
  double prior(std::size_t k) const { return sources.at(k).second / rho(); }
};

}  // namespace bkbforge
