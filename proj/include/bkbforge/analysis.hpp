#pragma once

// Model inspection: random-variable level cycles in fused BKBs and DOT
// export of BKBs and Bayesian networks.

#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bkbforge/bnlearn.hpp"
#include "bkbforge/core.hpp"
#include "bkbforge/fusion.hpp"
#include "bkbforge/graph.hpp"

namespace bkbforge {

struct RvCycleReport {
  std::set<std::pair<VarId, VarId>> edges;        // parent variable -> head variable
  std::vector<std::pair<VarId, VarId>> two_cycles;  // u < v with both directions present
  std::vector<std::vector<VarId>> components;     // strongly connected blocks of size > 1
};

// Projects S-nodes onto data variables (source variables are skipped) and
// reports mutual dependencies and larger cyclic blocks.
inline RvCycleReport analyze_rv_cycles(const Bkb& bkb, std::size_t num_data_variables) {
  RvCycleReport out;
  for (const auto& q : bkb.snodes()) {
    if (q.head.var >= num_data_variables) continue;
    for (const auto& p : q.parents) {
      if (p.var < num_data_variables) out.edges.insert({p.var, q.head.var});
    }
  }
  for (const auto& [u, v] : out.edges) {
    if (u < v && out.edges.contains({v, u})) out.two_cycles.push_back({u, v});
  }
  std::vector<std::vector<std::size_t>> adj(num_data_variables);
  for (const auto& [u, v] : out.edges) adj[u].push_back(v);
  auto sccs = strongly_connected_components(adj);
  std::sort(sccs.begin(), sccs.end());
  for (const auto& c : sccs) {
    if (c.size() > 1) out.components.emplace_back(c.begin(), c.end());
  }
  return out;
}

inline RvCycleReport analyze_rv_cycles(const FusedBkb& fused) {
  return analyze_rv_cycles(fused.bkb, fused.num_data_variables);
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string weight_label(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", w);
  return buf;
}

}  // namespace detail

// I-nodes are ellipses (source I-nodes dashed), S-nodes small boxes
// labeled with their weight. Variables at or beyond num_data_variables are
// treated as source variables.
inline std::string export_dot(const Bkb& bkb, std::size_t num_data_variables) {
  std::ostringstream out;
  out << "digraph bkb {\n  rankdir=TB;\n";
  const auto inodes = bkb.inodes();
  for (const auto& n : inodes) {
    const auto& var = bkb.variables()[n.var];
    out << "  i" << n.var << "_" << n.state << " [shape=ellipse, label=\""
        << detail::dot_escape(var.name + " = " + var.states[n.state]) << "\"";
    if (n.var >= num_data_variables) out << ", style=dashed";
    out << "];\n";
  }
  const auto& snodes = bkb.snodes();
  for (std::size_t i = 0; i < snodes.size(); ++i) {
    out << "  s" << i << " [shape=box, width=0.3, height=0.2, fontsize=9, label=\""
        << detail::weight_label(snodes[i].weight) << "\"];\n";
  }
  for (std::size_t i = 0; i < snodes.size(); ++i) {
    const auto& q = snodes[i];
    for (const auto& p : q.parents) out << "  i" << p.var << "_" << p.state << " -> s" << i << ";\n";
    out << "  s" << i << " -> i" << q.head.var << "_" << q.head.state << ";\n";
  }
  out << "}\n";
  return out.str();
}

inline std::string export_dot(const FusedBkb& fused) { return export_dot(fused.bkb, fused.num_data_variables); }

inline std::string export_dot(const BayesNet& bn) {
  std::ostringstream out;
  out << "digraph bn {\n";
  for (VarId v = 0; v < bn.num_variables(); ++v) {
    out << "  v" << v << " [shape=ellipse, label=\"" << detail::dot_escape(bn.variables[v].name) << "\"];\n";
  }
  for (VarId v = 0; v < bn.num_variables(); ++v) {
    for (VarId p : mask_to_vars(bn.parents[v])) out << "  v" << p << " -> v" << v << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace bkbforge
