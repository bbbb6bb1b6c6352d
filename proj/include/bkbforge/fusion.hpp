#pragma once

// BKB fusion: union fragments, attach one source I-node per (fragment,
// variable) with a prior S-node weighted by normalized reliability.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bkbforge/core.hpp"

namespace bkbforge {

struct FusedBkb {
  Bkb bkb;                                  // data variables first, then source variables
  std::size_t num_data_variables = 0;
  std::vector<SourceVariable> source_vars;  // one per data variable with support
  std::map<std::string, std::vector<std::size_t>> fragment_index;  // label -> S-node ids

  bool is_source_variable(VarId v) const { return v >= num_data_variables; }

  const SourceVariable* source_for(VarId data_var) const {
    for (const auto& s : source_vars) {
      if (s.target_variable == data_var) return &s;
    }
    return nullptr;
  }
};

inline std::string source_variable_name(const std::string& data_name) { return "S[" + data_name + "]"; }

// Fuses fragments over a shared variable universe. For every S-node q with
// head on X from fragment sigma, the fused BKB holds q with the extra parent
// S[X]=sigma and the original weight; every source I-node S[X]=sigma gets a
// parentless prior S-node of weight r(sigma)/rho_X, where rho_X sums the
// reliabilities of the fragments contributing to X. Reliabilities in the
// override map replace the fragments' own values.
inline FusedBkb fuse(const std::vector<Fragment>& fragments,
                     const std::map<std::string, double>& reliability_overrides = {}) {
  FusedBkb out;
  if (fragments.empty()) return out;

  const auto& vars = fragments.front().bkb.variables();
  std::set<std::string> labels;
  for (const auto& f : fragments) {
    if (f.bkb.variables() != vars) {
      throw InputError("fragment '" + f.source + "' does not share the variable universe");
    }
    if (!labels.insert(f.source).second) throw InputError("duplicate source label '" + f.source + "'");
  }
  auto reliability = [&](const Fragment& f) {
    auto it = reliability_overrides.find(f.source);
    const double r = it == reliability_overrides.end() ? f.reliability : it->second;
    if (!(r > 0.0)) throw InputError("source '" + f.source + "' has non-positive reliability");
    return r;
  };

  // Source states are sorted by label so the result is independent of the
  // fragment order.
  std::vector<const Fragment*> ordered;
  for (const auto& f : fragments) ordered.push_back(&f);
  std::sort(ordered.begin(), ordered.end(),
            [](const Fragment* a, const Fragment* b) { return a->source < b->source; });

  const std::size_t n = vars.size();
  out.num_data_variables = n;
  out.bkb = Bkb(vars);
  std::vector<std::vector<std::pair<std::string, double>>> contributors(n);
  for (const Fragment* f : ordered) {
    std::vector<bool> heads(n, false);
    for (const auto& q : f->bkb.snodes()) heads[q.head.var] = true;
    for (std::size_t x = 0; x < n; ++x) {
      if (heads[x]) contributors[x].push_back({f->source, reliability(*f)});
    }
  }
  std::vector<VarId> source_of(n, 0);
  for (VarId x = 0; x < n; ++x) {
    if (contributors[x].empty()) continue;
    Variable sv{source_variable_name(vars[x].name), {}};
    for (const auto& [label, r] : contributors[x]) sv.states.push_back(label);
    source_of[x] = out.bkb.add_variable(std::move(sv));
    out.source_vars.push_back(SourceVariable{x, source_of[x], contributors[x]});
  }

  auto source_state = [&](VarId x, const std::string& label) {
    const auto& states = out.bkb.variables()[source_of[x]].states;
    return static_cast<StateId>(std::find(states.begin(), states.end(), label) - states.begin());
  };

  for (const Fragment* f : ordered) {
    for (const auto& q : f->bkb.snodes()) {
      auto parents = q.parents;
      parents.push_back({source_of[q.head.var], source_state(q.head.var, f->source)});
      out.bkb.add(SNode{q.head, std::move(parents), q.weight});
    }
  }
  for (const auto& sv : out.source_vars) {
    const double rho = sv.rho();
    for (std::size_t k = 0; k < sv.sources.size(); ++k) {
      out.bkb.add(SNode{INode{sv.source_variable, static_cast<StateId>(k)}, {}, sv.sources[k].second / rho});
    }
  }
  out.bkb.sort_canonical();

  // Index: an S-node belongs to the fragment named by its source parent or,
  // for priors, by its head.
  const auto& snodes = out.bkb.snodes();
  for (std::size_t i = 0; i < snodes.size(); ++i) {
    const auto& q = snodes[i];
    const INode* src = nullptr;
    if (out.is_source_variable(q.head.var)) {
      src = &q.head;
    } else {
      for (const auto& p : q.parents) {
        if (out.is_source_variable(p.var)) src = &p;
      }
    }
    if (src) out.fragment_index[out.bkb.variables()[src->var].states[src->state]].push_back(i);
  }
  return out;
}

// Plain union of fragment S-nodes without source nodes; identical S-nodes
// collapse. Generally violates mutual exclusion.
inline Bkb naive_union(const std::vector<Fragment>& fragments) {
  if (fragments.empty()) return {};
  Bkb out(fragments.front().bkb.variables());
  std::vector<SNode> all;
  for (const auto& f : fragments) {
    if (f.bkb.variables() != out.variables()) {
      throw InputError("fragment '" + f.source + "' does not share the variable universe");
    }
    all.insert(all.end(), f.bkb.snodes().begin(), f.bkb.snodes().end());
  }
  std::sort(all.begin(), all.end(), snode_less);
  all.erase(std::unique(all.begin(), all.end()), all.end());
  for (auto& q : all) out.add(std::move(q));
  return out;
}

inline std::vector<MutexViolation> mutex_audit(const FusedBkb& fused) { return validate_mutex(fused.bkb); }

}  // namespace bkbforge
