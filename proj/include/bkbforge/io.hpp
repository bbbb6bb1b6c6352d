#pragma once

// JSON serialization for BKBs, fused models, Bayesian networks, score
// tables and reports.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bkbforge/bkbsl.hpp"
#include "bkbforge/bnlearn.hpp"
#include "bkbforge/core.hpp"
#include "bkbforge/daglearn.hpp"
#include "bkbforge/fusion.hpp"
#include "bkbforge/scores.hpp"

namespace bkbforge {

using Json = nlohmann::ordered_json;

inline Json to_json(const Variable& v) { return Json{{"name", v.name}, {"states", v.states}}; }

inline Json variables_json(const std::vector<Variable>& vars) {
  Json out = Json::array();
  for (const auto& v : vars) out.push_back(to_json(v));
  return out;
}

inline Json inode_json(INode n) { return Json::array({n.var, n.state}); }

inline Json to_json(const Bkb& bkb) {
  Json snodes = Json::array();
  for (const auto& q : bkb.snodes()) {
    Json parents = Json::array();
    for (const auto& p : q.parents) parents.push_back(inode_json(p));
    snodes.push_back(Json{{"head", inode_json(q.head)}, {"parents", parents}, {"weight", q.weight}});
  }
  return Json{{"variables", variables_json(bkb.variables())}, {"snodes", snodes}};
}

inline Json to_json(const FusedBkb& fused) {
  Json out = to_json(fused.bkb);
  out["num_data_variables"] = fused.num_data_variables;
  Json sources = Json::array();
  for (const auto& s : fused.source_vars) {
    Json list = Json::array();
    for (const auto& [label, r] : s.sources) list.push_back(Json{{"source", label}, {"reliability", r}});
    sources.push_back(
        Json{{"target_variable", s.target_variable}, {"source_variable", s.source_variable}, {"sources", list}});
  }
  out["sources"] = sources;
  return out;
}

namespace detail {

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("JSON is missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("JSON field '") + key + "': " + e.what());
  }
}

inline INode inode_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InputError("I-node must be a [variable, state] pair");
  return {j[0].get<VarId>(), j[1].get<StateId>()};
}

}  // namespace detail

inline std::vector<Variable> variables_from_json(const Json& j) {
  std::vector<Variable> vars;
  for (const auto& v : j) {
    Variable var{detail::get_field<std::string>(v, "name"), detail::get_field<std::vector<std::string>>(v, "states")};
    validate_variable(var);
    vars.push_back(std::move(var));
  }
  return vars;
}

inline Bkb bkb_from_json(const Json& j) {
  Bkb bkb(variables_from_json(detail::get_field<Json>(j, "variables")));
  for (const auto& s : detail::get_field<Json>(j, "snodes")) {
    std::vector<INode> parents;
    for (const auto& p : detail::get_field<Json>(s, "parents")) parents.push_back(detail::inode_from(p));
    bkb.add(make_snode(detail::inode_from(detail::get_field<Json>(s, "head")), std::move(parents),
                       detail::get_field<double>(s, "weight")));
  }
  return bkb;
}

inline FusedBkb fused_from_json(const Json& j) {
  FusedBkb out;
  out.bkb = bkb_from_json(j);
  out.num_data_variables = j.contains("num_data_variables") ? j["num_data_variables"].get<std::size_t>()
                                                            : out.bkb.num_variables();
  if (out.num_data_variables > out.bkb.num_variables()) throw InputError("num_data_variables exceeds variables");
  if (j.contains("sources")) {
    for (const auto& s : j["sources"]) {
      SourceVariable sv;
      sv.target_variable = detail::get_field<VarId>(s, "target_variable");
      sv.source_variable = detail::get_field<VarId>(s, "source_variable");
      for (const auto& e : detail::get_field<Json>(s, "sources")) {
        sv.sources.emplace_back(detail::get_field<std::string>(e, "source"), detail::get_field<double>(e, "reliability"));
      }
      out.source_vars.push_back(std::move(sv));
    }
  }
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

inline Json to_json(const BayesNet& bn) {
  Json parents = Json::array();
  Json cpts = Json::array();
  for (VarId v = 0; v < bn.num_variables(); ++v) {
    parents.push_back(mask_to_vars(bn.parents[v]));
    Json rows = Json::array();
    for (const auto& [idx, row] : bn.cpts[v]) {
      rows.push_back(Json{{"config", idx}, {"counts", row.counts}, {"total", row.total}});
    }
    cpts.push_back(rows);
  }
  return Json{{"variables", variables_json(bn.variables)}, {"parents", parents}, {"cpts", cpts}};
}

inline BayesNet bn_from_json(const Json& j) {
  BayesNet bn;
  bn.variables = variables_from_json(detail::get_field<Json>(j, "variables"));
  const auto parents = detail::get_field<std::vector<std::vector<VarId>>>(j, "parents");
  const auto cpts = detail::get_field<Json>(j, "cpts");
  if (parents.size() != bn.variables.size() || cpts.size() != bn.variables.size()) {
    throw InputError("BN JSON needs one parent list and CPT per variable");
  }
  for (const auto& p : parents) {
    for (VarId v : p) {
      if (v >= bn.variables.size()) throw InputError("BN parent out of range");
    }
    bn.parents.push_back(vars_to_mask(p));
  }
  if (!is_acyclic(bn.parents)) throw InputError("BN structure is cyclic");
  bn.cpts.resize(bn.variables.size());
  for (std::size_t v = 0; v < cpts.size(); ++v) {
    for (const auto& row : cpts[v]) {
      CptRow r{detail::get_field<std::vector<std::uint64_t>>(row, "counts"),
               detail::get_field<std::uint64_t>(row, "total")};
      if (r.counts.size() != bn.variables[v].arity()) throw InputError("CPT row has the wrong number of states");
      bn.cpts[v].emplace(detail::get_field<std::uint64_t>(row, "config"), std::move(r));
    }
  }
  return bn;
}

inline Json to_json(const MdlBreakdown& m) {
  return Json{{"model_bits", m.model_bits},
              {"data_bits", m.data_bits},
              {"data_mdl_signed", m.data_mdl_signed()},
              {"delta", m.delta},
              {"variant", m.variant}};
}

inline Json to_json(const CallCounter& c) { return Json{{"unique", c.unique}, {"total", c.total}}; }

// Wall time is left out so reports are reproducible byte for byte.
inline Json report_json(const LearnReport& r) {
  Json out = to_json(r.mdl);
  out["model_bits_without_sources"] = r.model_bits_without_sources;
  out["data_bits_with_priors"] = r.data_bits_with_priors;
  out["calls"] = to_json(r.calls);
  out["num_worlds"] = r.worlds.size();
  out["num_snodes"] = r.model.bkb.size();
  Json per_world = Json::array();
  for (const auto& w : r.per_world_scores) {
    per_world.push_back(Json{{"world", w.world}, {"source", w.source}, {"entropy", w.entropy}});
  }
  out["per_world_scores"] = per_world;
  return out;
}

inline Json report_json(const BnModel& m) {
  Json out = to_json(m.mdl);
  out["calls"] = to_json(m.calls);
  Json parents = Json::array();
  for (auto p : m.bn.parents) parents.push_back(mask_to_vars(p));
  out["parents"] = parents;
  return out;
}

inline Json to_json(const LocalScoreTable& t) {
  Json vars = Json::array();
  for (VarId v = 0; v < t.candidates.size(); ++v) {
    Json cands = Json::array();
    for (const auto& c : t.candidates[v]) cands.push_back(Json{{"parents", mask_to_vars(c.parents)}, {"score", c.score}});
    vars.push_back(cands);
  }
  Json out{{"num_variables", t.num_variables}, {"parent_limit", t.parent_limit}, {"candidates", vars}};
  if (t.world) out["world"] = *t.world;
  return out;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

}  // namespace bkbforge
