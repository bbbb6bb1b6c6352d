// bkbforge command-line interface.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bkbforge/analysis.hpp"
#include "bkbforge/bkbsl.hpp"
#include "bkbforge/bnlearn.hpp"
#include "bkbforge/experiment.hpp"
#include "bkbforge/io.hpp"

using namespace bkbforge;

namespace {

struct DataArgs {
  std::string path;
  std::string format = "auto";
  std::string target;

  void add(CLI::App* app) {
    app->add_option("--data", path, "CSV or KEEL .dat file")->required();
    app->add_option("--format", format, "csv | keel-dat | auto");
    app->add_option("--target", target, "class column (default: KEEL output or last column)");
  }

  ExperimentConfig config() const {
    ExperimentConfig cfg;
    cfg.data_path = path;
    cfg.format = parse_format(format);
    cfg.target = target;
    return cfg;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Evidence parse_evidence(const std::string& text, const FusedBkb& model) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("evidence is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("evidence must be a JSON object of variable -> state");
  Evidence ev;
  for (const auto& [name, value] : j.items()) {
    std::optional<VarId> var;
    for (VarId v = 0; v < model.num_data_variables; ++v) {
      if (model.bkb.variables()[v].name == name) var = v;
    }
    if (!var) throw InputError("unknown evidence variable '" + name + "'");
    const std::string label = value.is_string() ? value.get<std::string>() : value.dump();
    auto state = model.bkb.variables()[*var].state_index(label);
    if (!state) throw InputError("unknown state '" + label + "' for variable '" + name + "'");
    ev[*var] = *state;
  }
  return ev;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn, fuse, score and query Bayesian knowledge bases"};
  app.require_subcommand(1);

  DataArgs info_args;
  auto* info = app.add_subcommand("ingest-info", "Summarize a dataset after discretization");
  info_args.add(info);

  DataArgs disc_args;
  std::string disc_out;
  auto* disc = app.add_subcommand("discretize", "Discretize numeric columns and write a CSV");
  disc_args.add(disc);
  disc->add_option("--out", disc_out, "output CSV (default stdout)");

  DataArgs lb_args;
  std::optional<std::size_t> lb_k;
  std::string lb_backend = "exact", lb_out, lb_report;
  double lb_delta = kDefaultDelta, lb_lambda = 0.0;
  std::uint64_t lb_seed = 0;
  auto* lb = app.add_subcommand("learn-bkb", "Learn a fused BKB from data");
  lb_args.add(lb);
  lb->add_option("--parent-limit", lb_k, "maximum parents per instantiation");
  lb->add_option("--backend", lb_backend, "exact | greedy");
  lb->add_option("--delta", lb_delta, "bits per stored probability");
  lb->add_option("--lambda", lb_lambda, "weight of the per-fragment structure penalty");
  lb->add_option("--seed", lb_seed, "greedy restart seed");
  lb->add_option("--out", lb_out, "model JSON");
  lb->add_option("--report", lb_report, "report JSON (default stdout)");

  DataArgs bn_args;
  std::optional<std::size_t> bn_k;
  std::string bn_variant = "lam-bacchus", bn_out, bn_report;
  double bn_delta = kDefaultDelta;
  auto* bnc = app.add_subcommand("learn-bn", "Learn an exact MDL Bayesian network");
  bn_args.add(bnc);
  bnc->add_option("--parent-limit", bn_k, "maximum parents per variable");
  bnc->add_option("--variant", bn_variant, "lam-bacchus | suzuki");
  bnc->add_option("--delta", bn_delta, "bits per stored probability");
  bnc->add_option("--out", bn_out, "BN JSON");
  bnc->add_option("--report", bn_report, "report JSON (default stdout)");

  DataArgs cm_args;
  std::optional<std::size_t> cm_k;
  std::string cm_backend = "exact", cm_variant = "lam-bacchus", cm_out;
  double cm_delta = kDefaultDelta;
  auto* cm = app.add_subcommand("compare-mdl", "Compare BKB and BN data encoding and call counts");
  cm_args.add(cm);
  cm->add_option("--parent-limit", cm_k, "parent limit for both learners");
  cm->add_option("--backend", cm_backend, "exact | greedy");
  cm->add_option("--variant", cm_variant, "lam-bacchus | suzuki");
  cm->add_option("--delta", cm_delta, "bits per stored probability");
  cm->add_option("--out", cm_out, "report JSON (default stdout)");

  DataArgs cv_args;
  std::optional<std::size_t> cv_k;
  std::size_t cv_folds = 10;
  std::uint64_t cv_seed = 0;
  std::string cv_backend = "exact", cv_variant = "lam-bacchus", cv_out;
  auto* cv = app.add_subcommand("crossval", "Cross-validate BKB and BN classifiers");
  cv_args.add(cv);
  cv->add_option("--parent-limit", cv_k, "parent limit for both learners");
  cv->add_option("--folds", cv_folds, "number of folds");
  cv->add_option("--seed", cv_seed, "fold seed");
  cv->add_option("--backend", cv_backend, "exact | greedy");
  cv->add_option("--variant", cv_variant, "lam-bacchus | suzuki");
  cv->add_option("--out", cv_out, "report JSON (default stdout)");

  std::string inf_model, inf_evidence = "{}", inf_target;
  std::size_t inf_max_free = kDefaultMaxFreeVars;
  auto* inf = app.add_subcommand("infer", "Query a fused BKB");
  inf->add_option("--model", inf_model, "model JSON")->required();
  inf->add_option("--evidence", inf_evidence, "JSON object of variable -> state");
  inf->add_option("--target", inf_target, "classify this variable");
  inf->add_option("--max-free-vars", inf_max_free, "marginalization limit");

  std::string cy_model;
  auto* cy = app.add_subcommand("cycles", "List random-variable level cycles of a fused BKB");
  cy->add_option("--model", cy_model, "model JSON")->required();

  std::string dot_model, dot_bn, dot_out;
  auto* dot = app.add_subcommand("export-dot", "Write a BKB or BN as Graphviz DOT");
  dot->add_option("--model", dot_model, "BKB model JSON");
  dot->add_option("--bn", dot_bn, "BN JSON");
  dot->add_option("--out", dot_out, "DOT file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kInput);
  }

  try {
    if (*info) {
      const auto cfg = info_args.config();
      const auto loaded = load_experiment_data(cfg);
      const auto& d = loaded.dataset;
      Json vars = Json::array();
      for (const auto& v : d.variables()) vars.push_back(to_json(v));
      Json cuts = Json::object();
      for (const auto& [name, c] : loaded.cuts) cuts[name] = c;
      std::cout << dump(Json{{"rows", d.num_rows()},
                             {"variables", d.num_variables()},
                             {"inodes", d.total_inodes()},
                             {"unique_worlds", dedupe_worlds(d).size()},
                             {"target", d.variable(loaded.target).name},
                             {"default_parent_limit", loaded.parent_limit},
                             {"cuts", cuts},
                             {"warnings", loaded.warnings},
                             {"schema", vars}});
    } else if (*disc) {
      const auto loaded = load_experiment_data(disc_args.config());
      for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
      std::string csv;
      const auto& d = loaded.dataset;
      for (VarId v = 0; v < d.num_variables(); ++v) csv += (v ? "," : "") + d.variable(v).name;
      csv += "\n";
      for (const auto& row : d.rows()) {
        for (VarId v = 0; v < d.num_variables(); ++v) {
          const auto& label = d.variable(v).states[row[v]];
          csv += (v ? "," : "") + (label.find(',') != std::string::npos ? "\"" + label + "\"" : label);
        }
        csv += "\n";
      }
      emit(disc_out, csv);
    } else if (*lb) {
      auto cfg = lb_args.config();
      cfg.parent_limit = lb_k;
      const auto loaded = load_experiment_data(cfg);
      LearnOptions opt;
      opt.parent_limit = loaded.parent_limit;
      opt.backend = parse_backend(lb_backend);
      opt.delta = lb_delta;
      opt.lambda = lb_lambda;
      opt.greedy.seed = lb_seed;
      const auto report = learn(loaded.dataset, opt);
      std::cerr << "learned " << report.worlds.size() << " fragments in " << report.wall_seconds << " s\n";
      if (!lb_out.empty()) write_text_file(lb_out, dump(to_json(report.model)));
      emit(lb_report, dump(report_json(report)));
    } else if (*bnc) {
      auto cfg = bn_args.config();
      cfg.parent_limit = bn_k;
      const auto loaded = load_experiment_data(cfg);
      BnLearnOptions opt;
      opt.parent_limit = loaded.parent_limit;
      opt.variant = parse_bn_variant(bn_variant);
      opt.delta = bn_delta;
      const auto model = learn_bn(loaded.dataset, opt);
      if (!bn_out.empty()) write_text_file(bn_out, dump(to_json(model.bn)));
      emit(bn_report, dump(report_json(model)));
    } else if (*cm) {
      auto cfg = cm_args.config();
      cfg.parent_limit = cm_k;
      cfg.backend = parse_backend(cm_backend);
      cfg.variant = parse_bn_variant(cm_variant);
      cfg.delta = cm_delta;
      const auto c = compare_mdl(cfg);
      std::cerr << text_table(c);
      emit(cm_out, dump(to_json(c)));
    } else if (*cv) {
      auto cfg = cv_args.config();
      cfg.parent_limit = cv_k;
      cfg.folds = cv_folds;
      cfg.seed = cv_seed;
      cfg.backend = parse_backend(cv_backend);
      cfg.variant = parse_bn_variant(cv_variant);
      const auto r = crossval(cfg);
      std::cerr << text_table(r);
      emit(cv_out, dump(to_json(r)));
    } else if (*inf) {
      const auto model = fused_from_json(read_json_file(inf_model));
      auto ev = parse_evidence(inf_evidence, model);
      if (!inf_target.empty()) {
        std::optional<VarId> target;
        for (VarId v = 0; v < model.num_data_variables; ++v) {
          if (model.bkb.variables()[v].name == inf_target) target = v;
        }
        if (!target) throw InputError("unknown target variable '" + inf_target + "'");
        Assignment world(model.num_data_variables, 0);
        for (VarId v = 0; v < model.num_data_variables; ++v) {
          if (v == *target) continue;
          auto it = ev.find(v);
          if (it == ev.end()) {
            throw InputError("classification needs evidence for every variable except the target; missing '" +
                             model.bkb.variables()[v].name + "'");
          }
          world[v] = it->second;
        }
        const auto p = classify(model, world, *target);
        Json scores = Json::object();
        const auto& tv = model.bkb.variables()[*target];
        for (StateId s = 0; s < p.scores.size(); ++s) scores[tv.states[s]] = p.scores[s];
        Json out{{"target", tv.name}, {"scores", scores}};
        out["prediction"] = p.best ? Json(tv.states[*p.best]) : Json(nullptr);
        out["abstain"] = p.abstained();
        std::cout << dump(out);
      } else {
        std::cout << dump(Json{{"probability", marginal(model, ev, inf_max_free)}});
      }
    } else if (*cy) {
      const auto model = fused_from_json(read_json_file(cy_model));
      const auto r = analyze_rv_cycles(model);
      const auto& vars = model.bkb.variables();
      Json edges = Json::array(), pairs = Json::array(), comps = Json::array();
      for (const auto& [u, v] : r.edges) edges.push_back({vars[u].name, vars[v].name});
      for (const auto& [u, v] : r.two_cycles) pairs.push_back({vars[u].name, vars[v].name});
      for (const auto& c : r.components) {
        Json names = Json::array();
        for (auto v : c) names.push_back(vars[v].name);
        comps.push_back(names);
      }
      std::cout << dump(Json{{"edges", edges}, {"two_cycles", pairs}, {"cyclic_components", comps}});
    } else if (*dot) {
      if (dot_model.empty() == dot_bn.empty()) throw InputError("pass exactly one of --model or --bn");
      const std::string text = dot_model.empty() ? export_dot(bn_from_json(read_json_file(dot_bn)))
                                                 : export_dot(fused_from_json(read_json_file(dot_model)));
      emit(dot_out, text);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kInput);
  }
  return 0;
}
