// Command-line front end: every command reads one instance file (except
// gen) and writes a single JSON document to stdout. Errors print
// {"error": code, "detail": ...} and exit nonzero.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pandora/forest_solver.hpp"
#include "pandora/generator.hpp"
#include "pandora/harness.hpp"
#include "pandora/json_io.hpp"
#include "pandora/multiline_solver.hpp"
#include "pandora/oracle.hpp"
#include "pandora/static_transition.hpp"

namespace {

using nlohmann::json;
using namespace pandora;

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

std::string instance_shape(const Instance& inst) {
  if (!is_union_of_lines(inst)) return "forest";
  int roots = 0;
  for (int b = 0; b < inst.box_count(); ++b) roots += inst.is_root(b) ? 1 : 0;
  return roots <= 1 ? "line" : "lines";
}

int cmd_validate(const std::string& file) {
  Instance inst = load_instance(file);
  emit(json{{"valid", true},
            {"boxes", inst.box_count()},
            {"values", inst.value_count()},
            {"shape", instance_shape(inst)},
            {"static_transition", inst.static_transition}});
  return 0;
}

int cmd_solve(const std::string& file, bool debug_contractions) {
  Instance inst = load_instance(file);
  json out;
  out["shape"] = instance_shape(inst);
  out["expected_payoff"] = expected_payoff_forest(inst);
  out["policy_trace_schema"] = {
      {"trace", {{"line", "int"}, {"box", "string"}, {"grv", "number"},
                 {"observed", "number"}, {"x_after", "number"}, {"cost_so_far", "number"}}},
      {"payoff", "number"}};
  if (debug_contractions) out["contractions"] = contraction_cascade(inst);
  emit(out);
  return 0;
}

int cmd_oracle(const std::string& file, const std::string& mode) {
  Instance inst = load_instance(file);
  json out;
  if (mode == "fa") {
    out["value"] = oracle::brute_force_optimal(inst);
    out["witness"] = nullptr;
  } else if (mode == "pa") {
    oracle::PaResult r = oracle::best_pa_value(inst);
    out["value"] = r.value;
    json order = json::array();
    for (int b : r.order) order.push_back(inst.boxes[b].id);
    out["witness"] = order;
  } else if (mode == "na") {
    oracle::NaResult r = oracle::best_na_value(inst);
    out["value"] = r.value;
    json set = json::array();
    for (int b : r.chosen) set.push_back(inst.boxes[b].id);
    out["witness"] = set;
  } else {
    throw PandoraError("BadInput", "mode must be fa|pa|na");
  }
  emit(out);
  return 0;
}

int cmd_simulate(const std::string& file, const std::string& policy, int trials,
                 std::uint64_t seed, double delta) {
  Instance inst = load_instance(file);
  SimReport rep = monte_carlo_eval(inst, policy_from_string(policy), trials, seed, delta);
  emit(sim_report_to_json(rep));
  return 0;
}

int cmd_truncate(const std::string& file, double delta) {
  Instance inst = load_instance(file);
  TruncationResult res = truncate_lines(inst, delta);
  emit(instance_to_json(res.instance));
  return 0;
}

int cmd_approx_line(const std::string& file, double delta) {
  Instance inst = load_instance(file);
  BestLineResult res = best_line_half_approx(inst, delta);
  emit(json{{"path", res.ids},
            {"value", res.value},
            {"t_delta", res.t_delta},
            {"profile", {{"pi", res.profile.pi.probs}, {"C", res.profile.C},
                         {"alpha", res.profile.alpha}}}});
  return 0;
}

int cmd_compare(const std::string& file, int trials, std::uint64_t seed, double delta) {
  Instance inst = load_instance(file);
  emit(compare_policies(inst, trials, seed, delta));
  return 0;
}

int cmd_gen(const std::string& shape, int boxes, int values, std::uint64_t seed, bool stat) {
  Instance inst = generate_instance(shape_from_string(shape), boxes, values, seed, stat);
  emit(instance_to_json(inst));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for sequential costly inspection with Markov-correlated rewards "
               "over forest precedence constraints"};
  app.require_subcommand(1);

  std::string file, mode = "fa", policy = "forest", shape = "line";
  int trials = 10000, boxes = 4, values = 3;
  std::uint64_t seed = 1;
  double delta = 0.05;
  bool debug_contractions = false, static_matrices = false;

  CLI::App* validate = app.add_subcommand("validate", "Check an instance file");
  validate->add_option("file", file)->required();

  CLI::App* solve = app.add_subcommand("solve", "Exact expected payoff of the optimal policy");
  solve->add_option("file", file)->required();
  solve->add_flag("--debug-contractions", debug_contractions);

  CLI::App* orac = app.add_subcommand("oracle", "Brute-force values (fa|pa|na)");
  orac->add_option("file", file)->required();
  orac->add_option("--mode", mode)->required();

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo policy evaluation");
  sim->add_option("file", file)->required();
  sim->add_option("--policy", policy)->required();
  sim->add_option("--trials", trials)->required();
  sim->add_option("--seed", seed)->required();
  sim->add_option("--delta", delta);

  CLI::App* trunc = app.add_subcommand("truncate", "Truncate lines to the near-optimal prefix");
  trunc->add_option("file", file)->required();
  trunc->add_option("--delta", delta)->required();

  CLI::App* approx = app.add_subcommand("approx-line", "Best fixed line subgraph");
  approx->add_option("file", file)->required();
  approx->add_option("--delta", delta)->required();

  CLI::App* comp = app.add_subcommand("compare", "Policy comparison table");
  comp->add_option("file", file)->required();
  comp->add_option("--trials", trials)->required();
  comp->add_option("--seed", seed)->required();
  comp->add_option("--delta", delta);

  CLI::App* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--shape", shape)->required();
  gen->add_option("--boxes", boxes)->required();
  gen->add_option("--values", values)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_flag("--static", static_matrices);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(file);
    if (solve->parsed()) return cmd_solve(file, debug_contractions);
    if (orac->parsed()) return cmd_oracle(file, mode);
    if (sim->parsed()) return cmd_simulate(file, policy, trials, seed, delta);
    if (trunc->parsed()) return cmd_truncate(file, delta);
    if (approx->parsed()) return cmd_approx_line(file, delta);
    if (comp->parsed()) return cmd_compare(file, trials, seed, delta);
    if (gen->parsed()) return cmd_gen(shape, boxes, values, seed, static_matrices);
  } catch (const pandora::ValidationError& e) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& v : e.violations()) {
      violations.push_back({{"code", v.code}, {"detail", v.detail}});
    }
    emit(nlohmann::json{{"error", e.code()}, {"detail", e.detail()}, {"violations", violations}});
    return 1;
  } catch (const pandora::PandoraError& e) {
    emit(nlohmann::json{{"error", e.code()}, {"detail", e.detail()}});
    return 1;
  } catch (const std::exception& e) {
    emit(nlohmann::json{{"error", "Internal"}, {"detail", e.what()}});
    return 1;
  }
  return 0;
}
