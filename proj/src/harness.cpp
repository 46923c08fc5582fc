#include "pandora/harness.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "pandora/forest_solver.hpp"
#include "pandora/multiline_solver.hpp"
#include "pandora/oracle.hpp"
#include "pandora/rng.hpp"
#include "pandora/static_transition.hpp"

namespace pandora {

Policy policy_from_string(const std::string& s) {
  if (s == "line") return Policy::kLine;
  if (s == "multiline") return Policy::kMultiline;
  if (s == "forest") return Policy::kForest;
  if (s == "truncated") return Policy::kTruncated;
  if (s == "bestline") return Policy::kBestline;
  throw PandoraError("BadInput", "unknown policy '" + s + "'");
}

std::string policy_to_string(Policy p) {
  switch (p) {
    case Policy::kLine: return "line";
    case Policy::kMultiline: return "multiline";
    case Policy::kForest: return "forest";
    case Policy::kTruncated: return "truncated";
    case Policy::kBestline: return "bestline";
  }
  return "unknown";
}

nlohmann::json sim_report_to_json(const SimReport& r) {
  return nlohmann::json{{"policy", r.policy},   {"trials", r.trials}, {"mean", r.mean},
                        {"stderr", r.stderr_},  {"ci95", {r.ci_lo, r.ci_hi}},
                        {"seed", r.seed}};
}

Realization sample_realization(const Instance& inst, std::uint64_t trial_seed) {
  std::mt19937_64 rng(trial_seed);
  Realization real;
  real.value_idx.assign(inst.box_count(), -1);
  for (int b : inst.topo_order) {
    int cond = inst.is_root(b) ? kStartCond : real.value_idx[inst.parent[b]];
    real.value_idx[b] = sample_index(rng, inst.cond_dist(b, cond));
  }
  return real;
}

namespace {

// Deterministic order-insensitive reduction.
double pairwise_sum(const std::vector<double>& xs, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += xs[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(xs, lo, mid) + pairwise_sum(xs, mid, hi);
}

using Runner = std::function<double(const Realization&)>;

// Restricts a realization of the full instance to a sub-instance by id.
Realization project_realization(const Instance& full, const Instance& sub,
                                const Realization& real) {
  Realization out;
  out.value_idx.assign(sub.box_count(), -1);
  for (int b = 0; b < sub.box_count(); ++b) {
    out.value_idx[b] = real.value_idx[full.index_of.at(sub.boxes[b].id)];
  }
  return out;
}

Runner make_runner(const Instance& inst, Policy policy, double delta,
                   std::vector<std::shared_ptr<void>>& keep_alive) {
  switch (policy) {
    case Policy::kLine: {
      std::vector<std::vector<int>> lines = decompose_lines(inst);
      if (lines.size() != 1) {
        throw PandoraError("PolicyShapeMismatch", "line policy needs a single-line instance");
      }
      auto table = std::make_shared<PhiTable>(inst, Hyperbox{lines.front()},
                                              *inst.boxes[lines.front().front()].root_dist,
                                              1000000);
      table->grv(0, table->start_cond());  // warm the reservation cache
      keep_alive.push_back(table);
      return [table](const Realization& r) { return run_line_policy(*table, r).payoff; };
    }
    case Policy::kMultiline: {
      auto solver = std::make_shared<MultilineSolver>(inst);
      keep_alive.push_back(solver);
      return [solver](const Realization& r) { return solver->run(r).payoff; };
    }
    case Policy::kForest: {
      auto solver = std::make_shared<ForestSolver>(inst);
      keep_alive.push_back(solver);
      return [solver](const Realization& r) { return solver->run(r).payoff; };
    }
    case Policy::kTruncated: {
      auto truncated = std::make_shared<TruncationResult>(truncate_lines(inst, delta));
      auto solver = std::make_shared<MultilineSolver>(truncated->instance);
      keep_alive.push_back(truncated);
      keep_alive.push_back(solver);
      const Instance* full = &inst;
      return [truncated, solver, full](const Realization& r) {
        return solver->run(project_realization(*full, truncated->instance, r)).payoff;
      };
    }
    case Policy::kBestline: {
      auto best = std::make_shared<BestLineResult>(best_line_half_approx(inst, delta));
      auto table = std::make_shared<PhiTable>(inst, best->path,
                                              *inst.boxes[best->path.boxes.front()].root_dist,
                                              1000000);
      keep_alive.push_back(best);
      keep_alive.push_back(table);
      return [table](const Realization& r) { return run_line_policy(*table, r).payoff; };
    }
  }
  throw PandoraError("BadInput", "unhandled policy");
}

}  // namespace

SimReport monte_carlo_eval(const Instance& inst, Policy policy, int trials,
                           std::uint64_t seed, double delta) {
  if (trials <= 0) throw PandoraError("BadInput", "trials must be positive");

  std::vector<std::shared_ptr<void>> keep_alive;
  Runner runner = make_runner(inst, policy, delta, keep_alive);

  std::vector<double> payoffs(trials);
  for (int t = 0; t < trials; ++t) {
    payoffs[t] = runner(sample_realization(inst, mix_seed(seed, t)));
  }

  SimReport rep;
  rep.policy = policy_to_string(policy);
  rep.trials = trials;
  rep.seed = seed;
  rep.mean = pairwise_sum(payoffs, 0, payoffs.size()) / trials;
  std::vector<double> sq(trials);
  for (int t = 0; t < trials; ++t) sq[t] = (payoffs[t] - rep.mean) * (payoffs[t] - rep.mean);
  double var = trials > 1 ? pairwise_sum(sq, 0, sq.size()) / (trials - 1) : 0.0;
  rep.stderr_ = std::sqrt(var / trials);
  rep.ci_lo = rep.mean - 1.96 * rep.stderr_;
  rep.ci_hi = rep.mean + 1.96 * rep.stderr_;
  return rep;
}

nlohmann::json compare_policies(const Instance& inst, int trials, std::uint64_t seed,
                                double delta) {
  nlohmann::json out;

  const bool lines = is_union_of_lines(inst);
  Policy exact_policy = lines ? Policy::kMultiline : Policy::kForest;
  out["fa_exact"] = expected_payoff_forest(inst);
  out["fa_simulated"] = sim_report_to_json(monte_carlo_eval(inst, exact_policy, trials, seed, delta));
  out["oracle_fa"] = oracle::brute_force_optimal(inst);

  oracle::PaResult pa = oracle::best_pa_value(inst);
  nlohmann::json pa_order = nlohmann::json::array();
  for (int b : pa.order) pa_order.push_back(inst.boxes[b].id);
  out["best_pa"] = {{"value", pa.value}, {"order", pa_order}};

  oracle::NaResult na = oracle::best_na_value(inst);
  nlohmann::json na_set = nlohmann::json::array();
  for (int b : na.chosen) na_set.push_back(inst.boxes[b].id);
  out["best_na"] = {{"value", na.value}, {"set", na_set}};

  // The static rows need irreducible, aperiodic chains on top of the
  // static-transition flag; report why they are missing otherwise.
  if (inst.static_transition && lines) {
    try {
      TruncationResult tr = truncate_lines(inst, delta);
      out["truncated"] = {{"t_delta", tr.t_delta},
                          {"value", expected_payoff_multiline(tr.instance)},
                          {"simulated", sim_report_to_json(monte_carlo_eval(
                                            inst, Policy::kTruncated, trials, seed, delta))}};
    } catch (const PandoraError& e) {
      out["truncated"] = {{"unavailable", e.code()}};
    }
  }
  if (inst.static_transition) {
    try {
      BestLineResult bl = best_line_half_approx(inst, delta);
      out["best_line"] = {{"path", bl.ids}, {"value", bl.value}, {"t_delta", bl.t_delta}};
    } catch (const PandoraError& e) {
      out["best_line"] = {{"unavailable", e.code()}};
    }
  }
  return out;
}

}  // namespace pandora
