#pragma once

#include <cstddef>
#include <vector>

#include "pandora/engine.hpp"
#include "pandora/line_solver.hpp"
#include "pandora/model.hpp"

namespace pandora {

/// A single box whose (reward, cost) pair is jointly random: the contraction
/// image of a hyperbox or subtree. A reward of kNoOpen marks the outcome
/// where nothing was opened (cost from such atoms still counts, though
/// contractions always produce it with cost 0).
struct RandomCostBox {
  std::vector<PayoffAtom> atoms;
};

/// Reservation value of a random-cost box: the smallest sigma with
/// E[(R - sigma)+] = E[c]. Returns kNoOpen when the box never yields reward
/// and has no cost.
double rcb_grv(const RandomCostBox& box);

/// Execution state of the multi-line policy.
struct FrontierState {
  struct LinePos {
    int next = 0;           // next unopened level
    int cond = kStartCond;  // last observed value index
  };
  std::vector<LinePos> lines;
  double x = 0.0;  // max of 0 and observed values
  double cost = 0.0;
};

/// Reservation value of each line's next box; kNoOpen for exhausted lines.
std::vector<double> current_grv(const FrontierState& state,
                                const std::vector<PhiTable>& tables);

/// Contracts a hyperbox under its optimal stopping policy into a
/// random-cost box. `outside` is the reward level already in hand while the
/// policy runs (0 for a fresh search). Atom rewards cover only rewards
/// observed inside the line.
RandomCostBox contract_line(const PhiTable& table, double outside = 0.0,
                            std::size_t atom_cap = 1000000);

/// Solver for instances whose precedence graph is a union of directed
/// lines. Tables and reservation values are computed once per instance and
/// then shared by policy runs.
class MultilineSolver {
 public:
  explicit MultilineSolver(const Instance& inst, std::size_t atom_cap = 1000000,
                           std::size_t memo_cap = 10000000);

  const Instance& instance() const { return *inst_; }
  const std::vector<Hyperbox>& lines() const { return lines_; }
  const std::vector<PhiTable>& tables() const { return tables_; }

  FrontierState fresh_state() const;

  /// Opens the frontier box with the highest current reservation value
  /// while it exceeds the max in hand (ties: smallest line index).
  PolicyOutcome run(const Realization& real) const;

  /// Exact expected payoff of the policy (memoized frontier recursion).
  double expected_payoff();

  /// Contraction of the whole instance under the optimal policy against a
  /// standing outside offer. open_first forces the first (argmax
  /// reservation) box open even when the policy is exactly indifferent,
  /// selecting the continuing optimum at the indifference point.
  RandomCostBox contract(double outside = 0.0, bool open_first = false,
                         std::size_t atom_cap = 1000000);

 private:
  const Instance* inst_;
  std::vector<Hyperbox> lines_;
  std::vector<PhiTable> tables_;
  GrvEngine engine_;
};

/// One-shot conveniences over MultilineSolver.
PolicyOutcome run_multiline_policy(const Instance& inst, const Realization& real);
double expected_payoff_multiline(const Instance& inst, std::size_t memo_cap = 10000000);
RandomCostBox contract_multiline(const Instance& inst, double outside = 0.0);

}  // namespace pandora
