#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pandora/model.hpp"

namespace pandora {

/// Ground-truth solvers. Deliberately simple and exhaustive: they are the
/// verification backstop for the fast policies, at small instance sizes.
namespace oracle {

struct PaResult {
  double value = 0.0;
  std::vector<int> order;  // box indices, best precedence-feasible order
};

struct NaResult {
  double value = 0.0;
  std::vector<int> chosen;  // box indices, best downward-closed set
};

/// Exact fully-adaptive optimum by backward induction over information sets
/// (opened boxes plus their realized values), memoized. start_max is the
/// reward level already in hand; the outside option is 0.
/// Caps: n <= 12, k <= 15. Throws PandoraError("TooLarge") beyond them.
double brute_force_optimal(const Instance& inst, double start_max = 0.0);

/// Optimal adaptive-stopping value along one fixed precedence-feasible
/// probing order, by backward induction over full prefix realizations.
double fixed_order_value(const Instance& inst, const std::vector<int>& order);

/// Best partially-adaptive value: enumerates every precedence-feasible
/// probing order (n <= 10, at most order_cap orders) and computes
/// fixed_order_value for each.
PaResult best_pa_value(const Instance& inst, std::uint64_t order_cap = 200000);

/// Best non-adaptive value: maximizes E[max(0, max_S R)] - sum of costs over
/// all downward-closed box sets S. Cap n <= 16.
NaResult best_na_value(const Instance& inst);

}  // namespace oracle
}  // namespace pandora
