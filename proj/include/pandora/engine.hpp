#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "pandora/line_solver.hpp"
#include "pandora/model.hpp"

namespace pandora {

/// A frontier entry: a box that may be opened next together with its
/// conditioning (the realized value of its parent, or kStartCond for roots).
struct FrontierBox {
  int box;
  int cond;
};

/// Exact solver for probing a forest by reservation values.
///
/// sigma(b, cond) is the generalized reservation value of the subtree rooted
/// at b, conditioned on the parent's observed value; it does not depend on
/// the current max reward. value(frontier, x) is the exact expected payoff
/// of the optimal policy (open the available box with the highest
/// reservation value while it exceeds the current max) from the given
/// frontier. Both are cached; the caches make the object non-const but
/// logically immutable.
class GrvEngine {
 public:
  explicit GrvEngine(const Instance& inst, std::size_t memo_cap = 10000000);

  const Instance& instance() const { return *inst_; }

  /// Reservation value of subtree(box) given the conditioning.
  double sigma(int box, int cond);

  /// Expected payoff of optimal play over the frontier's subtrees with
  /// current max x. Throws PandoraError("StateSpaceExplosion") past the cap.
  double value(std::vector<FrontierBox> frontier, double x);

  /// Expected payoff of the whole instance from a fresh start.
  double expected_payoff();

  /// Continuation value of opening `box` at max x: -cost + E[value(children..., max(x,y))].
  double open_value(int box, int cond, double x);

  std::vector<FrontierBox> initial_frontier() const;

 private:
  double sigma_impl(int box, int cond);
  void collect_sigma_candidates(int box, std::vector<double>& out);

  const Instance* inst_;
  std::size_t memo_cap_;
  std::vector<std::vector<double>> sigma_;  // [box][cond+1], NaN = unset
  std::unordered_map<std::string, double> memo_;
};

}  // namespace pandora
