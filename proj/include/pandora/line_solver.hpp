#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include <json.hpp>

#include "pandora/model.hpp"

namespace pandora {

/// Sentinel reward meaning "no box was opened". Folds naturally through
/// max(): max(x, kNoOpen) == x.
constexpr double kNoOpen = -std::numeric_limits<double>::infinity();

inline bool is_no_open(double reward) { return reward == kNoOpen; }

/// One outcome of a stopped search: the max observed reward (kNoOpen when
/// nothing was opened), the accumulated cost, and the probability.
struct PayoffAtom {
  double reward;
  double cost;
  double prob;
};

/// A directed path of box indices; consecutive boxes must be connected by
/// instance edges, leftmost box first.
struct Hyperbox {
  std::vector<int> boxes;

  int length() const { return static_cast<int>(boxes.size()); }
};

struct PhiEntry {
  double phi = 0.0;
  bool open = false;
  std::vector<PayoffAtom> atoms;
};

struct PolicyStep {
  int line = 0;
  std::string box;
  double grv = 0.0;
  double observed = 0.0;
  double x_after = 0.0;
  double cost_so_far = 0.0;
};

struct PolicyOutcome {
  std::vector<int> opened;
  double max_observed = kNoOpen;
  double total_cost = 0.0;
  double payoff = 0.0;
  std::vector<PolicyStep> trace;
};

/// The dynamic-programming table of equivalent rewards for one hyperbox,
/// filled back to front. Entries live on the x-grid {0} union V; the table
/// also answers exact off-grid queries and reservation values. Immutable
/// once built except for internal lazily filled caches.
class PhiTable {
 public:
  PhiTable(const Instance& inst, Hyperbox line, RewardDistribution start,
           std::size_t atom_cap);

  const Instance& instance() const { return *inst_; }
  const Hyperbox& line() const { return line_; }
  const std::vector<double>& xgrid() const { return xgrid_; }
  int length() const { return line_.length(); }
  int value_count() const { return k_; }
  /// Conditioning column index used for the start distribution.
  int start_cond() const { return k_; }

  const PhiEntry& entry(int level, int cond, int x_idx) const;
  double phi(int level, int cond, int x_idx) const { return entry(level, cond, x_idx).phi; }
  bool open_indicator(int level, int cond, int x_idx) const { return entry(level, cond, x_idx).open; }

  /// Index of a value in the x-grid (every grid value and 0 are present).
  int xgrid_index_of_value(int value_idx) const { return value_to_x_[value_idx]; }
  int xgrid_index_of_zero() const { return zero_x_; }

  /// Exact equivalent reward at an arbitrary max-reward level x.
  double phi_at(double x, int level, int cond) const;

  /// Exact generalized reservation value of the sub-hyperbox starting at
  /// `level`, conditioned on the previous observation (start_cond() for the
  /// start distribution). Independent of the current max reward.
  double grv(int level, int cond) const;

  /// Distribution over the level's reward given the conditioning.
  const std::vector<double>& level_dist(int level, int cond) const;

 private:
  void build(std::size_t atom_cap);
  double continuation(double x, int level, int cond) const;

  const Instance* inst_;
  Hyperbox line_;
  RewardDistribution start_;
  int k_;
  std::vector<double> xgrid_;
  std::vector<int> value_to_x_;
  int zero_x_;
  std::vector<RewardDistribution> marginal_;          // per level, from start_
  std::vector<std::vector<std::vector<PhiEntry>>> t_;  // [level][cond][x]
  mutable std::vector<std::vector<double>> sigma_;     // lazy, NaN = unset
  mutable std::map<std::pair<double, int>, double> offgrid_;  // (x, level*(k+1)+cond)
};

/// Builds the table for a hyperbox given the distribution of its first box
/// (the box's marginal, or a point mass when conditioning on an observation).
/// Throws PandoraError("AtomExplosion") if merged atom lists exceed the cap.
PhiTable compute_phi_table(const Instance& inst, const Hyperbox& line,
                           const RewardDistribution& start,
                           std::size_t atom_cap = 1000000);

/// Reservation value lookup; cond == table.start_cond() (or kStartCond)
/// addresses the start column.
double grv(const PhiTable& table, int level, int cond);

/// Runs the optimal stopping policy against one realization: open while the
/// table says the current state is worth continuing.
PolicyOutcome run_line_policy(const PhiTable& table, const Realization& real);

/// Expected payoff of the optimal policy from the fresh start: phi(0, start, first box).
double expected_payoff_line(const PhiTable& table);

/// Debug/diff export: {"entries": [{"x","s","i","phi","open","atoms"}]}.
nlohmann::json phi_table_to_json(const PhiTable& table);

}  // namespace pandora
