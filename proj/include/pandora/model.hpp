#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pandora/errors.hpp"

namespace pandora {

/// Conditioning marker for a box without an opened predecessor: the box draws
/// its reward from its own root distribution.
constexpr int kStartCond = -1;

/// Probability sums must match 1 within this tolerance to validate.
constexpr double kProbTol = 1e-12;

/// Tolerance for propagated (multiplied-through) probability vectors.
constexpr double kPropagatedTol = 1e-10;

/// Ordered reward levels v_1 < ... < v_k shared by every box.
struct ValueGrid {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  double max_value() const { return values.back(); }
};

/// Probability vector over the value grid.
struct RewardDistribution {
  std::vector<double> probs;
};

/// Row-stochastic k-by-k matrix; rows[i][j] is the chance of moving from
/// value i to value j across one edge.
struct TransitionMatrix {
  std::string id;
  std::vector<std::vector<double>> rows;
};

struct BoxSpec {
  std::string id;
  double cost = 0.0;
  std::optional<RewardDistribution> root_dist;  // present exactly for roots
};

struct EdgeSpec {
  std::string from;
  std::string to;
  std::string transition;
};

/// A validated problem instance. The topology fields (parent, children,
/// inbound, topo_order) are derived by validate_instance and the object is
/// immutable afterwards; concurrent readers may share it freely.
struct Instance {
  ValueGrid grid;
  std::vector<BoxSpec> boxes;
  std::vector<EdgeSpec> edges;
  std::map<std::string, TransitionMatrix> transitions;

  /// True when all edges within each weakly connected component carry the
  /// same transition matrix. Derived, not part of the file format.
  bool static_transition = false;

  // Derived topology.
  std::vector<int> parent;                       // -1 for roots
  std::vector<std::vector<int>> children;        // sorted by box index
  std::vector<const TransitionMatrix*> inbound;  // nullptr for roots
  std::vector<int> topo_order;
  std::vector<int> component;                    // component id per box
  std::unordered_map<std::string, int> index_of;

  int box_count() const { return static_cast<int>(boxes.size()); }
  int value_count() const { return grid.size(); }

  /// Distribution of box b's reward given the conditioning: kStartCond uses
  /// the box's root distribution, otherwise the inbound transition row.
  const std::vector<double>& cond_dist(int b, int cond) const;

  bool is_root(int b) const { return parent[b] < 0; }
};

/// Assignment of one grid index to every box.
struct Realization {
  std::vector<int> value_idx;
};

/// Non-throwing structural check; empty result means the data is valid.
std::vector<Violation> check_instance(const Instance& raw);

/// Validates and finalizes an instance: verifies the forest property,
/// row-stochasticity, root distributions and the grid ordering, then fills
/// the derived topology. Throws ValidationError listing all violations.
Instance validate_instance(Instance raw);

/// Marginal reward distribution of every box, computed root-down.
std::vector<RewardDistribution> propagate_marginals(const Instance& inst);

/// Same computation along an explicit topological order.
std::vector<RewardDistribution> propagate_marginals(const Instance& inst,
                                                    const std::vector<int>& order);

/// Marginals keyed by box id.
std::map<std::string, RewardDistribution> propagate_marginals_by_id(const Instance& inst);

/// Splits the instance into directed lines. Throws PandoraError
/// ("PolicyShapeMismatch") when some component is not a path.
std::vector<std::vector<int>> decompose_lines(const Instance& inst);

/// True when every component of the instance is a directed path.
bool is_union_of_lines(const Instance& inst);

/// The x-grid used by the solvers: {0} together with every grid value,
/// sorted and deduplicated.
std::vector<double> make_xgrid(const ValueGrid& grid);

}  // namespace pandora
