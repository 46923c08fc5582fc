#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pandora/engine.hpp"
#include "pandora/multiline_solver.hpp"

namespace pandora {

/// Subtree rooted at a deepest branch vertex; everything strictly below the
/// root is a union of lines.
struct MinimalTree {
  int root = -1;                 // vertex id in the contracted graph
  std::vector<int> vertices;     // root first, then the subtree
};

/// A contracted subtree's payoff law as a function of the reward level x
/// held when its exploration starts: play is constant between adjacent
/// breakpoints of the underlying value function, so one random-cost box per
/// piece represents it exactly. boxes[i] covers [cuts[i-1], cuts[i]) with
/// boxes.front() extending to -infinity.
struct PiecewiseContraction {
  std::vector<double> cuts;
  std::vector<RandomCostBox> boxes;  // cuts.size() + 1 entries

  const RandomCostBox& at(double x) const;
};

/// Working graph for iterative contraction. Vertices are original boxes
/// plus synthetic leaves; a synthetic leaf stands for a contracted subtree
/// and carries, per possible parent state, the piecewise payoff law above.
struct ContractedVertex {
  int original_box = -1;  // -1 for synthetic vertices
  std::string label;
  std::vector<PiecewiseContraction> pieces_by_cond;  // synthetic only
  bool synthetic() const { return original_box < 0; }
};

/// Result of contracting a minimal tree: the exact piecewise law per root
/// state, plus the single box anchored at the reward level max(0, state) --
/// the law seen by a search that opens the root fresh and then explores.
struct SyntheticContraction {
  std::vector<PiecewiseContraction> by_cond;
  std::vector<RandomCostBox> anchored;
};

struct ContractedGraph {
  const Instance* inst = nullptr;
  std::vector<ContractedVertex> vertices;
  std::vector<int> parent;                 // -1 for roots
  std::vector<std::vector<int>> children;

  int add_synthetic(int parent_vertex, std::string label,
                    std::vector<PiecewiseContraction> pieces);
};

ContractedGraph make_contracted_graph(const Instance& inst);

/// Every subtree rooted at a deepest branch vertex (out-degree >= 2 with no
/// branch vertex strictly below). Empty iff the graph is a union of lines.
std::vector<MinimalTree> find_minimal_trees(const ContractedGraph& graph);

/// Contracts everything below the minimal tree's root: per root state, the
/// payoff law of optimal play over the root's children subtrees.
SyntheticContraction contract_minimal_tree(const ContractedGraph& graph,
                                           const MinimalTree& tree);

/// Replaces the subtrees below tree.root with one synthetic leaf carrying
/// the contraction.
void apply_contraction(ContractedGraph& graph, const MinimalTree& tree,
                       SyntheticContraction contraction, std::string label);

/// Reservation value of the (possibly synthetic-terminated) line starting
/// at `line[level]` conditioned on the previous observation. Used to
/// cross-check the contraction cascade against the direct engine route.
double contracted_line_sigma(const ContractedGraph& graph, const std::vector<int>& line,
                             int level, int cond);

/// Runs the full contraction loop and reports each step; the result's
/// "lines" carry the final reservation values of every remaining root.
nlohmann::json contraction_cascade(const Instance& inst);

/// Solver for forest instances: policy, reservation values and exact
/// expected payoff, all driven by subtree reservation values.
class ForestSolver {
 public:
  explicit ForestSolver(const Instance& inst, std::size_t memo_cap = 10000000);

  const Instance& instance() const { return *inst_; }
  GrvEngine& engine() { return engine_; }

  /// Reservation values of every available box given the opened set and the
  /// observed values (both keyed by box id). The opened set must respect
  /// precedence.
  std::map<std::string, double> grv_map(const std::set<std::string>& opened,
                                        const std::map<std::string, int>& info);

  /// Opens the available box with the highest reservation value while it
  /// beats the max in hand; ties break on lexicographic box id.
  PolicyOutcome run(const Realization& real);

  double expected_payoff();

 private:
  const Instance* inst_;
  GrvEngine engine_;
};

/// One-shot conveniences.
std::map<std::string, double> grv_forest(const Instance& inst,
                                         const std::set<std::string>& opened,
                                         const std::map<std::string, int>& info);
PolicyOutcome run_forest_policy(const Instance& inst, const Realization& real);
double expected_payoff_forest(const Instance& inst, std::size_t memo_cap = 10000000);

}  // namespace pandora
