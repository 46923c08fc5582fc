#include "pandora/forest_solver.hpp"

#include <algorithm>
#include <cmath>

namespace pandora {

namespace {

long long cost_key(double cost) { return std::llround(cost * 1e12); }

using AtomMap = std::map<std::pair<double, long long>, std::pair<double, double>>;

void add_atom(AtomMap& merged, double reward, double cost, double prob) {
  auto& slot = merged[{reward, cost_key(cost)}];
  if (slot.second == 0.0) slot.first = cost;
  slot.second += prob;
}

RandomCostBox finish_atoms(AtomMap&& merged) {
  RandomCostBox box;
  box.atoms.reserve(merged.size());
  for (const auto& [key, val] : merged) box.atoms.push_back({key.first, val.first, val.second});
  return box;
}

}  // namespace

const RandomCostBox& PiecewiseContraction::at(double x) const {
  std::size_t idx = std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin();
  return boxes[idx];
}

int ContractedGraph::add_synthetic(int parent_vertex, std::string label,
                                   std::vector<PiecewiseContraction> pieces) {
  ContractedVertex v;
  v.original_box = -1;
  v.label = std::move(label);
  v.pieces_by_cond = std::move(pieces);
  vertices.push_back(std::move(v));
  parent.push_back(parent_vertex);
  children.emplace_back();
  int id = static_cast<int>(vertices.size()) - 1;
  children[parent_vertex].push_back(id);
  return id;
}

ContractedGraph make_contracted_graph(const Instance& inst) {
  ContractedGraph g;
  g.inst = &inst;
  g.vertices.resize(inst.box_count());
  for (int b = 0; b < inst.box_count(); ++b) {
    g.vertices[b].original_box = b;
    g.vertices[b].label = inst.boxes[b].id;
  }
  g.parent = inst.parent;
  g.children = inst.children;
  return g;
}

namespace {

void collect_subtree(const ContractedGraph& g, int v, std::vector<int>& out) {
  out.push_back(v);
  for (int c : g.children[v]) collect_subtree(g, c, out);
}

// Returns true iff the subtree rooted at v contains a branch vertex;
// appends minimal-tree roots (deepest branch vertices) found along the way.
bool scan_branches(const ContractedGraph& g, int v, std::vector<int>& roots) {
  bool below = false;
  for (int c : g.children[v]) below |= scan_branches(g, c, roots);
  if (g.children[v].size() >= 2 && !below) {
    roots.push_back(v);
  }
  return below || g.children[v].size() >= 2;
}

}  // namespace

std::vector<MinimalTree> find_minimal_trees(const ContractedGraph& graph) {
  std::vector<int> roots;
  for (int v = 0; v < static_cast<int>(graph.vertices.size()); ++v) {
    if (graph.parent[v] < 0 && graph.vertices[v].original_box >= 0) {
      scan_branches(graph, v, roots);
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<MinimalTree> out;
  for (int r : roots) {
    MinimalTree t;
    t.root = r;
    collect_subtree(graph, r, t.vertices);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

// Exact value of the (possibly synthetic-terminated) line suffix at an
// arbitrary max-reward level x.
double line_value_at(const ContractedGraph& g, const std::vector<int>& line, int level,
                     int cond, double x) {
  if (level >= static_cast<int>(line.size())) return x;
  const ContractedVertex& v = g.vertices[line[level]];
  const Instance& inst = *g.inst;
  if (v.synthetic()) {
    const RandomCostBox& box = v.pieces_by_cond[cond].at(x);
    double z = 0.0;
    for (const PayoffAtom& a : box.atoms) z += a.prob * (std::max(x, a.reward) - a.cost);
    return std::max(x, z);
  }
  const std::vector<double>& dist = inst.cond_dist(v.original_box, cond);
  double z = -inst.boxes[v.original_box].cost;
  for (int y = 0; y < inst.value_count(); ++y) {
    if (dist[y] == 0.0) continue;
    z += dist[y] * line_value_at(g, line, level + 1, y, std::max(x, inst.grid.values[y]));
  }
  return std::max(x, z);
}

// Breakpoint candidates of the suffix value function: grid values, zero,
// deeper reservation values, and the cuts of any synthetic tail.
void collect_line_candidates(const ContractedGraph& g, const std::vector<int>& line,
                             int level, std::vector<double>& out) {
  for (int j = level + 1; j < static_cast<int>(line.size()); ++j) {
    const ContractedVertex& v = g.vertices[line[j]];
    if (v.synthetic()) {
      for (const PiecewiseContraction& p : v.pieces_by_cond) {
        out.insert(out.end(), p.cuts.begin(), p.cuts.end());
      }
    }
    for (int s = 0; s < g.inst->value_count(); ++s) {
      out.push_back(contracted_line_sigma(g, line, j, s));
    }
  }
}

}  // namespace

double contracted_line_sigma(const ContractedGraph& graph, const std::vector<int>& line,
                             int level, int cond) {
  std::vector<double> cands = make_xgrid(graph.inst->grid);
  const ContractedVertex& v = graph.vertices[line[level]];
  if (v.synthetic()) {
    const PiecewiseContraction& p = v.pieces_by_cond[cond];
    cands.insert(cands.end(), p.cuts.begin(), p.cuts.end());
  }
  collect_line_candidates(graph, line, level, cands);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  // Value of opening this vertex (and continuing optimally) minus x, in
  // centered form: summands are nonnegative, so the sign at the stopping
  // boundary is exact under row-sum rounding.
  auto h = [&](double x) {
    if (v.synthetic()) {
      const RandomCostBox& box = v.pieces_by_cond[cond].at(x);
      double z = 0.0;
      for (const PayoffAtom& a : box.atoms) {
        z += a.prob * (std::max(0.0, a.reward - x) - a.cost);
      }
      return z;
    }
    const Instance& inst = *graph.inst;
    const std::vector<double>& dist = inst.cond_dist(v.original_box, cond);
    double z = -inst.boxes[v.original_box].cost;
    for (int y = 0; y < inst.value_count(); ++y) {
      if (dist[y] == 0.0) continue;
      double m = std::max(x, inst.grid.values[y]);
      z += dist[y] * (line_value_at(graph, line, level + 1, y, m) - x);
    }
    return z;
  };

  int lo = 0, hi = static_cast<int>(cands.size()) - 1;
  if (h(cands[lo]) <= 0.0) {
    double x1 = cands[lo] - 1.0, x0 = cands[lo] - 2.0;
    double h0 = h(x0), h1 = h(x1);
    return h0 == h1 ? x1 : x0 + h0 * (x1 - x0) / (h0 - h1);
  }
  while (lo + 1 < hi) {
    int mid = (lo + hi) / 2;
    if (h(cands[mid]) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double ha = h(cands[lo]);
  const double hb = h(cands[hi]);
  if (hb == 0.0) return cands[hi];  // exact root at the candidate
  return cands[lo] + ha * (cands[hi] - cands[lo]) / (ha - hb);
}

namespace {

// Enumerates the stopped trajectories of optimal play over the lines below
// a minimal-tree root, with the starting reward level symbolic inside one
// linearity piece [piece_lo, next cut): decisions compare reservation
// values against max(x, m) and resolve symbolically because no threshold
// lies strictly inside the piece.
struct CascadeWalker {
  const ContractedGraph& graph;
  std::vector<std::vector<int>> lines;  // children lines below the root
  double piece_lo = kNoOpen;
  AtomMap merged;
  std::map<std::pair<int, int>, double>* sigma_memo;  // (vertex, cond)

  double line_sigma(int l, int level, int cond) {
    auto key = std::make_pair(lines[l][level], cond);
    auto it = sigma_memo->find(key);
    if (it != sigma_memo->end()) return it->second;
    double s = contracted_line_sigma(graph, lines[l], level, cond);
    sigma_memo->emplace(key, s);
    return s;
  }

  struct Pos {
    int level = 0;
    int cond = 0;
  };

  void walk(std::vector<Pos>& pos, double m, double cost, double prob) {
    int pick = -1;
    double best = kNoOpen;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (pos[l].level >= static_cast<int>(lines[l].size())) continue;
      double s = line_sigma(static_cast<int>(l), pos[l].level, pos[l].cond);
      if (s > best) {
        best = s;
        pick = static_cast<int>(l);
      }
    }
    // max(x, m) >= best resolves symbolically: m >= best, or best <= piece_lo
    // (thresholds never fall strictly inside the piece).
    if (pick < 0 || m >= best || best <= piece_lo) {
      add_atom(merged, m, cost, prob);
      return;
    }

    const Instance& inst = *graph.inst;
    Pos saved = pos[pick];
    const ContractedVertex& v = graph.vertices[lines[pick][saved.level]];
    if (v.synthetic()) {
      // The nested law's cuts are among this walk's cuts, so max(x, m)
      // selects one nested piece for the whole current piece.
      const PiecewiseContraction& p = v.pieces_by_cond[saved.cond];
      const RandomCostBox& box = m > piece_lo ? p.at(m) : p.at(piece_lo);
      for (const PayoffAtom& a : box.atoms) {
        pos[pick] = {saved.level + 1, saved.cond};
        walk(pos, std::max(m, a.reward), cost + a.cost, prob * a.prob);
      }
    } else {
      const std::vector<double>& dist = inst.cond_dist(v.original_box, saved.cond);
      for (int y = 0; y < inst.value_count(); ++y) {
        if (dist[y] == 0.0) continue;
        pos[pick] = {saved.level + 1, y};
        walk(pos, std::max(m, inst.grid.values[y]), cost + inst.boxes[v.original_box].cost,
             prob * dist[y]);
      }
    }
    pos[pick] = saved;
  }
};

std::vector<int> descend_line(const ContractedGraph& g, int top) {
  std::vector<int> line{top};
  int cur = top;
  while (!g.children[cur].empty()) {
    cur = g.children[cur].front();
    line.push_back(cur);
  }
  return line;
}

}  // namespace

SyntheticContraction contract_minimal_tree(const ContractedGraph& graph,
                                           const MinimalTree& tree) {
  const Instance& inst = *graph.inst;
  std::vector<std::vector<int>> lines;
  for (int c : graph.children[tree.root]) lines.push_back(descend_line(graph, c));

  std::map<std::pair<int, int>, double> sigma_memo;

  // Cuts: every breakpoint of any child-line value function.
  std::vector<double> cuts = make_xgrid(inst.grid);
  for (const std::vector<int>& line : lines) {
    const ContractedVertex& head = graph.vertices[line.front()];
    if (head.synthetic()) {
      for (const PiecewiseContraction& p : head.pieces_by_cond) {
        cuts.insert(cuts.end(), p.cuts.begin(), p.cuts.end());
      }
    }
    for (int cond = 0; cond < inst.value_count(); ++cond) {
      cuts.push_back(contracted_line_sigma(graph, line, 0, cond));
    }
    collect_line_candidates(graph, line, 0, cuts);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  SyntheticContraction out;
  out.by_cond.resize(inst.value_count());
  out.anchored.resize(inst.value_count());
  for (int y = 0; y < inst.value_count(); ++y) {
    PiecewiseContraction& pc = out.by_cond[y];
    pc.cuts = cuts;
    pc.boxes.resize(cuts.size() + 1);
    for (std::size_t piece = 0; piece <= cuts.size(); ++piece) {
      CascadeWalker walker{graph, lines, piece == 0 ? kNoOpen : cuts[piece - 1], {},
                           &sigma_memo};
      std::vector<CascadeWalker::Pos> pos(lines.size());
      for (auto& p : pos) p.cond = y;
      walker.walk(pos, kNoOpen, 0.0, 1.0);
      pc.boxes[piece] = finish_atoms(std::move(walker.merged));
    }
    out.anchored[y] = pc.at(std::max(0.0, inst.grid.values[y]));
  }
  return out;
}

void apply_contraction(ContractedGraph& graph, const MinimalTree& tree,
                       SyntheticContraction contraction, std::string label) {
  // Detach the whole below-root subgraph; the synthetic leaf replaces it.
  graph.children[tree.root].clear();
  graph.add_synthetic(tree.root, std::move(label), std::move(contraction.by_cond));
}

namespace {

nlohmann::json atoms_to_json(const RandomCostBox& box) {
  nlohmann::json arr = nlohmann::json::array();
  for (const PayoffAtom& a : box.atoms) {
    arr.push_back({is_no_open(a.reward) ? nlohmann::json(nullptr) : nlohmann::json(a.reward),
                   a.cost, a.prob});
  }
  return arr;
}

}  // namespace

nlohmann::json contraction_cascade(const Instance& inst) {
  ContractedGraph graph = make_contracted_graph(inst);
  nlohmann::json steps = nlohmann::json::array();
  int synth_counter = 0;
  for (;;) {
    std::vector<MinimalTree> minimal = find_minimal_trees(graph);
    if (minimal.empty()) break;
    for (const MinimalTree& tree : minimal) {
      SyntheticContraction contraction = contract_minimal_tree(graph, tree);
      nlohmann::json step;
      step["root"] = graph.vertices[tree.root].label;
      step["vertices"] = nlohmann::json::array();
      for (int v : tree.vertices) step["vertices"].push_back(graph.vertices[v].label);
      step["atoms_by_state"] = nlohmann::json::object();
      for (int y = 0; y < inst.value_count(); ++y) {
        step["atoms_by_state"][std::to_string(inst.grid.values[y])] =
            atoms_to_json(contraction.anchored[y]);
      }
      steps.push_back(std::move(step));
      apply_contraction(graph, tree, std::move(contraction),
                        "v^" + std::to_string(synth_counter++));
    }
  }

  nlohmann::json lines = nlohmann::json::array();
  for (int v = 0; v < static_cast<int>(graph.vertices.size()); ++v) {
    if (graph.parent[v] >= 0 || graph.vertices[v].original_box < 0) continue;
    std::vector<int> line = descend_line(graph, v);
    nlohmann::json jl;
    jl["boxes"] = nlohmann::json::array();
    for (int u : line) jl["boxes"].push_back(graph.vertices[u].label);
    jl["grv"] = contracted_line_sigma(graph, line, 0, kStartCond);
    lines.push_back(std::move(jl));
  }
  return nlohmann::json{{"steps", steps}, {"lines", lines}};
}

ForestSolver::ForestSolver(const Instance& inst, std::size_t memo_cap)
    : inst_(&inst), engine_(inst, memo_cap) {}

std::map<std::string, double> ForestSolver::grv_map(const std::set<std::string>& opened,
                                                    const std::map<std::string, int>& info) {
  std::vector<int> value(inst_->box_count(), -1);
  for (const std::string& id : opened) {
    auto it = inst_->index_of.find(id);
    if (it == inst_->index_of.end()) throw PandoraError("UnknownBox", "opened box '" + id + "'");
    int b = it->second;
    int p = inst_->parent[b];
    if (p >= 0 && !opened.count(inst_->boxes[p].id)) {
      throw PandoraError("BadInfoSet", "opened set is not downward-closed at '" + id + "'");
    }
    auto vit = info.find(id);
    if (vit == info.end()) throw PandoraError("BadInfoSet", "no observed value for '" + id + "'");
    value[b] = vit->second;
  }

  std::map<std::string, double> out;
  for (int b = 0; b < inst_->box_count(); ++b) {
    if (value[b] >= 0) continue;
    int p = inst_->parent[b];
    if (p >= 0 && value[p] < 0) continue;
    out[inst_->boxes[b].id] = engine_.sigma(b, p >= 0 ? value[p] : kStartCond);
  }
  return out;
}

PolicyOutcome ForestSolver::run(const Realization& real) {
  PolicyOutcome out;
  std::vector<int> value(inst_->box_count(), -1);
  double x = 0.0;
  for (;;) {
    int pick = -1;
    double best = kNoOpen;
    for (int b = 0; b < inst_->box_count(); ++b) {
      if (value[b] >= 0) continue;
      int p = inst_->parent[b];
      if (p >= 0 && value[p] < 0) continue;
      double s = engine_.sigma(b, p >= 0 ? value[p] : kStartCond);
      if (s > best ||
          (s == best && pick >= 0 && inst_->boxes[b].id < inst_->boxes[pick].id)) {
        best = s;
        pick = b;
      }
    }
    if (pick < 0 || x >= best) break;

    const int y = real.value_idx[pick];
    const double vy = inst_->grid.values[y];
    value[pick] = y;
    out.opened.push_back(pick);
    out.total_cost += inst_->boxes[pick].cost;
    out.max_observed = std::max(out.max_observed, vy);
    x = std::max(x, vy);
    out.trace.push_back({inst_->component[pick], inst_->boxes[pick].id, best, vy, x,
                         out.total_cost});
  }
  out.payoff = x - out.total_cost;
  return out;
}

double ForestSolver::expected_payoff() { return engine_.expected_payoff(); }

std::map<std::string, double> grv_forest(const Instance& inst,
                                         const std::set<std::string>& opened,
                                         const std::map<std::string, int>& info) {
  ForestSolver solver(inst);
  return solver.grv_map(opened, info);
}

PolicyOutcome run_forest_policy(const Instance& inst, const Realization& real) {
  ForestSolver solver(inst);
  return solver.run(real);
}

double expected_payoff_forest(const Instance& inst, std::size_t memo_cap) {
  ForestSolver solver(inst, memo_cap);
  return solver.expected_payoff();
}

}  // namespace pandora
