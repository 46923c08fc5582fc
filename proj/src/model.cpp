#include "pandora/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace pandora {

namespace {

bool is_prob_vector(const std::vector<double>& v, std::string* why) {
  double sum = 0.0;
  for (double p : v) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kProbTol) {
      if (why) *why = "entry " + std::to_string(p) + " outside [0,1]";
      return false;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    std::ostringstream os;
    os << "sums to " << sum << " (expected 1 within 1e-12)";
    if (why) *why = os.str();
    return false;
  }
  return true;
}

}  // namespace

const std::vector<double>& Instance::cond_dist(int b, int cond) const {
  if (cond == kStartCond) {
    return boxes[b].root_dist->probs;
  }
  return inbound[b]->rows[cond];
}

std::vector<Violation> check_instance(const Instance& raw) {
  std::vector<Violation> out;
  const int k = raw.grid.size();

  if (k < 1) {
    out.push_back({"UnsortedGrid", "value grid is empty"});
  }
  for (int j = 0; j < k; ++j) {
    if (!std::isfinite(raw.grid.values[j])) {
      out.push_back({"UnsortedGrid", "grid value at position " + std::to_string(j) + " is not finite"});
    }
    if (j > 0 && !(raw.grid.values[j - 1] < raw.grid.values[j])) {
      out.push_back({"UnsortedGrid", "grid values not strictly increasing at position " + std::to_string(j)});
    }
  }

  std::unordered_map<std::string, int> index;
  for (int b = 0; b < static_cast<int>(raw.boxes.size()); ++b) {
    const BoxSpec& box = raw.boxes[b];
    if (index.count(box.id)) {
      out.push_back({"DuplicateBoxId", "box id '" + box.id + "' appears twice"});
    }
    index[box.id] = b;
    if (!std::isfinite(box.cost) || box.cost < 0.0) {
      out.push_back({"BadCost", "box '" + box.id + "' has cost " + std::to_string(box.cost)});
    }
  }

  for (const auto& [tid, tm] : raw.transitions) {
    if (static_cast<int>(tm.rows.size()) != k) {
      out.push_back({"BadDistribution", "transition '" + tid + "' has " + std::to_string(tm.rows.size()) +
                                            " rows (expected " + std::to_string(k) + ")"});
      continue;
    }
    for (int i = 0; i < k; ++i) {
      if (static_cast<int>(tm.rows[i].size()) != k) {
        out.push_back({"BadDistribution", "transition '" + tid + "' row " + std::to_string(i) + " has wrong length"});
        continue;
      }
      std::string why;
      if (!is_prob_vector(tm.rows[i], &why)) {
        out.push_back({"BadDistribution", "transition '" + tid + "' row " + std::to_string(i) + " " + why});
      }
    }
  }

  std::vector<int> indegree(raw.boxes.size(), 0);
  for (const EdgeSpec& e : raw.edges) {
    auto fit = index.find(e.from);
    auto tit = index.find(e.to);
    if (fit == index.end()) out.push_back({"UnknownBox", "edge references unknown box '" + e.from + "'"});
    if (tit == index.end()) out.push_back({"UnknownBox", "edge references unknown box '" + e.to + "'"});
    if (!raw.transitions.count(e.transition)) {
      out.push_back({"UnknownTransition", "edge " + e.from + "->" + e.to + " references unknown transition '" +
                                              e.transition + "'"});
    }
    if (tit != index.end()) ++indegree[tit->second];
  }

  for (int b = 0; b < static_cast<int>(raw.boxes.size()); ++b) {
    if (indegree[b] > 1) {
      out.push_back({"NotAForest", "box '" + raw.boxes[b].id + "' has in-degree " + std::to_string(indegree[b])});
    }
    const bool is_root = indegree[b] == 0;
    const bool has_dist = raw.boxes[b].root_dist.has_value();
    if (is_root && !has_dist) {
      out.push_back({"MissingRootDist", "root box '" + raw.boxes[b].id + "' has no root_dist"});
    }
    if (!is_root && has_dist) {
      out.push_back({"SpuriousRootDist", "non-root box '" + raw.boxes[b].id + "' carries a root_dist"});
    }
    if (has_dist) {
      std::string why;
      if (static_cast<int>(raw.boxes[b].root_dist->probs.size()) != k) {
        out.push_back({"BadDistribution", "root_dist of '" + raw.boxes[b].id + "' has wrong length"});
      } else if (!is_prob_vector(raw.boxes[b].root_dist->probs, &why)) {
        out.push_back({"BadDistribution", "root_dist of '" + raw.boxes[b].id + "' " + why});
      }
    }
  }

  // Cycle detection: with in-degree <= 1 a Kahn pass leaves exactly the
  // vertices on directed cycles unprocessed.
  if (out.empty()) {
    std::vector<int> deg = indegree;
    std::deque<int> queue;
    for (int b = 0; b < static_cast<int>(raw.boxes.size()); ++b) {
      if (deg[b] == 0) queue.push_back(b);
    }
    std::vector<std::vector<int>> kids(raw.boxes.size());
    for (const EdgeSpec& e : raw.edges) {
      kids[index.at(e.from)].push_back(index.at(e.to));
    }
    int seen = 0;
    while (!queue.empty()) {
      int b = queue.front();
      queue.pop_front();
      ++seen;
      for (int c : kids[b]) {
        if (--deg[c] == 0) queue.push_back(c);
      }
    }
    if (seen != static_cast<int>(raw.boxes.size())) {
      out.push_back({"NotAForest", "precedence graph contains a cycle"});
    }
  }

  return out;
}

Instance validate_instance(Instance raw) {
  std::vector<Violation> violations = check_instance(raw);
  if (!violations.empty()) {
    throw ValidationError(std::move(violations));
  }

  const int n = raw.box_count();
  raw.parent.assign(n, -1);
  raw.children.assign(n, {});
  raw.inbound.assign(n, nullptr);
  raw.index_of.clear();
  for (int b = 0; b < n; ++b) raw.index_of[raw.boxes[b].id] = b;

  for (const EdgeSpec& e : raw.edges) {
    int from = raw.index_of.at(e.from);
    int to = raw.index_of.at(e.to);
    raw.parent[to] = from;
    raw.children[from].push_back(to);
    raw.inbound[to] = &raw.transitions.at(e.transition);
  }
  for (auto& kids : raw.children) std::sort(kids.begin(), kids.end());

  raw.topo_order.clear();
  std::deque<int> queue;
  for (int b = 0; b < n; ++b) {
    if (raw.parent[b] < 0) queue.push_back(b);
  }
  while (!queue.empty()) {
    int b = queue.front();
    queue.pop_front();
    raw.topo_order.push_back(b);
    for (int c : raw.children[b]) queue.push_back(c);
  }

  raw.component.assign(n, -1);
  int comp = 0;
  for (int b : raw.topo_order) {
    raw.component[b] = raw.parent[b] < 0 ? comp++ : raw.component[raw.parent[b]];
  }

  raw.static_transition = true;
  std::vector<const TransitionMatrix*> comp_matrix(comp, nullptr);
  for (int b = 0; b < n; ++b) {
    if (raw.inbound[b] == nullptr) continue;
    const TransitionMatrix*& slot = comp_matrix[raw.component[b]];
    if (slot == nullptr) {
      slot = raw.inbound[b];
    } else if (slot != raw.inbound[b] && slot->rows != raw.inbound[b]->rows) {
      raw.static_transition = false;
    }
  }

  return raw;
}

std::vector<RewardDistribution> propagate_marginals(const Instance& inst) {
  return propagate_marginals(inst, inst.topo_order);
}

std::vector<RewardDistribution> propagate_marginals(const Instance& inst,
                                                    const std::vector<int>& order) {
  const int k = inst.value_count();
  std::vector<RewardDistribution> out(inst.box_count());
  for (int b : order) {
    if (inst.is_root(b)) {
      out[b] = *inst.boxes[b].root_dist;
      continue;
    }
    const RewardDistribution& prev = out[inst.parent[b]];
    const TransitionMatrix& tm = *inst.inbound[b];
    std::vector<double> next(k, 0.0);
    for (int i = 0; i < k; ++i) {
      if (prev.probs[i] == 0.0) continue;
      for (int j = 0; j < k; ++j) next[j] += prev.probs[i] * tm.rows[i][j];
    }
    out[b].probs = std::move(next);
  }
  return out;
}

std::map<std::string, RewardDistribution> propagate_marginals_by_id(const Instance& inst) {
  std::vector<RewardDistribution> vec = propagate_marginals(inst);
  std::map<std::string, RewardDistribution> out;
  for (int b = 0; b < inst.box_count(); ++b) out[inst.boxes[b].id] = vec[b];
  return out;
}

bool is_union_of_lines(const Instance& inst) {
  for (int b = 0; b < inst.box_count(); ++b) {
    if (inst.children[b].size() > 1) return false;
  }
  return true;
}

std::vector<std::vector<int>> decompose_lines(const Instance& inst) {
  if (!is_union_of_lines(inst)) {
    throw PandoraError("PolicyShapeMismatch", "instance is not a union of directed lines");
  }
  std::vector<std::vector<int>> lines;
  for (int b = 0; b < inst.box_count(); ++b) {
    if (!inst.is_root(b)) continue;
    std::vector<int> line{b};
    int cur = b;
    while (!inst.children[cur].empty()) {
      cur = inst.children[cur].front();
      line.push_back(cur);
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<double> make_xgrid(const ValueGrid& grid) {
  std::vector<double> xs = grid.values;
  xs.push_back(0.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace pandora
