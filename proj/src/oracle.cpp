#include "pandora/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace pandora::oracle {

namespace {

// Information-set key: 4 bits per box (value index, or 0xF when unopened).
// Fits the documented caps (n <= 12, k <= 5) into one 64-bit word.
std::uint64_t pack_info(const std::vector<int>& values) {
  std::uint64_t key = 0;
  for (int v : values) {
    key = (key << 4) | static_cast<std::uint64_t>(v < 0 ? 0xF : v);
  }
  return key;
}

struct FaSolver {
  const Instance& inst;
  std::unordered_map<std::uint64_t, double> memo;
  std::vector<int> values;  // -1 unopened

  explicit FaSolver(const Instance& i) : inst(i), values(i.box_count(), -1) {}

  // x is a function of the info set (max of start_max and observed values),
  // so memoizing on the packed info set alone is sound.
  double solve(double x) {
    std::uint64_t key = pack_info(values);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    double best = x;
    for (int b = 0; b < inst.box_count(); ++b) {
      if (values[b] >= 0) continue;
      int p = inst.parent[b];
      if (p >= 0 && values[p] < 0) continue;  // precedence
      const std::vector<double>& dist = inst.cond_dist(b, p >= 0 ? values[p] : kStartCond);
      double cont = -inst.boxes[b].cost;
      for (int y = 0; y < inst.value_count(); ++y) {
        if (dist[y] == 0.0) continue;
        values[b] = y;
        cont += dist[y] * solve(std::max(x, inst.grid.values[y]));
        values[b] = -1;
      }
      best = std::max(best, cont);
    }

    memo[key] = best;
    return best;
  }
};

}  // namespace

double brute_force_optimal(const Instance& inst, double start_max) {
  // 4-bit packing of per-box values bounds k; n bounds the key width.
  if (inst.box_count() > 12 || inst.value_count() > 15) {
    throw PandoraError("TooLarge", "brute force caps are n <= 12, k <= 15");
  }
  if (inst.box_count() == 0) return std::max(0.0, start_max);
  FaSolver solver(inst);
  return solver.solve(std::max(0.0, start_max));
}

namespace {

struct PaEnumerator {
  const Instance& inst;
  std::uint64_t order_cap;
  std::uint64_t orders_seen = 0;
  std::vector<int> order;
  std::vector<bool> used;
  double best = 0.0;
  std::vector<int> best_order;

  PaEnumerator(const Instance& i, std::uint64_t cap)
      : inst(i), order_cap(cap), used(i.box_count(), false) {}

  // Optimal adaptive stopping along the fixed order, conditioning on the
  // full observed prefix.
  double stopping_value(std::vector<int>& values, std::size_t depth, double x) {
    if (depth == order.size()) return x;
    int b = order[depth];
    int p = inst.parent[b];
    const std::vector<double>& dist = inst.cond_dist(b, p >= 0 ? values[p] : kStartCond);
    double cont = -inst.boxes[b].cost;
    for (int y = 0; y < inst.value_count(); ++y) {
      if (dist[y] == 0.0) continue;
      values[b] = y;
      cont += dist[y] * stopping_value(values, depth + 1, std::max(x, inst.grid.values[y]));
      values[b] = -1;
    }
    return std::max(x, cont);
  }

  double evaluate() {
    std::vector<int> values(inst.box_count(), -1);
    return stopping_value(values, 0, 0.0);
  }

  void recurse() {
    if (order.size() == static_cast<std::size_t>(inst.box_count())) {
      if (++orders_seen > order_cap) {
        throw PandoraError("TooLarge", "feasible order count exceeds cap " + std::to_string(order_cap));
      }
      double v = evaluate();
      if (v > best || best_order.empty()) {
        best = v;
        best_order = order;
      }
      return;
    }
    for (int b = 0; b < inst.box_count(); ++b) {
      if (used[b]) continue;
      int p = inst.parent[b];
      if (p >= 0 && !used[p]) continue;
      used[b] = true;
      order.push_back(b);
      recurse();
      order.pop_back();
      used[b] = false;
    }
  }
};

}  // namespace

double fixed_order_value(const Instance& inst, const std::vector<int>& order) {
  if (order.size() != static_cast<std::size_t>(inst.box_count())) {
    throw PandoraError("BadInput", "order must cover every box");
  }
  std::vector<bool> seen(inst.box_count(), false);
  for (int b : order) {
    int p = inst.parent[b];
    if (p >= 0 && !seen[p]) {
      throw PandoraError("BadInput", "order violates precedence at '" + inst.boxes[b].id + "'");
    }
    seen[b] = true;
  }
  PaEnumerator e(inst, 1);
  e.order = order;
  return e.evaluate();
}

PaResult best_pa_value(const Instance& inst, std::uint64_t order_cap) {
  if (inst.box_count() > 10) {
    throw PandoraError("TooLarge", "partially-adaptive enumeration caps at n <= 10");
  }
  if (inst.box_count() == 0) return {0.0, {}};
  PaEnumerator e(inst, order_cap);
  e.recurse();
  return {e.best, e.best_order};
}

namespace {

double na_set_value(const Instance& inst, const std::vector<bool>& in_set) {
  const int k = inst.value_count();

  // dist[b][y]: distribution of the max reward over the chosen part of box
  // b's subtree given R_b = y. Chosen sets are parent-closed, so boxes below
  // an unchosen one never contribute. Filled leaves-up.
  std::vector<std::vector<std::vector<double>>> dist(
      inst.box_count(), std::vector<std::vector<double>>(k));
  for (auto it = inst.topo_order.rbegin(); it != inst.topo_order.rend(); ++it) {
    int b = *it;
    if (!in_set[b]) continue;
    for (int y = 0; y < k; ++y) {
      std::vector<double> d(k, 0.0);
      d[y] = 1.0;
      for (int c : inst.children[b]) {
        if (!in_set[c]) continue;
        const std::vector<double>& row = inst.cond_dist(c, y);
        std::vector<double> child(k, 0.0);
        for (int z = 0; z < k; ++z) {
          if (row[z] == 0.0) continue;
          for (int m = 0; m < k; ++m) child[m] += row[z] * dist[c][z][m];
        }
        // max of independent draws via CDF product
        std::vector<double> merged(k, 0.0);
        double cdf_a = 0.0, cdf_b = 0.0, prev = 0.0;
        for (int m = 0; m < k; ++m) {
          cdf_a += d[m];
          cdf_b += child[m];
          merged[m] = cdf_a * cdf_b - prev;
          prev = cdf_a * cdf_b;
        }
        d = std::move(merged);
      }
      dist[b][y] = std::move(d);
    }
  }

  double cost = 0.0;
  bool any = false;
  // CDF of the overall max across chosen trees (independent components).
  std::vector<double> cdf(k, 1.0);
  for (int b = 0; b < inst.box_count(); ++b) {
    if (!in_set[b]) continue;
    cost += inst.boxes[b].cost;
    any = true;
    if (!inst.is_root(b)) continue;
    const std::vector<double>& root = inst.boxes[b].root_dist->probs;
    std::vector<double> tree(k, 0.0);
    for (int y = 0; y < k; ++y) {
      if (root[y] == 0.0) continue;
      for (int m = 0; m < k; ++m) tree[m] += root[y] * dist[b][y][m];
    }
    double acc = 0.0;
    for (int m = 0; m < k; ++m) {
      acc += tree[m];
      cdf[m] *= acc;
    }
  }
  if (!any) return 0.0;
  double expected_max = 0.0;
  double prev = 0.0;
  for (int m = 0; m < k; ++m) {
    double pm = cdf[m] - prev;
    prev = cdf[m];
    expected_max += pm * std::max(0.0, inst.grid.values[m]);
  }
  return expected_max - cost;
}

void enumerate_downward_closed(const Instance& inst, std::size_t pos, std::vector<bool>& in_set,
                               NaResult& best) {
  if (pos == inst.topo_order.size()) {
    double v = na_set_value(inst, in_set);
    if (v > best.value) {
      best.value = v;
      best.chosen.clear();
      for (int b = 0; b < inst.box_count(); ++b) {
        if (in_set[b]) best.chosen.push_back(b);
      }
    }
    return;
  }
  int b = inst.topo_order[pos];
  enumerate_downward_closed(inst, pos + 1, in_set, best);
  int p = inst.parent[b];
  if (p < 0 || in_set[p]) {
    in_set[b] = true;
    enumerate_downward_closed(inst, pos + 1, in_set, best);
    in_set[b] = false;
  }
}

}  // namespace

NaResult best_na_value(const Instance& inst) {
  if (inst.box_count() > 16) {
    throw PandoraError("TooLarge", "non-adaptive enumeration caps at n <= 16");
  }
  NaResult best;  // empty set, value 0
  std::vector<bool> in_set(inst.box_count(), false);
  enumerate_downward_closed(inst, 0, in_set, best);
  return best;
}

}  // namespace pandora::oracle
