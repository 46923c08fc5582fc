#include "pandora/generator.hpp"

#include <cstdio>

#include "pandora/rng.hpp"

namespace pandora {

Shape shape_from_string(const std::string& s) {
  if (s == "line") return Shape::kLine;
  if (s == "multiline") return Shape::kMultiline;
  if (s == "forest") return Shape::kForest;
  throw PandoraError("BadShapeParams", "unknown shape '" + s + "' (expected line|multiline|forest)");
}

std::string shape_to_string(Shape s) {
  switch (s) {
    case Shape::kLine: return "line";
    case Shape::kMultiline: return "multiline";
    case Shape::kForest: return "forest";
  }
  return "unknown";
}

namespace {

std::string box_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "b%03d", i);
  return buf;
}

std::vector<double> random_row(std::mt19937_64& rng, int k) {
  // Strictly positive rows keep every generated chain irreducible and
  // aperiodic, which the static-transition operations require.
  std::vector<double> row(k);
  double sum = 0.0;
  for (int j = 0; j < k; ++j) {
    row[j] = 0.25 / k + uniform01(rng);
    sum += row[j];
  }
  for (double& p : row) p /= sum;
  double fix = 1.0;
  for (int j = 0; j + 1 < k; ++j) fix -= row[j];
  row[k - 1] = fix;  // exact row sum
  return row;
}

TransitionMatrix random_matrix(std::mt19937_64& rng, const std::string& id, int k) {
  TransitionMatrix tm;
  tm.id = id;
  tm.rows.reserve(k);
  for (int i = 0; i < k; ++i) tm.rows.push_back(random_row(rng, k));
  return tm;
}

RewardDistribution random_dist(std::mt19937_64& rng, int k) {
  return RewardDistribution{random_row(rng, k)};
}

}  // namespace

Instance generate_instance(Shape shape, int n, int k, std::uint64_t seed,
                           bool static_matrices) {
  if (n < 1 || k < 1) {
    throw PandoraError("BadShapeParams", "need n >= 1 and k >= 1, got n=" + std::to_string(n) +
                                             " k=" + std::to_string(k));
  }
  std::mt19937_64 rng(splitmix64(seed));

  Instance raw;
  raw.grid.values.resize(k);
  double v = 0.25 + 2.5 * uniform01(rng);
  for (int j = 0; j < k; ++j) {
    raw.grid.values[j] = v;
    v += 0.4 + 3.0 * uniform01(rng);
  }
  const double vmax = raw.grid.values.back();

  // parent[i] < i, or -1 for roots.
  std::vector<int> parent(n, -1);
  switch (shape) {
    case Shape::kLine:
      for (int i = 1; i < n; ++i) parent[i] = i - 1;
      break;
    case Shape::kMultiline: {
      int q = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(3, n)));
      std::vector<int> cut(q - 1);
      for (int& c : cut) c = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      std::sort(cut.begin(), cut.end());
      std::size_t next_cut = 0;
      for (int i = 1; i < n; ++i) {
        if (next_cut < cut.size() && i >= cut[next_cut]) {
          ++next_cut;  // i starts a new line
        } else {
          parent[i] = i - 1;
        }
      }
      break;
    }
    case Shape::kForest: {
      std::vector<int> out_degree(n, 0);
      for (int i = 1; i < n; ++i) {
        if (uniform01(rng) < 0.2) continue;  // new root
        std::vector<int> eligible;
        for (int j = 0; j < i; ++j) {
          if (out_degree[j] < 3) eligible.push_back(j);
        }
        if (eligible.empty()) continue;
        int p = eligible[rng() % eligible.size()];
        parent[i] = p;
        ++out_degree[p];
      }
      break;
    }
  }

  // Component of each box, numbered by root order.
  std::vector<int> comp(n, -1);
  int comp_count = 0;
  for (int i = 0; i < n; ++i) comp[i] = parent[i] < 0 ? comp_count++ : comp[parent[i]];

  std::vector<std::string> comp_matrix_id(comp_count);
  if (static_matrices) {
    for (int c = 0; c < comp_count; ++c) {
      comp_matrix_id[c] = "s" + std::to_string(c);
      raw.transitions[comp_matrix_id[c]] = random_matrix(rng, comp_matrix_id[c], k);
    }
  }

  for (int i = 0; i < n; ++i) {
    BoxSpec box;
    box.id = box_name(i);
    double u = uniform01(rng);
    box.cost = u < 0.08 ? 0.0 : u * u * 0.35 * vmax;
    if (parent[i] < 0) box.root_dist = random_dist(rng, k);
    raw.boxes.push_back(std::move(box));
  }

  for (int i = 0; i < n; ++i) {
    if (parent[i] < 0) continue;
    EdgeSpec e;
    e.from = box_name(parent[i]);
    e.to = box_name(i);
    if (static_matrices) {
      e.transition = comp_matrix_id[comp[i]];
    } else {
      e.transition = "t" + std::to_string(i);
      raw.transitions[e.transition] = random_matrix(rng, e.transition, k);
    }
    raw.edges.push_back(std::move(e));
  }

  return validate_instance(std::move(raw));
}

}  // namespace pandora
