#include "pandora/static_transition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace pandora {

namespace {

std::vector<std::vector<bool>> positive_closure(const TransitionMatrix& P) {
  const int k = static_cast<int>(P.rows.size());
  std::vector<std::vector<bool>> reach(k, std::vector<bool>(k, false));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) reach[i][j] = P.rows[i][j] > 0.0;
  }
  for (int m = 0; m < k; ++m) {
    for (int i = 0; i < k; ++i) {
      if (!reach[i][m]) continue;
      for (int j = 0; j < k; ++j) {
        if (reach[m][j]) reach[i][j] = true;
      }
    }
  }
  return reach;
}

}  // namespace

std::pair<bool, bool> check_irreducible_aperiodic(const TransitionMatrix& P) {
  const int k = static_cast<int>(P.rows.size());
  std::vector<std::vector<bool>> reach = positive_closure(P);

  bool irreducible = true;
  for (int i = 0; i < k && irreducible; ++i) {
    for (int j = 0; j < k; ++j) {
      if (!reach[i][j]) {
        irreducible = false;
        break;
      }
    }
  }

  // Aperiodicity per strongly connected class: gcd over intra-class edges
  // (u,v) of level[u] + 1 - level[v] with BFS levels from a base state.
  // States on no cycle are trivially aperiodic.
  bool aperiodic = true;
  std::vector<int> scc(k, -1);
  int scc_count = 0;
  for (int i = 0; i < k; ++i) {
    if (scc[i] >= 0) continue;
    scc[i] = scc_count;
    for (int j = i + 1; j < k; ++j) {
      if (scc[j] < 0 && reach[i][j] && reach[j][i]) scc[j] = scc_count;
    }
    ++scc_count;
  }
  for (int c = 0; c < scc_count; ++c) {
    std::vector<int> members;
    for (int i = 0; i < k; ++i) {
      if (scc[i] == c) members.push_back(i);
    }
    bool has_cycle = false;
    for (int u : members) {
      if (reach[u][u]) has_cycle = true;
    }
    if (!has_cycle) continue;  // no cycle through these states

    std::vector<int> level(k, -1);
    std::vector<int> queue{members.front()};
    level[members.front()] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int u = queue[qi];
      for (int v = 0; v < k; ++v) {
        if (P.rows[u][v] > 0.0 && scc[v] == c && level[v] < 0) {
          level[v] = level[u] + 1;
          queue.push_back(v);
        }
      }
    }
    long long g = 0;
    for (int u : members) {
      for (int v = 0; v < k; ++v) {
        if (P.rows[u][v] > 0.0 && scc[v] == c) {
          g = std::gcd(g, static_cast<long long>(std::abs(level[u] + 1 - level[v])));
        }
      }
    }
    if (g != 1) aperiodic = false;
  }

  return {irreducible, aperiodic};
}

RewardDistribution stationary_distribution(const TransitionMatrix& P) {
  auto [irr, aper] = check_irreducible_aperiodic(P);
  if (!irr) throw PandoraError("NotIrreducible", "transition matrix is not irreducible");
  if (!aper) throw PandoraError("NotAperiodic", "transition matrix is not aperiodic");

  // Solve pi P = pi with the normalization row appended: the first k-1
  // balance equations sum_i pi_i (P[i][j] - delta_ij) = 0 plus sum(pi) = 1.
  const int k = static_cast<int>(P.rows.size());
  std::vector<std::vector<double>> M(k, std::vector<double>(k + 1, 0.0));
  for (int eq = 0; eq + 1 < k; ++eq) {
    for (int i = 0; i < k; ++i) M[eq][i] = P.rows[i][eq] - (i == eq ? 1.0 : 0.0);
  }
  for (int i = 0; i < k; ++i) M[k - 1][i] = 1.0;
  M[k - 1][k] = 1.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(M[r][col]) > std::abs(M[pivot][col])) pivot = r;
    }
    std::swap(M[col], M[pivot]);
    if (M[col][col] == 0.0) throw PandoraError("SingularSystem", "stationary solve failed");
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = M[r][col] / M[col][col];
      if (f == 0.0) continue;
      for (int cc = col; cc <= k; ++cc) M[r][cc] -= f * M[col][cc];
    }
  }
  RewardDistribution pi;
  pi.probs.resize(k);
  for (int i = 0; i < k; ++i) pi.probs[i] = M[i][k] / M[i][i];
  for (double& p : pi.probs) {
    if (p < 0.0 && p > -1e-13) p = 0.0;
  }
  return pi;
}

namespace {

double max_row_tv(const std::vector<std::vector<double>>& M, const std::vector<double>& pi) {
  double worst = 0.0;
  for (const std::vector<double>& row : M) {
    double tv = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) tv += std::abs(row[j] - pi[j]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

std::vector<std::vector<double>> matmul(const std::vector<std::vector<double>>& A,
                                        const std::vector<std::vector<double>>& B) {
  const int k = static_cast<int>(A.size());
  std::vector<std::vector<double>> C(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i) {
    for (int m = 0; m < k; ++m) {
      if (A[i][m] == 0.0) continue;
      for (int j = 0; j < k; ++j) C[i][j] += A[i][m] * B[m][j];
    }
  }
  return C;
}

}  // namespace

StationaryProfile make_profile(const TransitionMatrix& P, int t_cap) {
  StationaryProfile prof;
  prof.pi = stationary_distribution(P);

  std::vector<std::vector<double>> power = P.rows;
  prof.tv.clear();
  prof.tv.push_back(max_row_tv(power, prof.pi.probs));
  for (int t = 2; t <= t_cap; ++t) {
    power = matmul(power, P.rows);
    prof.tv.push_back(max_row_tv(power, prof.pi.probs));
  }
  prof.probed_horizon = t_cap;

  int t_mix = -1;
  for (int t = 1; t <= t_cap; ++t) {
    if (prof.tv[t - 1] <= 0.25) {
      t_mix = t;
      break;
    }
  }
  if (t_mix < 0) {
    throw PandoraError("EnvelopeFailure",
                       "max-row TV distance stays above 1/4 within t_cap=" + std::to_string(t_cap));
  }
  prof.t_mix_quarter = t_mix;

  // alpha: worst observed one-step decay past the quarter mixing time,
  // ignoring values at the floating-point noise floor.
  constexpr double kNoise = 1e-13;
  double alpha = 0.0;
  for (int t = t_mix; t < t_cap; ++t) {
    double a = prof.tv[t - 1];
    double b = prof.tv[t];
    if (a > kNoise && b > 1e-15) alpha = std::max(alpha, b / a);
  }
  if (alpha <= 0.0) {
    prof.C = 1.0;
    prof.alpha = 0.5;  // degenerate decay: the chain mixes exactly
    return prof;
  }
  prof.alpha = std::clamp(alpha, 0.05, 1.0 - 1e-9);

  // The smallest constant covering every distance still above the noise
  // floor; below the floor the envelope is satisfied to machine precision.
  double C = 1e-12;
  double at = 1.0;
  for (int t = 1; t <= t_cap; ++t) {
    at *= prof.alpha;
    if (prof.tv[t - 1] <= kNoise) continue;
    C = std::max(C, prof.tv[t - 1] / at);
  }
  prof.C = C;
  return prof;
}

std::pair<double, double> mixing_constants(const TransitionMatrix& P, int t_cap) {
  StationaryProfile prof = make_profile(P, t_cap);
  return {prof.C, prof.alpha};
}

int truncation_horizon(const StationaryProfile& profile, int j, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw PandoraError("BadInput", "delta must lie in (0,1)");
  }
  double tail = 0.0;
  for (std::size_t i = j; i < profile.pi.probs.size(); ++i) tail += profile.pi.probs[i];
  if (tail <= 0.0) {
    throw PandoraError("ZeroTailMass", "stationary mass at or above the target value is zero");
  }
  const double term1 = 2.0 * profile.C / (tail * (1.0 - profile.alpha));
  // Written as log(1/delta)/log(1 - tail/2) the quotient is negative; the
  // inequality (1 - tail/2)^t <= delta needs ln(delta)/ln(1 - tail/2).
  const double term2 = std::log(delta) / std::log1p(-tail / 2.0);
  const double horizon = std::ceil(std::max(term1, term2));
  if (!(horizon < 1e7)) {
    throw PandoraError("EnvelopeFailure",
                       "truncation horizon " + std::to_string(horizon) + " is unusably large");
  }
  return std::max(1, static_cast<int>(horizon));
}

double StaticPhi::at(double y, int x_state, const ValueGrid& grid) const {
  (void)grid;
  auto it = std::lower_bound(ygrid.begin(), ygrid.end(), y);
  if (it == ygrid.end() || *it != y) {
    throw PandoraError("BadInput", "max level " + std::to_string(y) + " is not on the y-grid");
  }
  return phi[it - ygrid.begin()][x_state];
}

StaticPhi fixed_point_phi(const ValueGrid& grid, const TransitionMatrix& P, double cost,
                          double tol) {
  const int k = grid.size();
  for (int i = 0; i + 1 < k; ++i) {
    if (!(P.rows[i][k - 1] > 0.0)) {
      throw PandoraError("NoTopTransition",
                         "row " + std::to_string(i) + " has no mass on the top value");
    }
  }

  StaticPhi out;
  out.cost = cost;
  out.ygrid = make_xgrid(grid);
  const int ny = static_cast<int>(out.ygrid.size());
  const double vk = grid.max_value();

  // y-grid index of max(y, v_l).
  std::vector<std::vector<int>> up(ny, std::vector<int>(k));
  for (int yi = 0; yi < ny; ++yi) {
    for (int l = 0; l < k; ++l) {
      double m = std::max(out.ygrid[yi], grid.values[l]);
      up[yi][l] = static_cast<int>(
          std::lower_bound(out.ygrid.begin(), out.ygrid.end(), m) - out.ygrid.begin());
    }
  }

  out.phi.assign(ny, std::vector<double>(k));
  for (int yi = 0; yi < ny; ++yi) {
    for (int x = 0; x < k; ++x) out.phi[yi][x] = out.ygrid[yi];
  }

  constexpr int kMaxIter = 1000000;
  std::vector<std::vector<double>> next = out.phi;
  for (int it = 0; it < kMaxIter; ++it) {
    double dist = 0.0;
    for (int yi = 0; yi < ny; ++yi) {
      const double y = out.ygrid[yi];
      for (int x = 0; x < k; ++x) {
        if (y >= vk) {
          next[yi][x] = y;  // boundary: nothing above the top value to find
          continue;
        }
        double cont = -cost;
        for (int l = 0; l < k; ++l) {
          if (P.rows[x][l] == 0.0) continue;
          cont += P.rows[x][l] * out.phi[up[yi][l]][l];
        }
        next[yi][x] = std::max(y, cont);
        dist = std::max(dist, std::abs(next[yi][x] - out.phi[yi][x]));
      }
    }
    std::swap(out.phi, next);
    out.deltas.push_back(dist);
    out.iterations = it + 1;
    if (dist < tol) return out;
  }
  throw PandoraError("EnvelopeFailure", "fixed-point iteration did not converge");
}

double max_reward_tail(const TransitionMatrix& P, const ValueGrid& grid, int start_state,
                       int j, int steps) {
  (void)grid;
  const int k = static_cast<int>(P.rows.size());
  std::vector<double> alive(k, 0.0);
  alive[start_state] = 1.0;
  double reached = 0.0;
  for (int t = 0; t < steps; ++t) {
    std::vector<double> next(k, 0.0);
    for (int i = 0; i < k; ++i) {
      if (alive[i] == 0.0) continue;
      for (int v = 0; v < k; ++v) {
        if (P.rows[i][v] == 0.0) continue;
        if (v >= j) {
          reached += alive[i] * P.rows[i][v];
        } else {
          next[v] += alive[i] * P.rows[i][v];
        }
      }
    }
    alive = std::move(next);
  }
  return reached;
}

const TransitionMatrix& component_matrix(const Instance& inst, int component) {
  if (!inst.static_transition) {
    throw PandoraError("PolicyShapeMismatch", "instance does not have static transitions");
  }
  for (int b = 0; b < inst.box_count(); ++b) {
    if (inst.component[b] == component && inst.inbound[b] != nullptr) {
      return *inst.inbound[b];
    }
  }
  throw PandoraError("NoEdges", "component " + std::to_string(component) + " has no edges");
}

namespace {

struct PooledHorizon {
  int t_delta = 1;
  double C = 0.0;
  double alpha = 0.0;
  double pi_star = 0.0;
  int best_component = -1;  // component attaining pi_star
  std::vector<StationaryProfile> profiles;
  std::vector<int> components;
};

// Pooled constants over every component that has edges; the horizon formula
// uses C = max C_j, alpha = max alpha_j, pi* = max over components of the
// stationary mass on the top value. Profiles are re-probed until the fitted
// envelope covers the horizon they produce.
PooledHorizon pooled_horizon(const Instance& inst, double delta) {
  PooledHorizon out;
  std::set<int> comps;
  for (int b = 0; b < inst.box_count(); ++b) {
    if (inst.inbound[b] != nullptr) comps.insert(inst.component[b]);
  }
  if (comps.empty()) return out;  // no edges anywhere: horizon 1 keeps everything

  int t_cap = 64;
  for (int attempt = 0; attempt < 10; ++attempt) {
    out.profiles.clear();
    out.components.assign(comps.begin(), comps.end());
    for (int c : out.components) {
      out.profiles.push_back(make_profile(component_matrix(inst, c), t_cap));
    }
    out.C = 0.0;
    out.alpha = 0.0;
    out.pi_star = 0.0;
    for (std::size_t i = 0; i < out.profiles.size(); ++i) {
      const StationaryProfile& p = out.profiles[i];
      out.C = std::max(out.C, p.C);
      out.alpha = std::max(out.alpha, p.alpha);
      if (p.pi.probs.back() > out.pi_star) {
        out.pi_star = p.pi.probs.back();
        out.best_component = out.components[i];
      }
    }
    StationaryProfile pooled;
    pooled.pi.probs = {1.0 - out.pi_star, out.pi_star};
    pooled.C = out.C;
    pooled.alpha = out.alpha;
    out.t_delta = truncation_horizon(pooled, 1, delta);
    if (out.t_delta <= t_cap) return out;
    t_cap = out.t_delta + 8;
  }
  throw PandoraError("EnvelopeFailure", "could not certify the envelope up to the horizon");
}

}  // namespace

TruncationResult truncate_lines(const Instance& inst, double delta) {
  std::vector<std::vector<int>> lines = decompose_lines(inst);
  if (!inst.static_transition) {
    throw PandoraError("PolicyShapeMismatch", "instance does not have static transitions");
  }

  PooledHorizon pooled = pooled_horizon(inst, delta);

  Instance raw;
  raw.grid = inst.grid;
  std::set<std::string> used_transitions;
  for (const std::vector<int>& line : lines) {
    for (int i = 0; i < static_cast<int>(line.size()) && i < pooled.t_delta; ++i) {
      raw.boxes.push_back(inst.boxes[line[i]]);
      if (i > 0) {
        const TransitionMatrix* tm = inst.inbound[line[i]];
        raw.edges.push_back({inst.boxes[line[i - 1]].id, inst.boxes[line[i]].id, tm->id});
        used_transitions.insert(tm->id);
      }
    }
  }
  for (const std::string& tid : used_transitions) raw.transitions[tid] = inst.transitions.at(tid);

  TruncationResult res;
  res.instance = validate_instance(std::move(raw));
  res.t_delta = pooled.t_delta;
  res.pooled_C = pooled.C;
  res.pooled_alpha = pooled.alpha;
  res.pi_star = pooled.pi_star;
  return res;
}

BestLineResult best_line_half_approx(const Instance& inst, double delta) {
  if (!inst.static_transition) {
    throw PandoraError("PolicyShapeMismatch", "instance does not have static transitions");
  }

  PooledHorizon pooled = pooled_horizon(inst, delta);

  BestLineResult best;
  best.t_delta = pooled.t_delta;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pooled.profiles.size(); ++i) {
    if (pooled.components[i] == pooled.best_component) best.profile = pooled.profiles[i];
  }

  std::vector<int> path;
  std::vector<std::string> ids;
  auto consider = [&]() {
    Hyperbox hb{path};
    PhiTable table(inst, hb, *inst.boxes[path.front()].root_dist, 1000000);
    double v = expected_payoff_line(table);
    if (v > best.value || (v == best.value && ids < best.ids)) {
      best.value = v;
      best.path = hb;
      best.ids = ids;
    }
  };
  auto dfs = [&](auto&& self, int b) -> void {
    path.push_back(b);
    ids.push_back(inst.boxes[b].id);
    consider();
    if (static_cast<int>(path.size()) < pooled.t_delta) {
      for (int c : inst.children[b]) self(self, c);
    }
    path.pop_back();
    ids.pop_back();
  };
  for (int b = 0; b < inst.box_count(); ++b) {
    if (inst.is_root(b)) dfs(dfs, b);
  }
  return best;
}

}  // namespace pandora
