#include "pandora/multiline_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pandora {

namespace {

long long cost_key(double cost) { return std::llround(cost * 1e12); }

using AtomMap = std::map<std::pair<double, long long>, std::pair<double, double>>;

void add_atom(AtomMap& merged, double reward, double cost, double prob, std::size_t atom_cap) {
  auto& slot = merged[{reward, cost_key(cost)}];
  if (slot.second == 0.0) slot.first = cost;
  slot.second += prob;
  if (merged.size() > atom_cap) {
    throw PandoraError("AtomExplosion",
                       "atom list size " + std::to_string(merged.size()) + " exceeds cap");
  }
}

RandomCostBox finish_atoms(AtomMap&& merged) {
  RandomCostBox box;
  box.atoms.reserve(merged.size());
  for (const auto& [key, val] : merged) box.atoms.push_back({key.first, val.first, val.second});
  return box;
}

}  // namespace

double rcb_grv(const RandomCostBox& box) {
  double expected_cost = 0.0;
  double real_mass = 0.0;
  std::vector<std::pair<double, double>> rewards;  // (reward, prob), reals only
  for (const PayoffAtom& a : box.atoms) {
    expected_cost += a.prob * a.cost;
    if (!is_no_open(a.reward)) {
      rewards.emplace_back(a.reward, a.prob);
      real_mass += a.prob;
    }
  }
  if (real_mass == 0.0) return kNoOpen;
  std::sort(rewards.begin(), rewards.end());

  // g(sigma) = sum over rewards above sigma of p * (r - sigma), a decreasing
  // piecewise-linear function; solve g(sigma) = expected_cost on the piece
  // where it crosses.
  auto g = [&](double s) {
    double total = 0.0;
    for (const auto& [r, p] : rewards) {
      if (r > s) total += p * (r - s);
    }
    return total;
  };
  double tail_mass = real_mass;
  double prev_reward = rewards.front().first;
  if (g(prev_reward) <= expected_cost) {
    // Crossing below the smallest reward, where every real atom counts.
    double sum = 0.0;
    for (const auto& [r, p] : rewards) sum += p * r;
    return (sum - expected_cost) / real_mass;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    // Merge equal rewards.
    double r = rewards[i].first;
    double mass_here = 0.0;
    while (i < rewards.size() && rewards[i].first == r) {
      mass_here += rewards[i].second;
      ++i;
    }
    --i;
    double gr = g(r);
    if (gr <= expected_cost) {
      // Crossing in (prev_reward, r]: slope is -(mass strictly above prev).
      return r + (gr - expected_cost) / tail_mass;
    }
    tail_mass -= mass_here;
    prev_reward = r;
  }
  // g -> 0 above the top reward; expected_cost == 0 handled above.
  return rewards.back().first;
}

namespace {

void walk_line(const PhiTable& table, int level, int cond, double outside, double m,
               double cost, double prob, AtomMap& merged, std::size_t atom_cap) {
  const Instance& inst = table.instance();
  const bool open = level < table.length() &&
                    std::max(outside, m) < table.grv(level, cond);
  if (!open) {
    add_atom(merged, m, cost, prob, atom_cap);
    return;
  }
  const int box = table.line().boxes[level];
  const std::vector<double>& dist = table.level_dist(level, cond);
  for (int y = 0; y < table.value_count(); ++y) {
    if (dist[y] == 0.0) continue;
    walk_line(table, level + 1, y, outside, std::max(m, inst.grid.values[y]),
              cost + inst.boxes[box].cost, prob * dist[y], merged, atom_cap);
  }
}

}  // namespace

RandomCostBox contract_line(const PhiTable& table, double outside, std::size_t atom_cap) {
  AtomMap merged;
  walk_line(table, 0, table.start_cond(), outside, kNoOpen, 0.0, 1.0, merged, atom_cap);
  return finish_atoms(std::move(merged));
}

std::vector<double> current_grv(const FrontierState& state,
                                const std::vector<PhiTable>& tables) {
  std::vector<double> out(state.lines.size(), kNoOpen);
  for (std::size_t l = 0; l < state.lines.size(); ++l) {
    const FrontierState::LinePos& pos = state.lines[l];
    if (pos.next >= tables[l].length()) continue;
    out[l] = tables[l].grv(pos.next, pos.cond);
  }
  return out;
}

MultilineSolver::MultilineSolver(const Instance& inst, std::size_t atom_cap,
                                 std::size_t memo_cap)
    : inst_(&inst), engine_(inst, memo_cap) {
  for (std::vector<int>& line : decompose_lines(inst)) {
    Hyperbox hb{std::move(line)};
    const RewardDistribution& start = *inst.boxes[hb.boxes.front()].root_dist;
    tables_.emplace_back(inst, hb, start, atom_cap);
    lines_.push_back(std::move(hb));
  }
}

FrontierState MultilineSolver::fresh_state() const {
  FrontierState s;
  s.lines.resize(lines_.size());
  return s;
}

PolicyOutcome MultilineSolver::run(const Realization& real) const {
  PolicyOutcome out;
  FrontierState state = fresh_state();
  for (;;) {
    std::vector<double> grvs = current_grv(state, tables_);
    int pick = -1;
    double best = kNoOpen;
    for (std::size_t l = 0; l < grvs.size(); ++l) {
      if (grvs[l] > best) {
        best = grvs[l];
        pick = static_cast<int>(l);
      }
    }
    if (pick < 0 || state.x >= best) break;

    FrontierState::LinePos& pos = state.lines[pick];
    const int box = lines_[pick].boxes[pos.next];
    const int y = real.value_idx[box];
    const double vy = inst_->grid.values[y];
    state.cost += inst_->boxes[box].cost;
    state.x = std::max(state.x, vy);
    out.opened.push_back(box);
    out.max_observed = std::max(out.max_observed, vy);
    out.total_cost = state.cost;
    out.trace.push_back({pick, inst_->boxes[box].id, best, vy, state.x, state.cost});
    pos.cond = y;
    ++pos.next;
  }
  out.payoff = state.x - state.cost;
  return out;
}

double MultilineSolver::expected_payoff() { return engine_.expected_payoff(); }

namespace {

struct MultiWalker {
  const MultilineSolver& solver;
  GrvEngine& engine;
  double outside;
  std::size_t atom_cap;
  AtomMap merged;

  void walk(std::vector<FrontierState::LinePos>& pos, double m, double cost, double prob,
            bool force_open) {
    const auto& lines = solver.lines();
    int pick = -1;
    double best = kNoOpen;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (pos[l].next >= lines[l].length()) continue;
      double s = engine.sigma(lines[l].boxes[pos[l].next], pos[l].cond);
      if (s > best) {
        best = s;
        pick = static_cast<int>(l);
      }
    }
    if (pick < 0 || (!force_open && std::max(outside, m) >= best)) {
      add_atom(merged, m, cost, prob, atom_cap);
      return;
    }
    const Instance& inst = solver.instance();
    const int box = lines[pick].boxes[pos[pick].next];
    const std::vector<double>& dist = inst.cond_dist(box, pos[pick].cond);
    FrontierState::LinePos saved = pos[pick];
    for (int y = 0; y < inst.value_count(); ++y) {
      if (dist[y] == 0.0) continue;
      pos[pick] = {saved.next + 1, y};
      walk(pos, std::max(m, inst.grid.values[y]), cost + inst.boxes[box].cost, prob * dist[y],
           false);
    }
    pos[pick] = saved;
  }
};

}  // namespace

RandomCostBox MultilineSolver::contract(double outside, bool open_first,
                                        std::size_t atom_cap) {
  MultiWalker walker{*this, engine_, outside, atom_cap, {}};
  std::vector<FrontierState::LinePos> pos(lines_.size());
  walker.walk(pos, kNoOpen, 0.0, 1.0, open_first);
  return finish_atoms(std::move(walker.merged));
}

PolicyOutcome run_multiline_policy(const Instance& inst, const Realization& real) {
  return MultilineSolver(inst).run(real);
}

double expected_payoff_multiline(const Instance& inst, std::size_t memo_cap) {
  if (!is_union_of_lines(inst)) {
    throw PandoraError("PolicyShapeMismatch", "instance is not a union of directed lines");
  }
  GrvEngine engine(inst, memo_cap);
  return engine.expected_payoff();
}

RandomCostBox contract_multiline(const Instance& inst, double outside) {
  MultilineSolver solver(inst);
  return solver.contract(outside);
}

}  // namespace pandora
