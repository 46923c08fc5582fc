#include "pandora/line_solver.hpp"

#include <algorithm>
#include <cmath>

namespace pandora {

namespace {

long long cost_key(double cost) {
  // Atoms merge on exact reward and cost rounded at 1e-12.
  return std::llround(cost * 1e12);
}

}  // namespace

PhiTable::PhiTable(const Instance& inst, Hyperbox line, RewardDistribution start,
                   std::size_t atom_cap)
    : inst_(&inst), line_(std::move(line)), start_(std::move(start)), k_(inst.value_count()) {
  if (line_.boxes.empty()) {
    throw PandoraError("BadHyperbox", "hyperbox must contain at least one box");
  }
  for (int i = 0; i + 1 < line_.length(); ++i) {
    if (inst_->parent[line_.boxes[i + 1]] != line_.boxes[i]) {
      throw PandoraError("BadHyperbox", "hyperbox boxes are not a directed path");
    }
  }
  if (static_cast<int>(start_.probs.size()) != k_) {
    throw PandoraError("BadDistribution", "start distribution has wrong length");
  }

  xgrid_ = make_xgrid(inst_->grid);
  value_to_x_.resize(k_);
  for (int j = 0; j < k_; ++j) {
    value_to_x_[j] = static_cast<int>(
        std::lower_bound(xgrid_.begin(), xgrid_.end(), inst_->grid.values[j]) - xgrid_.begin());
  }
  zero_x_ = static_cast<int>(std::lower_bound(xgrid_.begin(), xgrid_.end(), 0.0) - xgrid_.begin());

  // Marginal of each level under the start distribution; serves as the
  // "no conditioning" column for levels past the first.
  marginal_.resize(line_.length());
  marginal_[0] = start_;
  for (int ell = 1; ell < line_.length(); ++ell) {
    const TransitionMatrix& tm = *inst_->inbound[line_.boxes[ell]];
    std::vector<double> next(k_, 0.0);
    for (int i = 0; i < k_; ++i) {
      if (marginal_[ell - 1].probs[i] == 0.0) continue;
      for (int j = 0; j < k_; ++j) next[j] += marginal_[ell - 1].probs[i] * tm.rows[i][j];
    }
    marginal_[ell].probs = std::move(next);
  }

  sigma_.assign(line_.length(), std::vector<double>(k_ + 1, std::numeric_limits<double>::quiet_NaN()));
  build(atom_cap);
}

const std::vector<double>& PhiTable::level_dist(int level, int cond) const {
  if (level == 0) return start_.probs;
  if (cond == k_ || cond == kStartCond) return marginal_[level].probs;
  return inst_->inbound[line_.boxes[level]]->rows[cond];
}

const PhiEntry& PhiTable::entry(int level, int cond, int x_idx) const {
  return t_[level][cond == kStartCond ? k_ : cond][x_idx];
}

void PhiTable::build(std::size_t atom_cap) {
  const int L = line_.length();
  const int nx = static_cast<int>(xgrid_.size());
  t_.assign(L, std::vector<std::vector<PhiEntry>>(k_ + 1, std::vector<PhiEntry>(nx)));

  for (int ell = L - 1; ell >= 0; --ell) {
    const double cost = inst_->boxes[line_.boxes[ell]].cost;
    for (int cond = 0; cond <= k_; ++cond) {
      const std::vector<double>& dist = level_dist(ell, cond);
      for (int xi = 0; xi < nx; ++xi) {
        const double x = xgrid_[xi];
        PhiEntry& e = t_[ell][cond][xi];

        double z = -cost;
        for (int y = 0; y < k_; ++y) {
          if (dist[y] == 0.0) continue;
          const int mi = std::max(xi, value_to_x_[y]);
          z += dist[y] * (ell + 1 < L ? t_[ell + 1][y][mi].phi : xgrid_[mi]);
        }

        if (z > x) {
          e.phi = z;
          e.open = true;
          std::map<std::pair<double, long long>, std::pair<double, double>> merged;
          for (int y = 0; y < k_; ++y) {
            if (dist[y] == 0.0) continue;
            const double vy = inst_->grid.values[y];
            if (ell + 1 < L) {
              const int mi = std::max(xi, value_to_x_[y]);
              for (const PayoffAtom& a : t_[ell + 1][y][mi].atoms) {
                const double r = std::max(vy, a.reward);
                const double c = cost + a.cost;
                auto& slot = merged[{r, cost_key(c)}];
                if (slot.second == 0.0) slot.first = c;
                slot.second += dist[y] * a.prob;
              }
            } else {
              auto& slot = merged[{vy, cost_key(cost)}];
              if (slot.second == 0.0) slot.first = cost;
              slot.second += dist[y];
            }
          }
          if (merged.size() > atom_cap) {
            throw PandoraError("AtomExplosion",
                               "atom list size " + std::to_string(merged.size()) + " exceeds cap");
          }
          e.atoms.reserve(merged.size());
          for (const auto& [key, val] : merged) {
            e.atoms.push_back({key.first, val.first, val.second});
          }
        } else {
          e.phi = x;
          e.open = false;
          e.atoms = {{kNoOpen, 0.0, 1.0}};
        }
      }
    }
  }
}

double PhiTable::continuation(double x, int level, int cond) const {
  const std::vector<double>& dist = level_dist(level, cond);
  double z = -inst_->boxes[line_.boxes[level]].cost;
  for (int y = 0; y < k_; ++y) {
    if (dist[y] == 0.0) continue;
    const double m = std::max(x, inst_->grid.values[y]);
    z += dist[y] * (level + 1 < line_.length() ? phi_at(m, level + 1, y) : m);
  }
  return z;
}

double PhiTable::phi_at(double x, int level, int cond) const {
  if (level >= line_.length()) return x;
  if (x >= xgrid_.back()) return x;  // above the top value nothing is worth opening
  const int c = cond == kStartCond ? k_ : cond;
  auto it = std::lower_bound(xgrid_.begin(), xgrid_.end(), x);
  if (it != xgrid_.end() && *it == x) {
    return t_[level][c][it - xgrid_.begin()].phi;
  }
  auto key = std::make_pair(x, level * (k_ + 1) + c);
  auto mit = offgrid_.find(key);
  if (mit != offgrid_.end()) return mit->second;
  double v = std::max(x, continuation(x, level, c));
  offgrid_.emplace(key, v);
  return v;
}

double PhiTable::grv(int level, int cond) const {
  const int c = cond == kStartCond ? k_ : cond;
  double& cached = sigma_[level][c];
  if (!std::isnan(cached)) return cached;

  // Breakpoint candidates of the continuation value: grid values, zero, and
  // every reservation value of a deeper state. Between adjacent candidates
  // the continuation is linear in x, so a secant through the bracketing
  // piece hits the reservation value exactly.
  std::vector<double> cands = xgrid_;
  for (int j = level + 1; j < line_.length(); ++j) {
    for (int s = 0; s < k_; ++s) cands.push_back(grv(j, s));
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  // Centered continuation-minus-x: summands are nonnegative, keeping the
  // sign exact at the stopping boundary under row-sum rounding.
  auto h = [&](double x) {
    const std::vector<double>& dist = level_dist(level, c);
    double z = -inst_->boxes[line_.boxes[level]].cost;
    for (int y = 0; y < k_; ++y) {
      if (dist[y] == 0.0) continue;
      const double m = std::max(x, inst_->grid.values[y]);
      z += dist[y] * ((level + 1 < line_.length() ? phi_at(m, level + 1, y) : m) - x);
    }
    return z;
  };

  // First candidate with h <= 0 (h is nonincreasing in x).
  int lo = 0, hi = static_cast<int>(cands.size()) - 1;
  if (h(cands[lo]) <= 0.0) {
    // Reservation value sits below every candidate; the piece extending to
    // -infinity is linear, so two probes determine it.
    double x1 = cands[lo] - 1.0, x0 = cands[lo] - 2.0;
    double h0 = h(x0), h1 = h(x1);
    cached = h0 == h1 ? x1 : x0 + h0 * (x1 - x0) / (h0 - h1);
    return cached;
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
  // An exact zero at the candidate is the root itself; the secant would
  // reconstruct it only to within rounding.
  cached = hb == 0.0 ? cands[hi]
                     : cands[lo] + ha * (cands[hi] - cands[lo]) / (ha - hb);
  return cached;
}

PhiTable compute_phi_table(const Instance& inst, const Hyperbox& line,
                           const RewardDistribution& start, std::size_t atom_cap) {
  return PhiTable(inst, line, start, atom_cap);
}

double grv(const PhiTable& table, int level, int cond) { return table.grv(level, cond); }

PolicyOutcome run_line_policy(const PhiTable& table, const Realization& real) {
  PolicyOutcome out;
  const Instance& inst = table.instance();
  int x_idx = table.xgrid_index_of_zero();
  int cond = table.start_cond();
  for (int level = 0; level < table.length(); ++level) {
    if (!table.open_indicator(level, cond, x_idx)) break;
    const int box = table.line().boxes[level];
    const int y = real.value_idx[box];
    const double vy = inst.grid.values[y];
    out.opened.push_back(box);
    out.total_cost += inst.boxes[box].cost;
    out.max_observed = std::max(out.max_observed, vy);
    x_idx = std::max(x_idx, table.xgrid_index_of_value(y));
    out.trace.push_back({0, inst.boxes[box].id, table.grv(level, cond), vy,
                         table.xgrid()[x_idx], out.total_cost});
    cond = y;
  }
  out.payoff = table.xgrid()[x_idx] - out.total_cost;
  return out;
}

double expected_payoff_line(const PhiTable& table) {
  return table.phi(0, table.start_cond(), table.xgrid_index_of_zero());
}

nlohmann::json phi_table_to_json(const PhiTable& table) {
  nlohmann::json entries = nlohmann::json::array();
  for (int level = 0; level < table.length(); ++level) {
    for (int cond = 0; cond <= table.value_count(); ++cond) {
      for (int xi = 0; xi < static_cast<int>(table.xgrid().size()); ++xi) {
        const PhiEntry& e = table.entry(level, cond, xi);
        nlohmann::json atoms = nlohmann::json::array();
        for (const PayoffAtom& a : e.atoms) {
          atoms.push_back({is_no_open(a.reward) ? nlohmann::json(nullptr) : nlohmann::json(a.reward),
                           a.cost, a.prob});
        }
        entries.push_back({{"x", table.xgrid()[xi]},
                           {"s", cond == table.value_count()
                                     ? nlohmann::json(nullptr)
                                     : nlohmann::json(table.instance().grid.values[cond])},
                           {"i", level + 1},
                           {"phi", e.phi},
                           {"open", e.open},
                           {"atoms", atoms}});
      }
    }
  }
  return nlohmann::json{{"entries", entries}};
}

}  // namespace pandora
