#include "pandora/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace pandora {

namespace {

std::string frontier_key(const std::vector<FrontierBox>& frontier, double x) {
  std::string key;
  key.reserve(frontier.size() * 4 + sizeof(double));
  for (const FrontierBox& f : frontier) {
    key.push_back(static_cast<char>(f.box & 0xFF));
    key.push_back(static_cast<char>((f.box >> 8) & 0xFF));
    key.push_back(static_cast<char>((f.cond + 1) & 0xFF));
  }
  char buf[sizeof(double)];
  std::memcpy(buf, &x, sizeof(double));
  key.append(buf, sizeof(double));
  return key;
}

}  // namespace

GrvEngine::GrvEngine(const Instance& inst, std::size_t memo_cap)
    : inst_(&inst), memo_cap_(memo_cap) {
  sigma_.assign(inst.box_count(),
                std::vector<double>(inst.value_count() + 1,
                                    std::numeric_limits<double>::quiet_NaN()));
}

std::vector<FrontierBox> GrvEngine::initial_frontier() const {
  std::vector<FrontierBox> frontier;
  for (int b = 0; b < inst_->box_count(); ++b) {
    if (inst_->is_root(b)) frontier.push_back({b, kStartCond});
  }
  return frontier;
}

double GrvEngine::expected_payoff() { return value(initial_frontier(), 0.0); }

double GrvEngine::open_value(int box, int cond, double x) {
  const std::vector<double>& dist = inst_->cond_dist(box, cond);
  std::vector<FrontierBox> kids;
  kids.reserve(inst_->children[box].size());
  double z = -inst_->boxes[box].cost;
  for (int y = 0; y < inst_->value_count(); ++y) {
    if (dist[y] == 0.0) continue;
    kids.clear();
    for (int c : inst_->children[box]) kids.push_back({c, y});
    z += dist[y] * value(kids, std::max(x, inst_->grid.values[y]));
  }
  return z;
}

double GrvEngine::value(std::vector<FrontierBox> frontier, double x) {
  if (frontier.empty()) return x;
  std::sort(frontier.begin(), frontier.end(),
            [](const FrontierBox& a, const FrontierBox& b) { return a.box < b.box; });

  // Stop as soon as the best reservation value no longer beats the max in
  // hand; ties stop. The argmax box is opened, ties by smallest box index
  // (lexicographic id order for generated instances).
  FrontierBox picked{-1, 0};
  double best_sigma = -std::numeric_limits<double>::infinity();
  for (const FrontierBox& f : frontier) {
    double s = sigma(f.box, f.cond);
    if (s > best_sigma) {
      best_sigma = s;
      picked = f;
    }
  }
  if (x >= best_sigma) return x;

  const std::string key = frontier_key(frontier, x);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;

  std::vector<FrontierBox> rest;
  rest.reserve(frontier.size() + 2);
  for (const FrontierBox& f : frontier) {
    if (f.box != picked.box) rest.push_back(f);
  }

  const std::vector<double>& dist = inst_->cond_dist(picked.box, picked.cond);
  double z = -inst_->boxes[picked.box].cost;
  for (int y = 0; y < inst_->value_count(); ++y) {
    if (dist[y] == 0.0) continue;
    std::vector<FrontierBox> next = rest;
    for (int c : inst_->children[picked.box]) next.push_back({c, y});
    z += dist[y] * value(std::move(next), std::max(x, inst_->grid.values[y]));
  }

  if (memo_.size() >= memo_cap_) {
    throw PandoraError("StateSpaceExplosion",
                       "expectation memo exceeds cap " + std::to_string(memo_cap_));
  }
  memo_.emplace(key, z);
  return z;
}

void GrvEngine::collect_sigma_candidates(int box, std::vector<double>& out) {
  for (int c : inst_->children[box]) {
    for (int y = 0; y < inst_->value_count(); ++y) out.push_back(sigma(c, y));
    collect_sigma_candidates(c, out);
  }
}

double GrvEngine::sigma(int box, int cond) {
  double& cached = sigma_[box][cond == kStartCond ? inst_->value_count() : cond];
  if (!std::isnan(cached)) return cached;
  cached = sigma_impl(box, cond);
  return cached;
}

double GrvEngine::sigma_impl(int box, int cond) {
  // Candidates cover every breakpoint of x -> open_value(box, cond, x):
  // grid values, zero, and all descendant reservation values. The
  // continuation is linear between adjacent candidates, so the bracketing
  // piece's secant gives the exact root of open_value(x) - x.
  std::vector<double> cands = make_xgrid(inst_->grid);
  collect_sigma_candidates(box, cands);
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  // Centered form of open_value(x) - x: every summand is nonnegative, so
  // the sign at the stopping boundary is exact even when a probability row
  // sums to 1 only within rounding.
  auto h = [&](double x) {
    const std::vector<double>& dist = inst_->cond_dist(box, cond);
    std::vector<FrontierBox> kids;
    double z = -inst_->boxes[box].cost;
    for (int y = 0; y < inst_->value_count(); ++y) {
      if (dist[y] == 0.0) continue;
      kids.clear();
      for (int c : inst_->children[box]) kids.push_back({c, y});
      z += dist[y] * (value(kids, std::max(x, inst_->grid.values[y])) - x);
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

}  // namespace pandora
