#pragma once

#include <utility>
#include <vector>

#include "pandora/line_solver.hpp"
#include "pandora/model.hpp"

namespace pandora {

/// Stationary behaviour of one transition matrix: the stationary
/// distribution pi together with fitted constants certifying the geometric
/// envelope d(t) <= C * alpha^t for the max-row total-variation distance
/// d(t) over the probed horizon.
struct StationaryProfile {
  RewardDistribution pi;
  double C = 1.0;
  double alpha = 0.5;
  int t_mix_quarter = 1;        // first t with d(t) <= 1/4
  int probed_horizon = 0;       // envelope verified for t = 1..probed_horizon
  std::vector<double> tv;       // d(t) for t = 1..probed_horizon
};

/// Irreducibility (every state reaches every state) and aperiodicity
/// (per-state gcd of cycle lengths is 1; states on no cycle count as
/// trivially aperiodic).
std::pair<bool, bool> check_irreducible_aperiodic(const TransitionMatrix& P);

/// Unique pi with pi P = pi, sum 1; solved as a linear system with the
/// normalization row appended. Residual below 1e-12.
/// Throws PandoraError("NotIrreducible") / ("NotAperiodic").
RewardDistribution stationary_distribution(const TransitionMatrix& P);

/// Fits (C, alpha): alpha is the largest one-step decay ratio of d(t) past
/// the quarter mixing time, C the smallest constant making d(t) <= C alpha^t
/// hold on the probed range. Degenerate chains that mix exactly return
/// (1, 0.5). Throws PandoraError("EnvelopeFailure") when d(t) has not
/// dropped below 1/4 within t_cap.
std::pair<double, double> mixing_constants(const TransitionMatrix& P, int t_cap);

/// Full profile (stationary distribution plus fitted envelope).
StationaryProfile make_profile(const TransitionMatrix& P, int t_cap = 64);

/// Prefix length after which the running max has reached at least v_j with
/// probability 1 - delta:
///   t_delta = ceil(max(2C / (pi_{>=j} (1-alpha)), ln(delta)/ln(1 - pi_{>=j}/2))).
/// j is a 0-based grid index. Throws PandoraError("ZeroTailMass") when
/// pi_{>=j} = 0.
int truncation_horizon(const StationaryProfile& profile, int j, double delta);

/// Equivalent-reward table for an endless line with one matrix and constant
/// cost: phi[y][x] with y over {0} union V (current max) and x over V
/// (current state). phi(v_k, .) = v_k is a fixed boundary.
struct StaticPhi {
  std::vector<double> ygrid;               // {0} union V
  std::vector<std::vector<double>> phi;    // [y][x]
  double cost = 0.0;
  int iterations = 0;
  std::vector<double> deltas;              // Chebyshev distance per iteration

  double at(double y, int x_state, const ValueGrid& grid) const;
};

/// Solves the Bellman fixed point phi(y,x) = max(y, -c + sum_l p_{x,l}
/// phi(max(y,v_l), v_l)) by iteration from phi_0(y,x) = y; the map contracts
/// with ratio at most max_i(1 - p_{i,k}). Requires p_{i,k} > 0 for every
/// i < k ("NoTopTransition" otherwise).
StaticPhi fixed_point_phi(const ValueGrid& grid, const TransitionMatrix& P, double cost,
                          double tol = 1e-12);

/// Exact probability that a chain started from the given state reaches at
/// least v_j within the next `steps` draws (the start state itself does not
/// count). Dynamic program over (state, reached) pairs.
double max_reward_tail(const TransitionMatrix& P, const ValueGrid& grid, int start_state,
                       int j, int steps);

struct TruncationResult {
  Instance instance;
  int t_delta = 0;
  double pooled_C = 0.0;
  double pooled_alpha = 0.0;
  double pi_star = 0.0;
};

/// Truncates every line of a static multi-line instance to its first
/// t_delta boxes, with pooled constants C = max_j C_j, alpha = max_j
/// alpha_j, pi* = max_j pi(j)_k.
TruncationResult truncate_lines(const Instance& inst, double delta);

struct BestLineResult {
  Hyperbox path;                  // box indices, root first
  std::vector<std::string> ids;
  double value = 0.0;
  int t_delta = 0;
  StationaryProfile profile;      // profile of the component attaining pi*
};

/// Enumerates every root-anchored directed path of length up to t_delta in
/// a static forest and returns the one whose optimal-stopping expected
/// payoff is largest (ties: lexicographically smallest id sequence).
BestLineResult best_line_half_approx(const Instance& inst, double delta);

/// The shared matrix of a component (by component id). Requires the
/// instance to satisfy the static-transition assumption.
const TransitionMatrix& component_matrix(const Instance& inst, int component);

}  // namespace pandora
