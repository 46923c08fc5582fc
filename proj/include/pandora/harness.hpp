#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pandora/model.hpp"

namespace pandora {

enum class Policy { kLine, kMultiline, kForest, kTruncated, kBestline };

Policy policy_from_string(const std::string& s);
std::string policy_to_string(Policy p);

struct SimReport {
  std::string policy;
  int trials = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;  // mean +/- 1.96 stderr
  std::uint64_t seed = 0;
};

nlohmann::json sim_report_to_json(const SimReport& r);

/// Samples one realization: roots from their root distributions, children
/// from the parent's realized transition row, in topological order.
/// Deterministic in trial_seed.
Realization sample_realization(const Instance& inst, std::uint64_t trial_seed);

/// Monte Carlo estimate of a policy's expected payoff. Trial t runs on
/// sample_realization(inst, mix_seed(seed, t)); payoffs are aggregated by
/// pairwise summation, making the report bitwise reproducible.
/// delta feeds the truncated/bestline policies.
SimReport monte_carlo_eval(const Instance& inst, Policy policy, int trials,
                           std::uint64_t seed, double delta = 0.05);

/// Side-by-side table: exact policy value, simulated value, oracle values,
/// and (when the instance is static) the truncated and best-line rows.
nlohmann::json compare_policies(const Instance& inst, int trials, std::uint64_t seed,
                                double delta = 0.05);

}  // namespace pandora
