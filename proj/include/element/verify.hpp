#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "element/state.hpp"

namespace element {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  /// Reported for audit only; does not affect the overall verdict.
  bool informational = false;
};

/// Episodes over a shared pool of tabular keys, so keys recur across and
/// within episodes; entropies uniform in [0, 5).
std::vector<ScoredEpisode> random_tabular_episodes(std::size_t episodes, std::size_t length,
                                                   std::size_t key_pool, std::mt19937_64& rng);

struct OptimalityReport {
  std::size_t instances = 0;
  std::size_t perturbations = 0;
  std::size_t beaten = 0;               ///< perturbations with a strictly lower bound
  double max_gradient = 0.0;            ///< largest |central difference| at the closed form
  double max_identity_error = 0.0;      ///< |bound - (loss + E[T^2 Var])|
};

/// Closed-form episodic rewards against random perturbations of themselves.
/// `denominator_scale` multiplies the per-step divisor of the closed form
/// (1 leaves it intact; anything else is a deliberate fault).
OptimalityReport check_reward_optimality(std::size_t instances, std::size_t perturbations,
                                         std::uint64_t seed, double denominator_scale = 1.0);

/// k points packed within 1e-3 of each other plus further points on a
/// lattice whose spacing exceeds sqrt(2 sigma ln((N-k)/eps)), so every kth
/// neighbour distance clears that threshold.
std::vector<StatePoint> separated_configuration(std::size_t n, std::size_t k, std::size_t dim,
                                                double sigma, double epsilon, std::mt19937_64& rng);

struct GapReport {
  std::size_t configurations = 0;
  std::size_t threshold_met = 0;
  std::size_t violations = 0;  ///< threshold met but gap > epsilon
  double max_gap = 0.0;
};

GapReport check_kernel_gap(std::size_t configurations, double epsilon, std::uint64_t seed);

struct VerifyOptions {
  bool inject_fault = false;
  std::uint64_t seed = 20240;
};

/// Estimator closed forms, reward optimality, kernel-sum gap and graph search
/// checks; each row carries the measured values.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace element
