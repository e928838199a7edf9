#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "element/entropy.hpp"
#include "element/knn_graph.hpp"
#include "element/state.hpp"

namespace element {

enum class Normalization { minmax_batch, none };
enum class EpisodicMode { per_episode_constant, tabular_running_mean, knn_smoothed };
/// How the k neighbour distances are folded into one novelty radius.
enum class NeighborNorm { k_vector, kth_distance };

const char* to_string(Normalization n);
const char* to_string(EpisodicMode m);
const char* to_string(NeighborNorm n);

struct RewardConfig {
  double beta = 0.5;
  std::size_t k_lifelong = 3;
  Normalization normalization = Normalization::minmax_batch;
  EpisodicMode episodic_mode = EpisodicMode::per_episode_constant;
  /// Multiplies the (normalized) episodic stream; 0 leaves a lifelong-only reward.
  double episodic_weight = 1.0;
  NeighborNorm neighbor_norm = NeighborNorm::k_vector;
  /// Lifelong reward returned while the memory is still empty.
  double empty_memory_reward = 0.6931471805599453;
  /// Neighbours averaged by the knn_smoothed episodic mode.
  std::size_t smoothing_k = 3;

  void validate() const;
};

struct CombinedReward {
  double r_ep = 0.0;
  double r_l = 0.0;
  double r_total = 0.0;
};

/// Which estimator scores an episode, with its parameters.
struct EstimatorConfig {
  Estimator estimator = Estimator::kde;
  KernelConfig kernel{};
  std::size_t k = 5;       ///< knn only
  double alpha = 2.0;      ///< renyi only
  std::size_t max_states = 0;  ///< renyi only: subsample longer episodes to this size, 0 = never

  void validate() const;
};

EntropyValue episode_entropy(const Episode& ep, const EstimatorConfig& cfg);

/// Running mean of H/T over every episode that contained a given state key.
/// Keys may optionally carry a representative point so neighbouring keys can
/// be looked up by distance.
class EpisodicRewardTable {
 public:
  struct Record {
    std::size_t count = 0;
    double mean_scaled_entropy = 0.0;
    StatePoint point;
  };

  void record(StateKey key, double scaled_entropy, std::span<const double> point = {});
  std::optional<double> mean(StateKey key) const;
  std::size_t count(StateKey key) const;
  std::size_t size() const { return records_.size(); }
  const std::map<StateKey, Record>& records() const { return records_; }

  /// Mean of the stored means of the k recorded keys whose points are closest
  /// to `query` (ties by key). Keys recorded without a point are skipped.
  double smoothed(std::span<const double> query, std::size_t k) const;

 private:
  std::map<StateKey, Record> records_;
};

/// Per-step episodic rewards for one finished episode scored with entropy H.
/// per_episode_constant gives every step H/T. The tabular modes first fold
/// H/T into `table` once per distinct key of the episode, then read back the
/// key's running mean (tabular_running_mean) or the mean over the nearest
/// recorded keys (knn_smoothed, needs states).
std::vector<double> assign_episodic_rewards(const Episode& ep, double entropy, EpisodicMode mode,
                                            EpisodicRewardTable* table, std::size_t smoothing_k = 3);

/// log(r + 1) where r folds the neighbour distances per `norm`.
double novelty_from_neighbors(std::span<const Neighbor> neighbors, NeighborNorm norm);

/// Lifelong novelty of `s` against the graph memory: log(||d_1..d_k||_2 + 1)
/// with the distances from an approximate search, or the configured constant
/// for an empty graph.
double lifelong_reward(const KnnGraph& graph, std::span<const double> s, const SearchConfig& search,
                       std::mt19937_64& rng, const RewardConfig& cfg);

/// (x - min) / (max - min); a constant batch maps to zeros.
std::vector<double> minmax_normalize(std::span<const double> xs);

/// Normalizes both streams per cfg.normalization and forms
/// r_total = episodic_weight * r_ep + beta * r_l.
std::vector<CombinedReward> combine_rewards(std::span<const double> r_ep, std::span<const double> r_l,
                                            const RewardConfig& cfg);

using RewardMap = std::map<StateKey, double>;

/// Mean over episodes of (H - sum_t r(s_t))^2.
double decomposition_loss(const RewardMap& rewards, std::span<const ScoredEpisode> episodes);

/// Mean over episodes and uniformly drawn steps of (H - T r(s_t))^2. All
/// episodes must share one length.
double upper_bound_loss(const RewardMap& rewards, std::span<const ScoredEpisode> episodes);

/// Reward map minimizing the upper bound. Fixed length: for each key, the
/// occurrence-weighted mean of H/T over the episodes visiting it (the plain
/// mean over containing episodes when a key occurs at most once per episode).
/// Variable length: sum T H c / sum T^2 c with c the key's occurrence count,
/// the minimizer of sum over episodes and steps of (H - T r(s_t))^2.
RewardMap optimal_reward_closed_form(std::span<const ScoredEpisode> episodes, bool variable_length);

}  // namespace element
