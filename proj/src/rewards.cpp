#include "element/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "element/error.hpp"

namespace element {

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::minmax_batch: return "minmax_batch";
    case Normalization::none: return "none";
  }
  return "unknown";
}

const char* to_string(EpisodicMode m) {
  switch (m) {
    case EpisodicMode::per_episode_constant: return "per_episode_constant";
    case EpisodicMode::tabular_running_mean: return "tabular_running_mean";
    case EpisodicMode::knn_smoothed: return "knn_smoothed";
  }
  return "unknown";
}

const char* to_string(NeighborNorm n) {
  switch (n) {
    case NeighborNorm::k_vector: return "k_vector";
    case NeighborNorm::kth_distance: return "kth_distance";
  }
  return "unknown";
}

void RewardConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail(ErrorKind::invalid_argument, "beta must be >= 0");
  if (k_lifelong < 1) fail(ErrorKind::invalid_argument, "k_lifelong must be >= 1");
  if (!(episodic_weight >= 0.0) || !std::isfinite(episodic_weight)) {
    fail(ErrorKind::invalid_argument, "episodic_weight must be >= 0");
  }
  if (!(empty_memory_reward >= 0.0) || !std::isfinite(empty_memory_reward)) {
    fail(ErrorKind::invalid_argument, "empty_memory_reward must be >= 0");
  }
  if (smoothing_k < 1) fail(ErrorKind::invalid_argument, "smoothing_k must be >= 1");
}

void EstimatorConfig::validate() const {
  if (!(kernel.sigma > 0.0) || !std::isfinite(kernel.sigma)) {
    fail(ErrorKind::invalid_argument, "sigma must be positive");
  }
  if (estimator == Estimator::knn && k < 1) fail(ErrorKind::invalid_argument, "k must be >= 1");
  if (estimator == Estimator::renyi && (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))) {
    fail(ErrorKind::invalid_argument, "alpha must be positive and different from 1");
  }
}

EntropyValue episode_entropy(const Episode& ep, const EstimatorConfig& cfg) {
  switch (cfg.estimator) {
    case Estimator::kde: return kde_entropy(ep.states, cfg.kernel);
    case Estimator::knn: return knn_entropy(ep.states, cfg.k);
    case Estimator::renyi:
      if (cfg.max_states > 0 && ep.states.size() > cfg.max_states) {
        return renyi_matrix_entropy(subsample_evenly(ep.states, cfg.max_states), cfg.alpha, cfg.kernel);
      }
      return renyi_matrix_entropy(ep.states, cfg.alpha, cfg.kernel);
  }
  fail(ErrorKind::invalid_argument, "unknown estimator");
}

void EpisodicRewardTable::record(StateKey key, double scaled_entropy, std::span<const double> point) {
  if (!std::isfinite(scaled_entropy)) fail(ErrorKind::invalid_argument, "non-finite episodic value");
  Record& r = records_[key];
  r.count += 1;
  r.mean_scaled_entropy += (scaled_entropy - r.mean_scaled_entropy) / static_cast<double>(r.count);
  if (r.point.empty() && !point.empty()) r.point.assign(point.begin(), point.end());
}

std::optional<double> EpisodicRewardTable::mean(StateKey key) const {
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second.mean_scaled_entropy;
}

std::size_t EpisodicRewardTable::count(StateKey key) const {
  auto it = records_.find(key);
  return it == records_.end() ? 0 : it->second.count;
}

double EpisodicRewardTable::smoothed(std::span<const double> query, std::size_t k) const {
  if (k == 0) fail(ErrorKind::invalid_argument, "smoothing k must be >= 1");
  std::vector<std::pair<double, double>> scored;  // (distance, mean)
  for (const auto& [key, r] : records_) {
    if (r.point.size() != query.size()) continue;
    scored.emplace_back(distance(r.point, query), r.mean_scaled_entropy);
  }
  if (scored.empty()) fail(ErrorKind::empty_input, "no recorded points to smooth over");
  const std::size_t take = std::min(k, scored.size());
  // std::map iteration is key-ordered, so a stable partial sort breaks ties by key.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += scored[i].second;
  return sum / static_cast<double>(take);
}

std::vector<double> assign_episodic_rewards(const Episode& ep, double entropy, EpisodicMode mode,
                                            EpisodicRewardTable* table, std::size_t smoothing_k) {
  if (!std::isfinite(entropy)) fail(ErrorKind::invalid_argument, "episode entropy is not finite");
  const std::size_t t = ep.length() > 0 ? ep.length() : ep.keys.size();
  if (t == 0) return {};
  const double scaled = entropy / static_cast<double>(t);
  if (mode == EpisodicMode::per_episode_constant) return std::vector<double>(t, scaled);

  if (table == nullptr) fail(ErrorKind::invalid_argument, "tabular episodic modes need a reward table");
  if (ep.keys.size() != t) fail(ErrorKind::invalid_argument, "tabular episodic modes need one key per state");
  const bool with_points = mode == EpisodicMode::knn_smoothed;
  if (with_points && ep.states.size() != t) {
    fail(ErrorKind::invalid_argument, "knn_smoothed mode needs the episode states");
  }

  std::set<StateKey> seen;
  for (std::size_t i = 0; i < t; ++i) {
    if (!seen.insert(ep.keys[i]).second) continue;
    if (with_points) {
      table->record(ep.keys[i], scaled, ep.states[i]);
    } else {
      table->record(ep.keys[i], scaled);
    }
  }

  std::vector<double> out(t);
  for (std::size_t i = 0; i < t; ++i) {
    out[i] = with_points ? table->smoothed(ep.states[i], smoothing_k) : *table->mean(ep.keys[i]);
  }
  return out;
}

double novelty_from_neighbors(std::span<const Neighbor> neighbors, NeighborNorm norm) {
  if (neighbors.empty()) fail(ErrorKind::empty_input, "no neighbours to measure novelty against");
  double radius = 0.0;
  if (norm == NeighborNorm::k_vector) {
    double sq = 0.0;
    for (const Neighbor& n : neighbors) sq += n.distance * n.distance;
    radius = std::sqrt(sq);
  } else {
    radius = neighbors.back().distance;
  }
  return std::log1p(radius);
}

double lifelong_reward(const KnnGraph& graph, std::span<const double> s, const SearchConfig& search,
                       std::mt19937_64& rng, const RewardConfig& cfg) {
  if (graph.empty()) return cfg.empty_memory_reward;
  return novelty_from_neighbors(graph.search(s, search, rng), cfg.neighbor_norm);
}

std::vector<double> minmax_normalize(std::span<const double> xs) {
  std::vector<double> out(xs.size(), 0.0);
  if (xs.empty()) return out;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - *lo) / range;
  return out;
}

std::vector<CombinedReward> combine_rewards(std::span<const double> r_ep, std::span<const double> r_l,
                                            const RewardConfig& cfg) {
  if (r_ep.size() != r_l.size()) {
    fail(ErrorKind::invalid_argument, "episodic batch has " + std::to_string(r_ep.size()) +
                                          " entries, lifelong batch " + std::to_string(r_l.size()));
  }
  if (r_ep.empty()) fail(ErrorKind::empty_input, "empty reward batch");
  for (std::size_t i = 0; i < r_ep.size(); ++i) {
    if (!std::isfinite(r_ep[i]) || !std::isfinite(r_l[i])) {
      fail(ErrorKind::numerical_failure, "non-finite reward at batch position " + std::to_string(i));
    }
  }
  std::vector<double> ep(r_ep.begin(), r_ep.end());
  std::vector<double> l(r_l.begin(), r_l.end());
  if (cfg.normalization == Normalization::minmax_batch) {
    ep = minmax_normalize(ep);
    l = minmax_normalize(l);
  }
  std::vector<CombinedReward> out(ep.size());
  for (std::size_t i = 0; i < ep.size(); ++i) {
    out[i] = {ep[i], l[i], cfg.episodic_weight * ep[i] + cfg.beta * l[i]};
  }
  return out;
}

namespace {

double reward_of(const RewardMap& rewards, StateKey key) {
  auto it = rewards.find(key);
  if (it == rewards.end()) fail(ErrorKind::invalid_argument, "no reward for state key " + std::to_string(key));
  return it->second;
}

void check_episodes(std::span<const ScoredEpisode> episodes) {
  if (episodes.empty()) fail(ErrorKind::empty_input, "no episodes");
  for (const ScoredEpisode& ep : episodes) {
    if (ep.length() == 0) fail(ErrorKind::invalid_argument, "episode of length 0");
    if (!std::isfinite(ep.entropy)) fail(ErrorKind::invalid_argument, "episode entropy is not finite");
  }
}

}  // namespace

double decomposition_loss(const RewardMap& rewards, std::span<const ScoredEpisode> episodes) {
  check_episodes(episodes);
  double total = 0.0;
  for (const ScoredEpisode& ep : episodes) {
    double sum = 0.0;
    for (StateKey key : ep.keys) sum += reward_of(rewards, key);
    const double err = ep.entropy - sum;
    total += err * err;
  }
  return total / static_cast<double>(episodes.size());
}

double upper_bound_loss(const RewardMap& rewards, std::span<const ScoredEpisode> episodes) {
  check_episodes(episodes);
  const std::size_t t = episodes.front().length();
  for (const ScoredEpisode& ep : episodes) {
    if (ep.length() != t) {
      fail(ErrorKind::invalid_argument, "upper bound needs equal episode lengths, got " +
                                            std::to_string(t) + " and " + std::to_string(ep.length()));
    }
  }
  const double tt = static_cast<double>(t);
  double total = 0.0;
  for (const ScoredEpisode& ep : episodes) {
    double per_episode = 0.0;
    for (StateKey key : ep.keys) {
      const double err = ep.entropy - tt * reward_of(rewards, key);
      per_episode += err * err;
    }
    total += per_episode / tt;
  }
  return total / static_cast<double>(episodes.size());
}

RewardMap optimal_reward_closed_form(std::span<const ScoredEpisode> episodes, bool variable_length) {
  check_episodes(episodes);
  if (!variable_length) {
    for (const ScoredEpisode& ep : episodes) {
      if (ep.length() != episodes.front().length()) {
        fail(ErrorKind::invalid_argument, "fixed-length closed form given episodes of different lengths");
      }
    }
  }
  std::map<StateKey, std::pair<double, double>> acc;  // numerator, denominator
  for (const ScoredEpisode& ep : episodes) {
    const double t = static_cast<double>(ep.length());
    for (StateKey key : ep.keys) {
      auto& [num, den] = acc[key];
      if (variable_length) {
        num += t * ep.entropy;
        den += t * t;
      } else {
        num += ep.entropy / t;
        den += 1.0;
      }
    }
  }
  RewardMap out;
  for (const auto& [key, nd] : acc) out.emplace(key, nd.first / nd.second);
  return out;
}

}  // namespace element
