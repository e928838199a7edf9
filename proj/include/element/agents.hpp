#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "element/encoder.hpp"
#include "element/envs.hpp"
#include "element/knn_graph.hpp"
#include "element/linalg.hpp"
#include "element/metrics.hpp"
#include "element/rewards.hpp"

namespace element {

/// Tabular action values; entries never written read as 0.
class QTable {
 public:
  QTable(std::size_t num_actions, double learning_rate, double gamma);

  std::size_t num_actions() const { return num_actions_; }
  double learning_rate() const { return lr_; }
  double gamma() const { return gamma_; }
  std::size_t size() const { return table_.size(); }

  double value(StateKey s, std::size_t a) const;
  double max_value(StateKey s) const;
  /// argmax, ties to the smallest action index.
  std::size_t greedy(StateKey s) const;

  /// One-step Q-learning backup toward r + gamma * max_a' Q(s', a').
  void update(StateKey s, std::size_t a, double r, StateKey s_next);

 private:
  std::size_t num_actions_;
  double lr_;
  double gamma_;
  std::unordered_map<StateKey, std::vector<double>> table_;
};

/// With probability epsilon a uniform action, otherwise the greedy one.
std::size_t epsilon_greedy(const QTable& q, StateKey s, double epsilon, std::mt19937_64& rng);

struct Transition {
  StateKey s = 0;
  std::size_t action = 0;
  StateKey s_next = 0;
  StatePoint next_point;  ///< encoded s', where both rewards are evaluated
  double r_ep = 0.0;      ///< episodic reward of s' assigned when its episode closed
  std::uint64_t episode = 0;
};

/// Fixed-capacity FIFO store of completed-episode transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  /// Uniform draws with replacement.
  std::vector<std::size_t> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // index of the oldest item once full
  std::vector<Transition> items_;
};

struct ScheduleConfig {
  std::uint64_t update_interval = 50000;  ///< U
  std::uint64_t update_steps = 5000;      ///< T_u
  std::uint64_t total_steps = 200000;

  void validate() const;
  /// Whether the state reached by step t (0-based) enters the graph:
  /// t >= U and t mod U < T_u.
  bool in_update_window(std::uint64_t t) const;
};

struct AgentConfig {
  double learning_rate = 0.1;
  double gamma = 0.99;
  double epsilon_start = 0.1;
  double epsilon_end = 0.01;
  std::size_t batch_size = 32;
  std::size_t updates_per_step = 1;
  std::size_t replay_capacity = 100000;

  void validate() const;
  /// Linear decay over training; progress in [0, 1].
  double epsilon(double progress) const;
};

/// Where lifelong novelty is looked up. `graph` searches the kNN graph;
/// `exact` scans every stored state (kept as distinct points with
/// multiplicities) and is meant for small discrete worlds; `exact_distinct`
/// scans the set of distinct states visited, so repeat visits do not drive a
/// state's novelty to zero.
enum class LifelongBackend { graph, exact, exact_distinct };
const char* to_string(LifelongBackend b);

/// All states ever inserted, kept as distinct points with visit counts.
class ExactMemory {
 public:
  /// Without multiplicity every distinct point counts once as a neighbour.
  explicit ExactMemory(std::size_t k, bool count_multiplicity = true);

  void insert(std::span<const double> point);
  std::size_t size() const { return total_; }
  std::size_t distinct() const { return points_.size(); }
  /// Distances to the k nearest stored states counting multiplicity,
  /// ascending; fewer when fewer are stored.
  std::vector<Neighbor> nearest(std::span<const double> query) const;

 private:
  std::size_t k_;
  bool count_multiplicity_;
  std::size_t total_ = 0;
  std::vector<StatePoint> points_;
  std::vector<std::size_t> counts_;
  std::map<StatePoint, std::size_t> index_;
};

struct Observation {
  StatePoint raw;           ///< what the encoder sees
  StateKey q_key = 0;       ///< Q-table state
  StateKey cell = 0;        ///< coverage cell
};

/// Cells whose lifelong reward is rendered as a heatmap.
struct HeatmapLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  struct Site {
    std::size_t row = 0;
    std::size_t col = 0;
    StatePoint raw;
  };
  std::vector<Site> sites;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t num_actions() const = 0;
  virtual int episode_length() const = 0;
  virtual Observation reset() = 0;
  virtual Observation step(std::size_t action) = 0;
  /// Coverage cells are ids into a rows x cols grid.
  virtual std::size_t coverage_rows() const = 0;
  virtual std::size_t coverage_cols() const = 0;
  virtual std::optional<HeatmapLayout> heatmap_layout() const { return std::nullopt; }
};

/// Actions are MazeAction values; observations are (row, col).
class MazeEnv : public Environment {
 public:
  explicit MazeEnv(Maze maze);

  std::size_t num_actions() const override { return kMazeActions; }
  int episode_length() const override { return maze_.max_steps(); }
  Observation reset() override;
  Observation step(std::size_t action) override;
  std::size_t coverage_rows() const override { return static_cast<std::size_t>(maze_.height()); }
  std::size_t coverage_cols() const override { return static_cast<std::size_t>(maze_.width()); }
  std::optional<HeatmapLayout> heatmap_layout() const override;

  const Maze& maze() const { return maze_; }
  Cell position() const { return cell_; }

 private:
  Observation observe() const;

  Maze maze_;
  Cell cell_;
};

struct PointMassTabulation {
  Box coverage_bounds{};
  int coverage_bins = 100;
  /// Q-table keys: position binned on a q_bins x q_bins grid over
  /// q_bounds, optionally crossed with the heading of the velocity
  /// (8 sectors plus "nearly at rest").
  Box q_bounds{};
  int q_bins = 40;
  bool q_heading = true;
};

/// Eight unit accelerations at 45 degree steps, action 0 pointing along +x.
class PointMassEnv : public Environment {
 public:
  PointMassEnv(PointMassConfig cfg, std::uint64_t seed, PointMassTabulation tab = {});

  std::size_t num_actions() const override { return 8; }
  int episode_length() const override { return world_.config().episode_length; }
  Observation reset() override;
  Observation step(std::size_t action) override;
  std::size_t coverage_rows() const override { return static_cast<std::size_t>(tab_.coverage_bins); }
  std::size_t coverage_cols() const override { return static_cast<std::size_t>(tab_.coverage_bins); }

  const PointMassWorld& world() const { return world_; }

 private:
  Observation observe() const;

  PointMassWorld world_;
  PointMassTabulation tab_;
};

struct RunOptions {
  LifelongBackend backend = LifelongBackend::graph;
  /// 1-based episode numbers after which the lifelong reward heatmap is taken.
  std::vector<std::size_t> heatmap_episodes;
  /// Keep up to this many training batches for inspection.
  std::size_t logged_batches = 0;
};

struct BatchRecord {
  std::uint64_t step = 0;
  std::vector<std::size_t> indices;
  std::vector<double> r_ep;  ///< raw, as stored in the replay buffer
  std::vector<double> r_l;   ///< raw, freshly computed
  std::vector<CombinedReward> combined;
};

struct RunResult {
  RunLog log;
  KnnGraph graph{1, 0};
  CoverageCounter coverage{1};
  std::size_t coverage_rows = 0;
  std::size_t coverage_cols = 0;
  std::vector<std::size_t> episode_unique_cells;  ///< distinct cells within each episode
  std::vector<StatePoint> endpoints;              ///< raw observation at each episode's end
  std::map<std::size_t, Matrix> heatmaps;         ///< episode number -> lifelong reward grid
  std::vector<BatchRecord> batches;
  std::size_t replay_size = 0;
};

/// The off-policy training loop: act epsilon-greedily, insert newly reached
/// states into the lifelong memory inside update windows, score each finished
/// episode with the episodic estimator and file its transitions in the replay
/// buffer, and after every step train on sampled batches whose lifelong
/// rewards are recomputed against the current memory.
RunResult run_element(Environment& env, const FixedEncoder& encoder, const RewardConfig& reward_cfg,
                      const SearchConfig& search, const ScheduleConfig& schedule,
                      const EstimatorConfig& estimator, const AgentConfig& agent, std::uint64_t seed,
                      const RunOptions& options = {});

}  // namespace element
