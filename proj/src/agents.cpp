#include "element/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "element/error.hpp"

namespace element {

QTable::QTable(std::size_t num_actions, double learning_rate, double gamma)
    : num_actions_(num_actions), lr_(learning_rate), gamma_(gamma) {
  if (num_actions == 0) fail(ErrorKind::invalid_argument, "Q-table needs at least one action");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    fail(ErrorKind::invalid_argument, "learning_rate must lie in (0, 1]");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::invalid_argument, "gamma must lie in [0, 1)");
}

double QTable::value(StateKey s, std::size_t a) const {
  if (a >= num_actions_) fail(ErrorKind::invalid_argument, "action index out of range");
  auto it = table_.find(s);
  return it == table_.end() ? 0.0 : it->second[a];
}

double QTable::max_value(StateKey s) const {
  auto it = table_.find(s);
  if (it == table_.end()) return 0.0;
  return *std::max_element(it->second.begin(), it->second.end());
}

std::size_t QTable::greedy(StateKey s) const {
  auto it = table_.find(s);
  if (it == table_.end()) return 0;
  // max_element returns the first maximum, i.e. the smallest index on ties.
  return static_cast<std::size_t>(std::max_element(it->second.begin(), it->second.end()) -
                                  it->second.begin());
}

void QTable::update(StateKey s, std::size_t a, double r, StateKey s_next) {
  if (!std::isfinite(r)) fail(ErrorKind::invalid_argument, "Q update with a non-finite reward");
  if (a >= num_actions_) fail(ErrorKind::invalid_argument, "action index out of range");
  const double target = r + gamma_ * max_value(s_next);
  auto& row = table_.try_emplace(s, num_actions_, 0.0).first->second;
  row[a] += lr_ * (target - row[a]);
}

std::size_t epsilon_greedy(const QTable& q, StateKey s, double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.num_actions() - 1);
    return pick(rng);
  }
  return q.greedy(s);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) fail(ErrorKind::invalid_argument, "replay capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) fail(ErrorKind::invalid_argument, "replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  if (items_.empty()) fail(ErrorKind::empty_input, "sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

void ScheduleConfig::validate() const {
  if (update_interval < 1) fail(ErrorKind::invalid_argument, "schedule.update_interval must be >= 1");
  if (update_steps < 1) fail(ErrorKind::invalid_argument, "schedule.update_steps must be >= 1");
  if (update_steps > update_interval) {
    fail(ErrorKind::invalid_argument, "schedule.update_steps must not exceed schedule.update_interval");
  }
  if (total_steps < 1) fail(ErrorKind::invalid_argument, "schedule.total_steps must be >= 1");
}

bool ScheduleConfig::in_update_window(std::uint64_t t) const {
  return t >= update_interval && t % update_interval < update_steps;
}

void AgentConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    fail(ErrorKind::invalid_argument, "agent.learning_rate must lie in (0, 1]");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) fail(ErrorKind::invalid_argument, "agent.gamma must lie in [0, 1)");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) {
    fail(ErrorKind::invalid_argument, "agent.epsilon_start must lie in [0, 1]");
  }
  if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    fail(ErrorKind::invalid_argument, "agent.epsilon_end must lie in [0, 1]");
  }
  if (batch_size < 1) fail(ErrorKind::invalid_argument, "agent.batch_size must be >= 1");
  if (replay_capacity < 1) fail(ErrorKind::invalid_argument, "agent.replay_capacity must be >= 1");
}

double AgentConfig::epsilon(double progress) const {
  const double p = std::clamp(progress, 0.0, 1.0);
  return epsilon_start + (epsilon_end - epsilon_start) * p;
}

const char* to_string(LifelongBackend b) {
  switch (b) {
    case LifelongBackend::graph: return "graph";
    case LifelongBackend::exact: return "exact";
    case LifelongBackend::exact_distinct: return "exact_distinct";
  }
  return "unknown";
}

ExactMemory::ExactMemory(std::size_t k, bool count_multiplicity)
    : k_(k), count_multiplicity_(count_multiplicity) {
  if (k == 0) fail(ErrorKind::invalid_argument, "k must be at least 1");
}

void ExactMemory::insert(std::span<const double> point) {
  StatePoint p(point.begin(), point.end());
  auto [it, fresh] = index_.try_emplace(p, points_.size());
  if (fresh) {
    points_.push_back(std::move(p));
    counts_.push_back(0);
  }
  ++counts_[it->second];
  ++total_;
}

std::vector<Neighbor> ExactMemory::nearest(std::span<const double> query) const {
  std::vector<Neighbor> all(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) all[i] = {i, distance(points_[i], query)};
  std::sort(all.begin(), all.end(), closer);
  std::vector<Neighbor> out;
  for (const Neighbor& n : all) {
    const std::size_t copies = count_multiplicity_ ? counts_[n.id] : 1;
    for (std::size_t c = 0; c < copies && out.size() < k_; ++c) out.push_back(n);
    if (out.size() == k_) break;
  }
  return out;
}

MazeEnv::MazeEnv(Maze maze) : maze_(std::move(maze)), cell_(maze_.start()) {}

Observation MazeEnv::observe() const {
  const StateKey key = maze_.key(cell_);
  return {{static_cast<double>(cell_.row), static_cast<double>(cell_.col)}, key, key};
}

Observation MazeEnv::reset() {
  cell_ = maze_.start();
  return observe();
}

Observation MazeEnv::step(std::size_t action) {
  if (action >= kMazeActions) fail(ErrorKind::invalid_argument, "maze action out of range");
  cell_ = maze_.step(cell_, static_cast<MazeAction>(action));
  return observe();
}

std::optional<HeatmapLayout> MazeEnv::heatmap_layout() const {
  HeatmapLayout layout;
  layout.rows = static_cast<std::size_t>(maze_.height());
  layout.cols = static_cast<std::size_t>(maze_.width());
  for (int r = 0; r < maze_.height(); ++r) {
    for (int c = 0; c < maze_.width(); ++c) {
      if (maze_.is_wall({r, c})) continue;
      layout.sites.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c),
                              {static_cast<double>(r), static_cast<double>(c)}});
    }
  }
  return layout;
}

PointMassEnv::PointMassEnv(PointMassConfig cfg, std::uint64_t seed, PointMassTabulation tab)
    : world_(cfg, seed), tab_(tab) {
  if (tab_.coverage_bins < 1 || tab_.q_bins < 1) fail(ErrorKind::invalid_argument, "bins must be >= 1");
}

Observation PointMassEnv::observe() const {
  const auto& p = world_.position();
  Observation obs;
  obs.raw = {p[0], p[1]};
  obs.cell = discretize(obs.raw, tab_.coverage_bounds, tab_.coverage_bins);
  StateKey key = discretize(obs.raw, tab_.q_bounds, tab_.q_bins);
  if (tab_.q_heading) {
    const auto& v = world_.velocity();
    StateKey heading = 8;
    if (std::hypot(v[0], v[1]) >= 0.25 * world_.config().max_speed) {
      const double sector = std::round(std::atan2(v[1], v[0]) / (std::numbers::pi / 4.0));
      heading = (static_cast<StateKey>(sector) + 8) % 8;
    }
    key = key * 9 + heading;
  }
  obs.q_key = key;
  return obs;
}

Observation PointMassEnv::reset() {
  world_.reset();
  return observe();
}

Observation PointMassEnv::step(std::size_t action) {
  if (action >= 8) fail(ErrorKind::invalid_argument, "point-mass action out of range");
  const double angle = static_cast<double>(action) * std::numbers::pi / 4.0;
  world_.step({std::cos(angle), std::sin(angle)});
  return observe();
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

RunResult run_element(Environment& env, const FixedEncoder& encoder, const RewardConfig& reward_cfg,
                      const SearchConfig& search, const ScheduleConfig& schedule,
                      const EstimatorConfig& estimator, const AgentConfig& agent, std::uint64_t seed,
                      const RunOptions& options) {
  reward_cfg.validate();
  search.validate();
  schedule.validate();
  estimator.validate();
  agent.validate();

  std::mt19937_64 policy_rng(derive_seed(seed, 0));
  std::mt19937_64 replay_rng(derive_seed(seed, 1));
  std::mt19937_64 search_rng(derive_seed(seed, 2));
  std::mt19937_64 eval_rng(derive_seed(seed, 3));

  RunResult result;
  result.graph = KnnGraph(reward_cfg.k_lifelong, derive_seed(seed, 4));
  result.coverage_rows = env.coverage_rows();
  result.coverage_cols = env.coverage_cols();
  KnnGraph& graph = result.graph;
  const bool use_exact = options.backend != LifelongBackend::graph;
  ExactMemory exact(reward_cfg.k_lifelong, options.backend == LifelongBackend::exact);
  QTable q(env.num_actions(), agent.learning_rate, agent.gamma);
  ReplayBuffer replay(agent.replay_capacity);
  EpisodicRewardTable table;
  const std::optional<HeatmapLayout> layout = env.heatmap_layout();

  auto lifelong = [&](std::span<const double> point, std::mt19937_64& rng) {
    if (use_exact) {
      if (exact.size() == 0) return reward_cfg.empty_memory_reward;
      return novelty_from_neighbors(exact.nearest(point), reward_cfg.neighbor_norm);
    }
    return lifelong_reward(graph, point, search, rng, reward_cfg);
  };

  std::vector<double> batch_ep(agent.batch_size);
  std::vector<double> batch_l(agent.batch_size);
  auto train = [&](std::uint64_t step) {
    for (std::size_t u = 0; u < agent.updates_per_step; ++u) {
      const auto idx = replay.sample(agent.batch_size, replay_rng);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const Transition& tr = replay.at(idx[i]);
        batch_ep[i] = tr.r_ep;
        // With beta = 0 the lifelong stream cannot reach the total reward.
        batch_l[i] = reward_cfg.beta > 0.0 ? lifelong(tr.next_point, search_rng) : 0.0;
      }
      std::vector<CombinedReward> combined;
      try {
        combined = combine_rewards(batch_ep, batch_l, reward_cfg);
      } catch (const Error& e) {
        fail(ErrorKind::numerical_failure,
             "training batch at step " + std::to_string(step) + ": " + e.what());
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const Transition& tr = replay.at(idx[i]);
        q.update(tr.s, tr.action, combined[i].r_total, tr.s_next);
      }
      if (result.batches.size() < options.logged_batches) {
        result.batches.push_back({step, idx, batch_ep, batch_l, combined});
      }
    }
  };

  std::uint64_t t = 0;
  std::size_t episode = 0;
  while (t < schedule.total_steps) {
    ++episode;
    Observation obs = env.reset();
    result.coverage.update_cell(obs.cell);
    std::set<StateKey> episode_cells{obs.cell};
    Episode ep;
    std::vector<Transition> pending;
    for (int i = 0; i < env.episode_length() && t < schedule.total_steps; ++i) {
      const double eps = agent.epsilon(static_cast<double>(t) / static_cast<double>(schedule.total_steps));
      const std::size_t a = epsilon_greedy(q, obs.q_key, eps, policy_rng);
      Observation next = env.step(a);
      StatePoint point = encoder.encode(next.raw);
      if (schedule.in_update_window(t)) {
        graph.insert(point, search);
        if (use_exact) exact.insert(point);
      }
      result.coverage.update_cell(next.cell);
      episode_cells.insert(next.cell);
      ep.states.push_back(point);
      ep.keys.push_back(next.q_key);
      pending.push_back({obs.q_key, a, next.q_key, std::move(point), 0.0, episode});
      ++t;
      if (!replay.empty()) train(t);
      if (i + 1 == env.episode_length() || t == schedule.total_steps) result.endpoints.push_back(next.raw);
      obs = std::move(next);
    }

    const double h = episode_entropy(ep, estimator).value;
    const auto r_ep = assign_episodic_rewards(ep, h, reward_cfg.episodic_mode, &table, reward_cfg.smoothing_k);
    for (std::size_t i = 0; i < pending.size(); ++i) {
      pending[i].r_ep = r_ep[i];
      replay.push(std::move(pending[i]));
    }

    std::vector<double> r_l(ep.states.size());
    for (std::size_t i = 0; i < ep.states.size(); ++i) r_l[i] = lifelong(ep.states[i], eval_rng);
    for (double x : r_l) {
      if (!std::isfinite(x)) fail(ErrorKind::numerical_failure, "non-finite lifelong reward in episode " + std::to_string(episode));
    }

    EpisodeRecord rec;
    rec.episode = episode;
    rec.steps = t;
    rec.entropy_eval = eval_episode_entropy(ep).value;
    rec.mean_r_ep = mean(r_ep);
    rec.mean_r_l = mean(r_l);
    rec.graph_size = graph.size();
    rec.unique_cells = result.coverage.unique();
    result.log.episodes.push_back(rec);
    result.episode_unique_cells.push_back(episode_cells.size());
    result.coverage.snapshot(t);

    if (layout && std::find(options.heatmap_episodes.begin(), options.heatmap_episodes.end(), episode) !=
                      options.heatmap_episodes.end()) {
      Matrix grid(layout->rows, layout->cols);
      for (const auto& site : layout->sites) grid(site.row, site.col) = lifelong(encoder.encode(site.raw), eval_rng);
      result.heatmaps.emplace(episode, std::move(grid));
    }
  }
  result.log.coverage = result.coverage.history();
  result.replay_size = replay.size();
  return result;
}

}  // namespace element
