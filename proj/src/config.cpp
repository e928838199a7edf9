#include "element/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "element/error.hpp"

namespace element {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::invalid_argument, path + ": " + what);
}

template <typename Enum>
Enum enum_from(const std::string& path, const std::string& text, const std::map<std::string, Enum>& names) {
  auto it = names.find(text);
  if (it != names.end()) return it->second;
  std::string options;
  for (const auto& [name, value] : names) options += (options.empty() ? "" : ", ") + name;
  field_error(path, "unknown value '" + text + "' (expected one of " + options + ")");
}

const std::map<std::string, EnvironmentKind> kEnvironments{{"maze", EnvironmentKind::maze},
                                                           {"pointmass", EnvironmentKind::pointmass}};
const std::map<std::string, Estimator> kEstimators{
    {"kde", Estimator::kde}, {"knn", Estimator::knn}, {"renyi", Estimator::renyi}};
const std::map<std::string, EpisodicMode> kEpisodicModes{
    {"per_episode_constant", EpisodicMode::per_episode_constant},
    {"tabular_running_mean", EpisodicMode::tabular_running_mean},
    {"knn_smoothed", EpisodicMode::knn_smoothed}};
const std::map<std::string, Normalization> kNormalizations{{"minmax_batch", Normalization::minmax_batch},
                                                           {"none", Normalization::none}};
const std::map<std::string, NeighborNorm> kNeighborNorms{{"k_vector", NeighborNorm::k_vector},
                                                         {"kth_distance", NeighborNorm::kth_distance}};
const std::map<std::string, LifelongBackend> kBackends{{"graph", LifelongBackend::graph},
                                                       {"exact", LifelongBackend::exact},
                                                       {"exact_distinct", LifelongBackend::exact_distinct}};

/// One JSON object being consumed; remembers which keys were read so the
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) field_error(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) field_error(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) field_error(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) field_error(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void read(const std::string& key, Int& out) {
    if (const json* v = find(key)) out = integer<Int>(*v, at(key));
  }

  template <typename Int>
  void read(const std::string& key, std::vector<Int>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) field_error(at(key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        out.push_back(integer<Int>((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }

  template <typename Enum>
  void read_enum(const std::string& key, Enum& out, const std::map<std::string, Enum>& names) {
    std::string text;
    if (find(key) == nullptr) return;
    read(key, text);
    out = enum_from(at(key), text, names);
  }

  template <typename Fn>
  void child(const std::string& key, Fn&& fn) {
    if (const json* v = find(key)) {
      Section s(*v, at(key));
      fn(s);
      s.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) field_error(at(it.key()), "unknown key");
    }
  }

 private:
  template <typename Int>
  static Int integer(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
      const auto x = v.get<std::uint64_t>();
      if (x > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) field_error(path, "value too large");
      return static_cast<Int>(x);
    }
    if (v.is_number_integer()) {
      const auto x = v.get<std::int64_t>();
      if (std::is_unsigned_v<Int> && x < 0) field_error(path, "must be >= 0");
      return static_cast<Int>(x);
    }
    if (v.is_number_float()) {
      const double x = v.get<double>();
      // Accept 5e4 style literals that denote whole numbers.
      if (std::floor(x) == x && std::fabs(x) < 9.0e15) {
        if (std::is_unsigned_v<Int> && x < 0) field_error(path, "must be >= 0");
        return static_cast<Int>(x);
      }
    }
    field_error(path, "expected an integer");
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) field_error(path, what);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (environment == EnvironmentKind::maze) {
    check(!maze.path.empty(), "maze.path", "must not be empty");
    check(maze.max_steps >= 1, "maze.max_steps", "must be >= 1");
  } else {
    const auto& w = pointmass.world;
    check(w.accel_gain > 0.0, "pointmass.accel_gain", "must be > 0");
    check(w.dt > 0.0, "pointmass.dt", "must be > 0");
    check(w.max_speed > 0.0, "pointmass.max_speed", "must be > 0");
    check(w.reset_noise >= 0.0, "pointmass.reset_noise", "must be >= 0");
    check(w.episode_length >= 1, "pointmass.episode_length", "must be >= 1");
    check(pointmass.state_scale > 0.0 && std::isfinite(pointmass.state_scale), "pointmass.state_scale",
          "must be > 0");
    check(pointmass.tabulation.q_bins >= 1, "pointmass.q_bins", "must be >= 1");
    check(pointmass.tabulation.coverage_bins >= 1, "pointmass.coverage_bins", "must be >= 1");
  }
  check(estimator.kernel.sigma > 0.0 && std::isfinite(estimator.kernel.sigma), "estimator.sigma", "must be > 0");
  check(estimator.k >= 1, "estimator.k", "must be >= 1");
  check(estimator.alpha > 0.0 && estimator.alpha != 1.0 && std::isfinite(estimator.alpha), "estimator.alpha",
        "must be > 0 and different from 1");
  check(reward.beta >= 0.0 && std::isfinite(reward.beta), "reward.beta", "must be >= 0");
  check(reward.episodic_weight >= 0.0 && std::isfinite(reward.episodic_weight), "reward.episodic_weight",
        "must be >= 0");
  check(reward.empty_memory_reward >= 0.0 && std::isfinite(reward.empty_memory_reward),
        "reward.empty_memory_reward", "must be >= 0");
  check(reward.smoothing_k >= 1, "reward.smoothing_k", "must be >= 1");
  check(reward.k_lifelong >= 1, "search.k_lifelong", "must be >= 1");
  check(search.greedy_steps >= 1, "search.r1", "must be >= 1");
  check(search.restarts >= 1, "search.r2", "must be >= 1");
  check(search.update_depth >= 1, "search.depth", "must be >= 1");
  check(schedule.update_interval >= 1, "schedule.update_interval", "must be >= 1");
  check(schedule.update_steps >= 1, "schedule.update_steps", "must be >= 1");
  check(schedule.update_steps <= schedule.update_interval, "schedule.update_steps",
        "must not exceed schedule.update_interval");
  check(schedule.total_steps >= 1, "schedule.total_steps", "must be >= 1");
  check(agent.learning_rate > 0.0 && agent.learning_rate <= 1.0, "agent.learning_rate", "must lie in (0, 1]");
  check(agent.gamma >= 0.0 && agent.gamma < 1.0, "agent.gamma", "must lie in [0, 1)");
  check(agent.epsilon_start >= 0.0 && agent.epsilon_start <= 1.0, "agent.epsilon_start", "must lie in [0, 1]");
  check(agent.epsilon_end >= 0.0 && agent.epsilon_end <= 1.0, "agent.epsilon_end", "must lie in [0, 1]");
  check(agent.batch_size >= 1, "agent.batch_size", "must be >= 1");
  check(agent.replay_capacity >= 1, "agent.replay_capacity", "must be >= 1");
  for (std::size_t e : heatmap_episodes) check(e >= 1, "heatmap_episodes", "episode numbers start at 1");
  check(!seeds.empty(), "seeds", "must list at least one seed");
  check(!output_dir.empty(), "output_dir", "must not be empty");
}

ExperimentConfig parse_config(std::string_view json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError::at_offset(e.byte, e.what());
  }

  ExperimentConfig cfg;
  Section top(root, "");
  top.read_enum("environment", cfg.environment, kEnvironments);
  top.child("maze", [&](Section& s) {
    s.read("path", cfg.maze.path);
    s.read("max_steps", cfg.maze.max_steps);
  });
  top.child("pointmass", [&](Section& s) {
    auto& p = cfg.pointmass;
    s.read("accel_gain", p.world.accel_gain);
    s.read("dt", p.world.dt);
    s.read("max_speed", p.world.max_speed);
    s.read("reset_noise", p.world.reset_noise);
    s.read("episode_length", p.world.episode_length);
    s.read("state_scale", p.state_scale);
    s.read("q_bins", p.tabulation.q_bins);
    s.read("q_heading", p.tabulation.q_heading);
    s.read("coverage_bins", p.tabulation.coverage_bins);
  });
  top.child("estimator", [&](Section& s) {
    s.read_enum("kind", cfg.estimator.estimator, kEstimators);
    s.read("sigma", cfg.estimator.kernel.sigma);
    s.read("k", cfg.estimator.k);
    s.read("alpha", cfg.estimator.alpha);
    s.read("max_states", cfg.estimator.max_states);
  });
  top.child("reward", [&](Section& s) {
    s.read("beta", cfg.reward.beta);
    s.read("episodic_weight", cfg.reward.episodic_weight);
    s.read_enum("episodic_mode", cfg.reward.episodic_mode, kEpisodicModes);
    s.read_enum("normalization", cfg.reward.normalization, kNormalizations);
    s.read_enum("neighbor_norm", cfg.reward.neighbor_norm, kNeighborNorms);
    s.read("empty_memory_reward", cfg.reward.empty_memory_reward);
    s.read("smoothing_k", cfg.reward.smoothing_k);
    s.read_enum("backend", cfg.backend, kBackends);
  });
  top.child("search", [&](Section& s) {
    s.read("r1", cfg.search.greedy_steps);
    s.read("r2", cfg.search.restarts);
    s.read("depth", cfg.search.update_depth);
    s.read("k_lifelong", cfg.reward.k_lifelong);
  });
  top.child("schedule", [&](Section& s) {
    s.read("update_interval", cfg.schedule.update_interval);
    s.read("update_steps", cfg.schedule.update_steps);
    s.read("total_steps", cfg.schedule.total_steps);
  });
  top.child("agent", [&](Section& s) {
    s.read("learning_rate", cfg.agent.learning_rate);
    s.read("gamma", cfg.agent.gamma);
    s.read("epsilon_start", cfg.agent.epsilon_start);
    s.read("epsilon_end", cfg.agent.epsilon_end);
    s.read("batch_size", cfg.agent.batch_size);
    s.read("updates_per_step", cfg.agent.updates_per_step);
    s.read("replay_capacity", cfg.agent.replay_capacity);
  });
  top.read("heatmap_episodes", cfg.heatmap_episodes);
  top.read("seeds", cfg.seeds);
  top.read("output_dir", cfg.output_dir);
  top.finish();

  if (cfg.environment == EnvironmentKind::pointmass) {
    cfg.pointmass.tabulation.q_bounds = cfg.pointmass.tabulation.coverage_bounds;
  }
  namespace fs = std::filesystem;
  if (fs::path(cfg.maze.path).is_relative()) cfg.maze.path = (fs::path(base_dir) / cfg.maze.path).string();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io_error, "cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string to_json(const ExperimentConfig& cfg) {
  auto name_of = [](const auto& names, auto value) {
    for (const auto& [n, v] : names)
      if (v == value) return n;
    return std::string("unknown");
  };
  json j;
  j["environment"] = name_of(kEnvironments, cfg.environment);
  j["maze"] = {{"path", cfg.maze.path}, {"max_steps", cfg.maze.max_steps}};
  const auto& p = cfg.pointmass;
  j["pointmass"] = {{"accel_gain", p.world.accel_gain},   {"dt", p.world.dt},
                    {"max_speed", p.world.max_speed},     {"reset_noise", p.world.reset_noise},
                    {"episode_length", p.world.episode_length}, {"state_scale", p.state_scale},
                    {"q_bins", p.tabulation.q_bins},      {"q_heading", p.tabulation.q_heading},
                    {"coverage_bins", p.tabulation.coverage_bins}};
  j["estimator"] = {{"kind", name_of(kEstimators, cfg.estimator.estimator)},
                    {"sigma", cfg.estimator.kernel.sigma},
                    {"k", cfg.estimator.k},
                    {"alpha", cfg.estimator.alpha},
                    {"max_states", cfg.estimator.max_states}};
  j["reward"] = {{"beta", cfg.reward.beta},
                 {"episodic_weight", cfg.reward.episodic_weight},
                 {"episodic_mode", name_of(kEpisodicModes, cfg.reward.episodic_mode)},
                 {"normalization", name_of(kNormalizations, cfg.reward.normalization)},
                 {"neighbor_norm", name_of(kNeighborNorms, cfg.reward.neighbor_norm)},
                 {"empty_memory_reward", cfg.reward.empty_memory_reward},
                 {"smoothing_k", cfg.reward.smoothing_k},
                 {"backend", name_of(kBackends, cfg.backend)}};
  j["search"] = {{"r1", cfg.search.greedy_steps},
                 {"r2", cfg.search.restarts},
                 {"depth", cfg.search.update_depth},
                 {"k_lifelong", cfg.reward.k_lifelong}};
  j["schedule"] = {{"update_interval", cfg.schedule.update_interval},
                   {"update_steps", cfg.schedule.update_steps},
                   {"total_steps", cfg.schedule.total_steps}};
  j["agent"] = {{"learning_rate", cfg.agent.learning_rate}, {"gamma", cfg.agent.gamma},
                {"epsilon_start", cfg.agent.epsilon_start}, {"epsilon_end", cfg.agent.epsilon_end},
                {"batch_size", cfg.agent.batch_size},       {"updates_per_step", cfg.agent.updates_per_step},
                {"replay_capacity", cfg.agent.replay_capacity}};
  j["heatmap_episodes"] = cfg.heatmap_episodes;
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2);
}

FixedEncoder make_encoder(const ExperimentConfig& cfg) {
  if (cfg.environment == EnvironmentKind::maze) return FixedEncoder::identity(2);
  return FixedEncoder::identity(2, cfg.pointmass.state_scale);
}

}  // namespace element
