#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "element/agents.hpp"
#include "element/encoder.hpp"
#include "element/envs.hpp"
#include "element/knn_graph.hpp"
#include "element/rewards.hpp"

namespace element {

enum class EnvironmentKind { maze, pointmass };

struct MazeSettings {
  std::string path = "assets/maze20.txt";
  int max_steps = 700;
};

struct PointMassSettings {
  PointMassConfig world{};
  PointMassTabulation tabulation{};
  /// Positions are multiplied by this before any entropy or novelty is measured.
  double state_scale = 0.01;
};

/// Everything one `element run` needs. JSON sections mirror the members;
/// unknown keys are rejected.
struct ExperimentConfig {
  EnvironmentKind environment = EnvironmentKind::maze;
  MazeSettings maze{};
  PointMassSettings pointmass{};
  EstimatorConfig estimator{};
  RewardConfig reward{};
  LifelongBackend backend = LifelongBackend::graph;
  SearchConfig search{};
  ScheduleConfig schedule{};
  AgentConfig agent{};
  std::vector<std::size_t> heatmap_episodes{5, 50, 300};
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";

  /// Throws Error(invalid_argument) whose message starts with the offending
  /// field path, e.g. "reward.beta: must be >= 0".
  void validate() const;
};

/// Parses and validates. `base_dir` resolves a relative maze path.
ExperimentConfig parse_config(std::string_view json_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

std::string to_json(const ExperimentConfig& cfg);

FixedEncoder make_encoder(const ExperimentConfig& cfg);

}  // namespace element
