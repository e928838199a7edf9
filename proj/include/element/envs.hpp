#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "element/state.hpp"

namespace element {

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class MazeAction { up, down, left, right };
inline constexpr std::size_t kMazeActions = 4;

/// Grid maze without terminal states; the agent walks max_steps moves and is
/// returned to the start.
class Maze {
 public:
  /// Rows of '#' (wall), '.' (free) and exactly one 'S' (start). A single
  /// trailing newline and '\r' line endings are accepted.
  static Maze parse(std::string_view text, int max_steps = 700);

  int width() const { return width_; }
  int height() const { return height_; }
  Cell start() const { return start_; }
  int max_steps() const { return max_steps_; }

  bool in_bounds(Cell c) const;
  bool is_wall(Cell c) const;
  StateKey key(Cell c) const { return static_cast<StateKey>(c.row) * width_ + c.col; }
  Cell cell(StateKey key) const;

  /// One move; blocked or off-grid moves leave the agent in place.
  Cell step(Cell from, MazeAction action) const;

  /// BFS move count from the start for every cell (row-major), -1 where
  /// unreachable or wall.
  std::vector<int> distances_from_start() const;
  std::size_t reachable_count() const;

  std::string to_text() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int max_steps_ = 700;
  Cell start_;
  std::vector<bool> walls_;
};

Maze load_maze(const std::string& path, int max_steps = 700);

struct PointMassConfig {
  double accel_gain = 0.1;
  double dt = 1.0;
  double max_speed = 1.0;
  double reset_noise = 0.1;
  int episode_length = 1000;

  void validate() const;
};

/// Frictionless 2-D point with bounded speed, driven by accelerations in [-1,1]^2.
class PointMassWorld {
 public:
  using Vec2 = std::array<double, 2>;

  PointMassWorld(PointMassConfig cfg, std::uint64_t seed);

  /// Uniform position in the disc of radius reset_noise, zero velocity.
  Vec2 reset();
  /// Out-of-range action components are clamped and counted.
  Vec2 step(Vec2 action);

  const Vec2& position() const { return position_; }
  const Vec2& velocity() const { return velocity_; }
  int steps_taken() const { return steps_; }
  bool episode_done() const { return steps_ >= cfg_.episode_length; }
  std::uint64_t clamped_actions() const { return clamped_; }
  const PointMassConfig& config() const { return cfg_; }

 private:
  PointMassConfig cfg_;
  std::mt19937_64 rng_;
  Vec2 position_{0.0, 0.0};
  Vec2 velocity_{0.0, 0.0};
  int steps_ = 0;
  std::uint64_t clamped_ = 0;
};

struct Box {
  double min_x = -1000.0;
  double max_x = 1000.0;
  double min_y = -1000.0;
  double max_y = 1000.0;
};

/// Uniform bins x bins grid over `bounds`; out-of-range coordinates clamp to
/// the edge bins. Returns row * bins + col with the row taken from y.
StateKey discretize(std::span<const double> position, const Box& bounds, int bins);

}  // namespace element
