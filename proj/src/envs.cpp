#include "element/envs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <sstream>

#include "element/error.hpp"

namespace element {

Maze Maze::parse(std::string_view text, int max_steps) {
  if (max_steps < 1) fail(ErrorKind::invalid_argument, "maze max_steps must be >= 1");
  std::vector<std::string_view> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    rows.push_back(line);
    pos = end + 1;
  }
  if (rows.empty() || rows.front().empty()) throw ParseError::at_line(1, 1, "empty maze");

  Maze m;
  m.max_steps_ = max_steps;
  m.height_ = static_cast<int>(rows.size());
  m.width_ = static_cast<int>(rows.front().size());
  m.walls_.assign(static_cast<std::size_t>(m.width_) * m.height_, false);
  bool have_start = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != m.width_) {
      throw ParseError::at_line(r + 1, std::min(rows[r].size(), rows.front().size()) + 1,
                                "row has " + std::to_string(rows[r].size()) + " cells, expected " +
                                    std::to_string(m.width_));
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const char ch = rows[r][c];
      if (ch == '#') {
        m.walls_[r * m.width_ + c] = true;
      } else if (ch == 'S') {
        if (have_start) throw ParseError::at_line(r + 1, c + 1, "second start cell");
        have_start = true;
        m.start_ = {static_cast<int>(r), static_cast<int>(c)};
      } else if (ch != '.') {
        throw ParseError::at_line(r + 1, c + 1, std::string("unexpected character '") + ch + "'");
      }
    }
  }
  if (!have_start) throw ParseError::at_line(1, 1, "maze has no start cell 'S'");
  return m;
}

Maze load_maze(const std::string& path, int max_steps) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io_error, "cannot open maze file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Maze::parse(buf.str(), max_steps);
}

bool Maze::in_bounds(Cell c) const {
  return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
}

bool Maze::is_wall(Cell c) const {
  if (!in_bounds(c)) fail(ErrorKind::invalid_argument, "cell outside the maze");
  return walls_[static_cast<std::size_t>(c.row) * width_ + c.col];
}

Cell Maze::cell(StateKey key) const {
  if (key < 0 || key >= static_cast<StateKey>(walls_.size())) {
    fail(ErrorKind::invalid_argument, "cell key " + std::to_string(key) + " outside the maze");
  }
  return {static_cast<int>(key / width_), static_cast<int>(key % width_)};
}

Cell Maze::step(Cell from, MazeAction action) const {
  if (!in_bounds(from) || is_wall(from)) fail(ErrorKind::invalid_argument, "agent is not on a free cell");
  Cell to = from;
  switch (action) {
    case MazeAction::up: --to.row; break;
    case MazeAction::down: ++to.row; break;
    case MazeAction::left: --to.col; break;
    case MazeAction::right: ++to.col; break;
  }
  if (!in_bounds(to) || is_wall(to)) return from;
  return to;
}

std::vector<int> Maze::distances_from_start() const {
  std::vector<int> dist(walls_.size(), -1);
  std::deque<Cell> queue{start_};
  dist[key(start_)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (MazeAction a : {MazeAction::up, MazeAction::down, MazeAction::left, MazeAction::right}) {
      const Cell n = step(c, a);
      if (dist[key(n)] < 0) {
        dist[key(n)] = dist[key(c)] + 1;
        queue.push_back(n);
      }
    }
  }
  return dist;
}

std::size_t Maze::reachable_count() const {
  const auto d = distances_from_start();
  return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](int x) { return x >= 0; }));
}

std::string Maze::to_text() const {
  std::string out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      out += Cell{r, c} == start_ ? 'S' : (walls_[static_cast<std::size_t>(r) * width_ + c] ? '#' : '.');
    }
    out += '\n';
  }
  return out;
}

void PointMassConfig::validate() const {
  if (!(accel_gain > 0.0)) fail(ErrorKind::invalid_argument, "accel_gain must be positive");
  if (!(dt > 0.0)) fail(ErrorKind::invalid_argument, "dt must be positive");
  if (!(max_speed > 0.0)) fail(ErrorKind::invalid_argument, "max_speed must be positive");
  if (!(reset_noise >= 0.0)) fail(ErrorKind::invalid_argument, "reset_noise must be >= 0");
  if (episode_length < 1) fail(ErrorKind::invalid_argument, "episode_length must be >= 1");
}

PointMassWorld::PointMassWorld(PointMassConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
  cfg_.validate();
}

PointMassWorld::Vec2 PointMassWorld::reset() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = cfg_.reset_noise * std::sqrt(unit(rng_));
  const double angle = 2.0 * std::numbers::pi * unit(rng_);
  position_ = {radius * std::cos(angle), radius * std::sin(angle)};
  velocity_ = {0.0, 0.0};
  steps_ = 0;
  return position_;
}

PointMassWorld::Vec2 PointMassWorld::step(Vec2 action) {
  for (double& a : action) {
    if (std::isnan(a)) fail(ErrorKind::invalid_argument, "NaN action");
    if (a < -1.0 || a > 1.0) {
      a = std::clamp(a, -1.0, 1.0);
      ++clamped_;
    }
  }
  for (int i = 0; i < 2; ++i) velocity_[i] += action[i] * cfg_.accel_gain;
  const double speed = std::hypot(velocity_[0], velocity_[1]);
  if (speed > cfg_.max_speed) {
    const double s = cfg_.max_speed / speed;
    velocity_[0] *= s;
    velocity_[1] *= s;
  }
  for (int i = 0; i < 2; ++i) position_[i] += velocity_[i] * cfg_.dt;
  ++steps_;
  return position_;
}

StateKey discretize(std::span<const double> position, const Box& bounds, int bins) {
  if (bins < 1) fail(ErrorKind::invalid_argument, "bins must be >= 1");
  if (position.size() < 2) fail(ErrorKind::invalid_argument, "discretize needs an x-y position");
  if (!(bounds.max_x > bounds.min_x) || !(bounds.max_y > bounds.min_y)) {
    fail(ErrorKind::invalid_argument, "degenerate discretization bounds");
  }
  auto bin = [bins](double v, double lo, double hi) {
    const double f = std::floor((v - lo) / (hi - lo) * bins);
    if (!(f >= 0.0)) return 0;  // also catches NaN
    return static_cast<int>(std::min(f, static_cast<double>(bins - 1)));
  };
  const int col = bin(position[0], bounds.min_x, bounds.max_x);
  const int row = bin(position[1], bounds.min_y, bounds.max_y);
  return static_cast<StateKey>(row) * bins + col;
}

}  // namespace element
