#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "element/entropy.hpp"
#include "element/envs.hpp"
#include "element/linalg.hpp"
#include "element/state.hpp"

namespace element {

/// Renyi alpha = 1.001, sigma = 1, at most 256 evenly spaced states.
EntropyValue eval_episode_entropy(const Episode& ep);

class CoverageCounter {
 public:
  struct Snapshot {
    std::uint64_t step = 0;
    std::size_t unique = 0;
  };

  explicit CoverageCounter(int bins = 100);

  /// Marks the cell of `position`; returns the number of distinct cells so far.
  std::size_t update(std::span<const double> position, const Box& bounds);
  /// Same for an already discrete cell id.
  std::size_t update_cell(StateKey cell);
  std::size_t unique() const { return visited_.size(); }
  bool visited(StateKey cell) const { return visited_.count(cell) > 0; }
  int bins() const { return bins_; }

  void snapshot(std::uint64_t step);
  const std::vector<Snapshot>& history() const { return history_; }

 private:
  int bins_;
  std::unordered_set<StateKey> visited_;
  std::vector<Snapshot> history_;
};

struct EpisodeRecord {
  std::size_t episode = 0;
  std::uint64_t steps = 0;       ///< environment steps taken by the end of the episode
  double entropy_eval = 0.0;     ///< eval_episode_entropy, bits
  double mean_r_ep = 0.0;        ///< mean raw episodic reward of the episode's states
  double mean_r_l = 0.0;         ///< mean raw lifelong reward of the episode's states at episode end
  std::size_t graph_size = 0;
  std::size_t unique_cells = 0;  ///< distinct cells visited since the start of training

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct RunLog {
  std::vector<EpisodeRecord> episodes;
  std::vector<CoverageCounter::Snapshot> coverage;
};

inline constexpr std::string_view kCsvHeader =
    "episode,steps,entropy_eval,mean_r_ep,mean_r_l,graph_size,unique_cells";

std::string format_csv(const RunLog& log);
std::vector<EpisodeRecord> parse_csv(std::string_view text);
void emit_csv(const RunLog& log, const std::string& path);

/// Binary PGM (P5, maxval 255), min -> 0 and max -> 255 linearly; a constant
/// grid renders black.
std::string format_heatmap(const Matrix& grid);
void emit_heatmap(const Matrix& grid, const std::string& path);

/// Visited cells as a rows x cols grid of 0/1, cell id = row * cols + col.
Matrix coverage_grid(const CoverageCounter& counter, std::size_t rows, std::size_t cols);

void write_file(const std::string& path, std::string_view bytes);

}  // namespace element
