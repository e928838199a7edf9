#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace element {

/// A point in the representation space where entropies are measured.
using StatePoint = std::vector<double>;

/// Discrete identity of a state for tabular bookkeeping (maze cell, Q-table bin).
using StateKey = std::int64_t;

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

/// Throws invalid-argument unless every point has the same nonzero dimension.
std::size_t common_dimension(std::span<const StatePoint> points);

/// An ordered trajectory of encoded states. `keys` is either empty or
/// parallel to `states`.
struct Episode {
  std::vector<StatePoint> states;
  std::vector<StateKey> keys;

  std::size_t length() const { return states.size(); }
};

/// An episode reduced to what reward decomposition needs: the state keys
/// visited at each step and the entropy scored for the whole trajectory.
struct ScoredEpisode {
  std::vector<StateKey> keys;
  double entropy = 0.0;

  std::size_t length() const { return keys.size(); }
};

}  // namespace element
