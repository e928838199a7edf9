#include "element/state.hpp"

#include <cmath>
#include <string>

#include "element/error.hpp"

namespace element {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

std::size_t common_dimension(std::span<const StatePoint> points) {
  if (points.empty()) fail(ErrorKind::empty_input, "no states given");
  const std::size_t dim = points.front().size();
  if (dim == 0) fail(ErrorKind::invalid_argument, "states must have at least one coordinate");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].size() != dim) {
      fail(ErrorKind::invalid_argument, "state " + std::to_string(i) + " has dimension " +
                                            std::to_string(points[i].size()) + ", expected " +
                                            std::to_string(dim));
    }
  }
  return dim;
}

}  // namespace element
