#include "element/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "element/error.hpp"

namespace element {

double KernelConfig::operator()(std::span<const double> a, std::span<const double> b) const {
  return std::exp(-squared_distance(a, b) / (2.0 * sigma));
}

const char* to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::kde: return "kde";
    case Estimator::knn: return "knn";
    case Estimator::renyi: return "renyi";
  }
  return "unknown";
}

EntropyValue EntropyValue::in_base(LogBase base) const {
  if (base == log_base) return *this;
  EntropyValue out = *this;
  out.log_base = base;
  out.value = base == LogBase::base2 ? value / std::numbers::ln2 : value * std::numbers::ln2;
  return out;
}

namespace {

void check_kernel(const KernelConfig& kernel) {
  if (!(kernel.sigma > 0.0) || !std::isfinite(kernel.sigma)) {
    fail(ErrorKind::invalid_argument, "kernel sigma must be positive and finite");
  }
}

bool is_integer_power(double alpha) {
  return alpha >= 2.0 && alpha <= 64.0 && std::floor(alpha) == alpha;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    fail(ErrorKind::invalid_argument, "Renyi alpha must be positive and finite");
  }
  if (alpha == 1.0) {
    fail(ErrorKind::invalid_argument,
         "Renyi alpha = 1 is the Shannon limit; use a nearby value such as 1.001");
  }
}

double renyi_from_power_sum(double power_sum, double alpha) {
  return std::log2(power_sum) / (1.0 - alpha) + 0.0;  // no negative zero
}

}  // namespace

GramMatrix gram_matrix(std::span<const StatePoint> states, const KernelConfig& kernel) {
  check_kernel(kernel);
  common_dimension(states);
  const std::size_t n = states.size();
  GramMatrix gram{Matrix(n, n), false};
  for (std::size_t i = 0; i < n; ++i) {
    gram.entries(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel(states[i], states[j]);
      gram.entries(i, j) = v;
      gram.entries(j, i) = v;
    }
  }
  return gram;
}

GramMatrix trace_normalized(const GramMatrix& gram) {
  GramMatrix out = gram;
  const double tr = gram.entries.trace();
  if (!(tr > 0.0)) fail(ErrorKind::numerical_failure, "Gram matrix has non-positive trace");
  const std::size_t n = gram.entries.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.entries(i, j) /= tr;
  out.trace_normalized = true;
  return out;
}

EntropyValue kde_entropy(std::span<const StatePoint> states, const KernelConfig& kernel) {
  check_kernel(kernel);
  common_dimension(states);
  const std::size_t n = states.size();
  std::vector<double> row_sums(n, 1.0);  // self term
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel(states[i], states[j]);
      row_sums[i] += v;
      row_sums[j] += v;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (double s : row_sums) acc -= std::log(s * inv_n);
  return {acc * inv_n, LogBase::natural, Estimator::kde};
}

std::vector<double> kth_neighbor_distances(std::span<const StatePoint> states, std::size_t k) {
  common_dimension(states);
  const std::size_t n = states.size();
  if (k == 0) fail(ErrorKind::invalid_argument, "k must be at least 1");
  if (n <= k) {
    fail(ErrorKind::invalid_argument, "need more than k=" + std::to_string(k) + " states, got " +
                                          std::to_string(n));
  }
  std::vector<double> result(n);
  std::vector<std::pair<double, std::size_t>> row;
  row.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(squared_distance(states[i], states[j]), j);
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    result[i] = std::sqrt(row[k - 1].first);
  }
  return result;
}

EntropyValue knn_entropy(std::span<const StatePoint> states, std::size_t k) {
  const std::vector<double> rho = kth_neighbor_distances(states, k);
  const double n = static_cast<double>(states.size());
  const double d = static_cast<double>(states.front().size());
  const double kd = static_cast<double>(k);
  // log of N * pi^{d/2} / (k * Gamma(d/2 + 1)), shared by every term.
  const double log_volume_term =
      std::log(n) + 0.5 * d * std::log(std::numbers::pi) - std::log(kd) - std::lgamma(0.5 * d + 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) {
      fail(ErrorKind::degenerate_distance,
           "state " + std::to_string(i) + " has a zero distance to its kth neighbour");
    }
    acc += d * std::log(rho[i]);
  }
  const double bias_correction = std::log(kd) - digamma(kd);
  return {acc / n + log_volume_term + bias_correction, LogBase::natural, Estimator::knn};
}

EntropyValue renyi_entropy_from_eigenvalues(std::span<const StatePoint> states, double alpha,
                                            const KernelConfig& kernel, EigenSolver solver) {
  check_alpha(alpha);
  const GramMatrix a = trace_normalized(gram_matrix(states, kernel));
  const std::vector<double> eigenvalues = symmetric_eigenvalues(a.entries, solver);
  double power_sum = 0.0;
  for (double lambda : eigenvalues) {
    if (lambda < -1e-10) {
      fail(ErrorKind::numerical_failure,
           "normalized Gram matrix has eigenvalue " + std::to_string(lambda));
    }
    if (lambda > 0.0) power_sum += std::pow(lambda, alpha);
  }
  return {renyi_from_power_sum(power_sum, alpha), LogBase::base2, Estimator::renyi};
}

EntropyValue renyi_matrix_entropy(std::span<const StatePoint> states, double alpha,
                                  const KernelConfig& kernel) {
  check_alpha(alpha);
  if (!is_integer_power(alpha)) {
    const auto solver = states.size() <= kJacobiMaxSize ? EigenSolver::jacobi : EigenSolver::tridiagonal;
    return renyi_entropy_from_eigenvalues(states, alpha, kernel, solver);
  }

  const GramMatrix a = trace_normalized(gram_matrix(states, kernel));
  const auto power = static_cast<int>(alpha);
  Matrix acc = a.entries;
  for (int p = 2; p < power; ++p) acc = acc * a.entries;
  // tr(acc * A) without forming the last product.
  double trace = 0.0;
  const std::size_t n = acc.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) trace += acc(i, j) * a.entries(j, i);
  if (!(trace > 0.0)) fail(ErrorKind::numerical_failure, "tr(A^alpha) is not positive");
  return {renyi_from_power_sum(trace, alpha), LogBase::base2, Estimator::renyi};
}

KernelSumGap kernel_sum_gap(std::span<const StatePoint> states, std::size_t k,
                            const KernelConfig& kernel, double epsilon) {
  check_kernel(kernel);
  common_dimension(states);
  if (!(epsilon > 0.0)) fail(ErrorKind::invalid_argument, "epsilon must be positive");
  const std::size_t n = states.size();
  if (k == 0 || n <= k) {
    fail(ErrorKind::invalid_argument, "kernel_sum_gap needs N > k >= 1");
  }

  KernelSumGap out;
  const double log_ratio = std::log(static_cast<double>(n - k) / epsilon);
  out.threshold = log_ratio > 0.0 ? std::sqrt(2.0 * kernel.sigma * log_ratio) : 0.0;
  out.min_kth_distance = std::numeric_limits<double>::infinity();

  std::vector<std::pair<double, std::size_t>> row;
  row.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.emplace_back(squared_distance(states[i], states[j]), j);
    }
    std::sort(row.begin(), row.end());
    out.min_kth_distance = std::min(out.min_kth_distance, std::sqrt(row[k - 1].first));
    // Full sum minus the kNN sum, accumulated directly as the tail so the
    // difference does not cancel.
    double tail = 0.0;
    for (std::size_t r = k; r < row.size(); ++r) tail += std::exp(-row[r].first / (2.0 * kernel.sigma));
    out.gap = std::max(out.gap, tail);
  }
  out.threshold_ok = out.min_kth_distance >= out.threshold;
  return out;
}

std::vector<StatePoint> subsample_evenly(std::span<const StatePoint> states, std::size_t max_count) {
  if (max_count == 0 || states.size() <= max_count) return {states.begin(), states.end()};
  std::vector<StatePoint> out;
  out.reserve(max_count);
  for (std::size_t i = 0; i < max_count; ++i) out.push_back(states[i * states.size() / max_count]);
  return out;
}

double digamma(double x) {
  if (!(x > 0.0)) fail(ErrorKind::invalid_argument, "digamma is implemented for x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic expansion in Bernoulli numbers.
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result + std::log(x) - 0.5 * inv - series;
}

}  // namespace element
