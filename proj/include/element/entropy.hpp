#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "element/linalg.hpp"
#include "element/state.hpp"

namespace element {

/// Gaussian kernel k(a,b) = exp(-||a-b||^2 / (2 sigma)). Note sigma enters
/// linearly, not squared.
struct KernelConfig {
  double sigma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct GramMatrix {
  Matrix entries;
  bool trace_normalized = false;
};

enum class LogBase { natural, base2 };
enum class Estimator { kde, knn, renyi };

const char* to_string(Estimator estimator);

struct EntropyValue {
  double value = 0.0;
  LogBase log_base = LogBase::natural;
  Estimator estimator = Estimator::kde;

  /// Same quantity expressed in the requested base.
  EntropyValue in_base(LogBase base) const;
};

GramMatrix gram_matrix(std::span<const StatePoint> states, const KernelConfig& kernel);

/// A = K / tr(K).
GramMatrix trace_normalized(const GramMatrix& gram);

/// Plug-in KDE entropy, natural log. The self term k(s_i, s_i) = 1 is part of
/// each inner average and no density normalizer is applied.
EntropyValue kde_entropy(std::span<const StatePoint> states, const KernelConfig& kernel);

/// Kozachenko-Leonenko kNN entropy with bias correction log k - digamma(k),
/// natural log. Requires N > k and strictly positive kth-neighbour distances.
EntropyValue knn_entropy(std::span<const StatePoint> states, std::size_t k);

/// Matrix-based Renyi alpha-entropy in bits. Integer alpha >= 2 goes through
/// tr(A^alpha) by repeated products; other alphas through the eigenvalues
/// (Jacobi up to kJacobiMaxSize states, Eigen's tridiagonal solver beyond).
EntropyValue renyi_matrix_entropy(std::span<const StatePoint> states, double alpha,
                                  const KernelConfig& kernel);

inline constexpr std::size_t kJacobiMaxSize = 64;

/// Same as above but always through the eigenvalue route. Exposed so the
/// routes can be checked against each other.
EntropyValue renyi_entropy_from_eigenvalues(std::span<const StatePoint> states, double alpha,
                                            const KernelConfig& kernel,
                                            EigenSolver solver = EigenSolver::jacobi);

/// Distance from every state to its kth nearest other state (ties by index).
std::vector<double> kth_neighbor_distances(std::span<const StatePoint> states, std::size_t k);

struct KernelSumGap {
  double gap = 0.0;
  bool threshold_ok = false;
  double threshold = 0.0;           ///< sqrt(2 sigma ln((N-k)/eps)), 0 if the log is negative
  double min_kth_distance = 0.0;
};

/// How much of each state's kernel sum lies outside its k nearest neighbours
/// (max over states), plus whether the distance condition that bounds that
/// mass by epsilon is met for every state.
KernelSumGap kernel_sum_gap(std::span<const StatePoint> states, std::size_t k,
                            const KernelConfig& kernel, double epsilon);

/// Evenly spaced deterministic subsample (indices floor(i*N/max_count)); the
/// input itself when it already fits.
std::vector<StatePoint> subsample_evenly(std::span<const StatePoint> states, std::size_t max_count);

/// Digamma by upward recurrence and the asymptotic series; |error| < 1e-12 for x > 0.
double digamma(double x);

}  // namespace element
