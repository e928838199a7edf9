#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "element/entropy.hpp"
#include "element/error.hpp"
#include "element/linalg.hpp"
#include "element/verify.hpp"

using namespace element;

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

std::vector<StatePoint> random_points(std::size_t n, std::size_t d, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  std::vector<StatePoint> pts(n, StatePoint(d));
  for (auto& p : pts)
    for (double& x : p) x = g(rng);
  return pts;
}

// Written out directly from the estimator definitions, independently of the library.
double kde_oracle(const std::vector<StatePoint>& s, double sigma) {
  const double n = static_cast<double>(s.size());
  double total = 0.0;
  for (const auto& a : s) {
    double inner = 0.0;
    for (const auto& b : s) {
      double sq = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
      inner += std::exp(-sq / (2.0 * sigma));
    }
    total += std::log(inner / n);
  }
  return -total / n;
}

double knn_oracle(const std::vector<StatePoint>& s, int k) {
  const std::size_t n = s.size();
  const double d = static_cast<double>(s[0].size());
  double harmonic = 0.0;
  for (int j = 1; j < k; ++j) harmonic += 1.0 / j;
  const double psi_k = -kEulerGamma + harmonic;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dists;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double sq = 0.0;
      for (std::size_t c = 0; c < s[i].size(); ++c) sq += (s[i][c] - s[j][c]) * (s[i][c] - s[j][c]);
      dists.push_back(std::sqrt(sq));
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    const double rho = dists[k - 1];
    total += std::log(static_cast<double>(n) * std::pow(rho, d) * std::pow(std::numbers::pi, d / 2.0) /
                      (k * std::tgamma(d / 2.0 + 1.0)));
  }
  return total / static_cast<double>(n) + std::log(static_cast<double>(k)) - psi_k;
}

}  // namespace

TEST_CASE("gram matrix examples") {
  CHECK(gram_matrix(std::vector<StatePoint>{{2.0, 3.0}}, KernelConfig{}).entries == Matrix::from_rows({{1.0}}));
  auto same = gram_matrix(std::vector<StatePoint>{{1.0}, {1.0}}, KernelConfig{});
  CHECK(same.entries == Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}}));
  auto two = gram_matrix(std::vector<StatePoint>{{0.0}, {1.0}}, KernelConfig{0.5});
  CHECK(two.entries(0, 1) == doctest::Approx(0.3678794).epsilon(1e-7));
  CHECK(two.entries(0, 1) == two.entries(1, 0));
}

TEST_CASE("gram matrix errors") {
  CHECK_THROWS_AS(gram_matrix(std::vector<StatePoint>{}, KernelConfig{}), Error);
  try {
    gram_matrix(std::vector<StatePoint>{}, KernelConfig{});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_input);
  }
  try {
    gram_matrix(std::vector<StatePoint>{{1.0}, {1.0, 2.0}}, KernelConfig{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("trace normalization gives unit trace and eigenvalues in [0,1]") {
  auto pts = random_points(30, 3, 4);
  auto a = trace_normalized(gram_matrix(pts, KernelConfig{0.7}));
  CHECK(a.trace_normalized);
  CHECK(std::fabs(a.entries.trace() - 1.0) < 1e-12);
  for (double ev : symmetric_eigenvalues(a.entries)) {
    CHECK(ev >= -1e-12);
    CHECK(ev <= 1.0 + 1e-12);
  }
}

TEST_CASE("kde closed forms") {
  CHECK(kde_entropy(std::vector<StatePoint>{{4.0}}, KernelConfig{}).value == 0.0);
  CHECK(kde_entropy(std::vector<StatePoint>(9, StatePoint{1.0, 2.0}), KernelConfig{}).value == doctest::Approx(0.0));
  const double expected = -std::log((1.0 + std::exp(-1.0)) / 2.0);
  auto h = kde_entropy(std::vector<StatePoint>{{0.0}, {1.0}}, KernelConfig{0.5});
  CHECK(std::fabs(h.value - expected) < 1e-12);
  CHECK(std::fabs(h.value - 0.379885) < 1e-6);
  CHECK(h.log_base == LogBase::natural);
  CHECK(h.estimator == Estimator::kde);
  CHECK_THROWS_AS(kde_entropy(std::vector<StatePoint>{}, KernelConfig{}), Error);
}

TEST_CASE("kde agrees with a direct evaluation on random sets") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto pts = random_points(40, 1 + seed % 3, seed);
    CHECK(kde_entropy(pts, KernelConfig{0.8}).value == doctest::Approx(kde_oracle(pts, 0.8)).epsilon(1e-12));
  }
}

TEST_CASE("knn closed form on two points") {
  auto h = knn_entropy(std::vector<StatePoint>{{0.0}, {1.0}}, 1);
  CHECK(std::fabs(h.value - (std::log(4.0) + kEulerGamma)) < 1e-10);
  CHECK(std::fabs(h.value - 1.9635101) < 1e-6);
}

TEST_CASE("knn errors") {
  try {
    knn_entropy(std::vector<StatePoint>{{0.0}, {0.0}}, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_distance);
  }
  try {
    knn_entropy(std::vector<StatePoint>{{0.0}, {1.0}}, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("knn agrees with a direct evaluation") {
  for (int k : {1, 3, 5}) {
    for (std::size_t d : {1u, 2u, 5u}) {
      auto pts = random_points(60, d, 100 + k + d);
      CHECK(knn_entropy(pts, k).value == doctest::Approx(knn_oracle(pts, k)).epsilon(1e-10));
    }
  }
}

TEST_CASE("knn scaling law: scaling by c adds d ln c") {
  for (double c : {2.0, 0.1, 7.5}) {
    auto pts = random_points(50, 3, 9);
    auto scaled = pts;
    for (auto& p : scaled)
      for (double& x : p) x *= c;
    const double diff = knn_entropy(scaled, 4).value - knn_entropy(pts, 4).value;
    CHECK(std::fabs(diff - 3.0 * std::log(c)) < 1e-10);
  }
}

TEST_CASE("digamma matches known values") {
  CHECK(std::fabs(digamma(1.0) + kEulerGamma) < 1e-12);
  CHECK(std::fabs(digamma(0.5) - (-kEulerGamma - 2.0 * std::log(2.0))) < 1e-12);
  double harmonic = 0.0;
  for (int k = 1; k < 40; ++k) {
    CHECK(std::fabs(digamma(static_cast<double>(k)) - (-kEulerGamma + harmonic)) < 1e-12);
    harmonic += 1.0 / k;
  }
  // Recurrence psi(x + 1) = psi(x) + 1/x at non-integers.
  for (double x : {0.1, 0.37, 2.5, 13.7}) CHECK(std::fabs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-12);
}

TEST_CASE("knn estimate of a standard 2-D Gaussian is near the analytic entropy") {
  const double analytic = std::log(2.0 * std::numbers::pi * std::numbers::e);
  CHECK(std::fabs(analytic - 2.837877) < 1e-6);
  auto pts = random_points(5000, 2, 77);
  CHECK(std::fabs(knn_entropy(pts, 5).value - analytic) < 0.15);
}

TEST_CASE("renyi closed forms") {
  CHECK(renyi_matrix_entropy(std::vector<StatePoint>(6, StatePoint{0.5}), 2.0, KernelConfig{}).value ==
        doctest::Approx(0.0));
  std::vector<StatePoint> apart;
  for (int i = 0; i < 16; ++i) apart.push_back({50.0 * i, 0.0});
  for (double alpha : {0.5, 1.001, 2.0, 3.0, 4.5}) {
    CHECK(std::fabs(renyi_matrix_entropy(apart, alpha, KernelConfig{}).value - 4.0) < 1e-9);
  }
  auto h = renyi_matrix_entropy(std::vector<StatePoint>{{0.0}, {1.0}}, 2.0, KernelConfig{0.5});
  CHECK(std::fabs(h.value - (-std::log2((1.0 + std::exp(-2.0)) / 2.0))) < 1e-12);
  CHECK(std::fabs(h.value - 0.8169) < 1e-4);
  CHECK(h.log_base == LogBase::base2);
}

TEST_CASE("renyi two-point value from the 2x2 eigenvalues for non-integer alpha") {
  const double g = std::exp(-1.0);
  const double alpha = 1.5;
  const double expected =
      std::log2(std::pow((1.0 + g) / 2.0, alpha) + std::pow((1.0 - g) / 2.0, alpha)) / (1.0 - alpha);
  CHECK(renyi_matrix_entropy(std::vector<StatePoint>{{0.0}, {1.0}}, alpha, KernelConfig{0.5}).value ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("renyi rejects alpha = 1 and non-positive alpha") {
  std::vector<StatePoint> pts{{0.0}, {1.0}};
  CHECK_THROWS_AS(renyi_matrix_entropy(pts, 1.0, KernelConfig{}), Error);
  CHECK_THROWS_AS(renyi_matrix_entropy(pts, 0.0, KernelConfig{}), Error);
  CHECK_THROWS_AS(renyi_matrix_entropy(pts, -2.0, KernelConfig{}), Error);
}

TEST_CASE("integer alpha: trace-power and eigenvalue routes agree") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto pts = random_points(20, 2, seed);
    for (double alpha : {2.0, 3.0}) {
      const double trace_route = renyi_matrix_entropy(pts, alpha, KernelConfig{1.0}).value;
      const double eigen_route = renyi_entropy_from_eigenvalues(pts, alpha, KernelConfig{1.0}).value;
      CHECK(std::fabs(trace_route - eigen_route) < 1e-8);
    }
  }
}

TEST_CASE("renyi stays within [0, log2 N] and decreases in alpha") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const std::size_t n = 5 + seed * 4;
    auto pts = random_points(n, 2, seed, 0.5 + seed);
    double previous = std::numeric_limits<double>::infinity();
    for (double alpha : {0.3, 0.7, 1.001, 1.5, 2.0, 3.0, 5.0}) {
      const double h = renyi_matrix_entropy(pts, alpha, KernelConfig{1.0}).value;
      CHECK(h >= -1e-12);
      CHECK(h <= std::log2(static_cast<double>(n)) + 1e-12);
      CHECK(h <= previous + 1e-9);
      previous = h;
    }
  }
}

TEST_CASE("estimators are permutation and translation invariant") {
  auto pts = random_points(40, 3, 21);
  auto shuffled = pts;
  std::mt19937_64 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto moved = pts;
  for (auto& p : moved) {
    p[0] += 0.75;
    p[1] -= 0.5;
    p[2] += 0.25;
  }
  const KernelConfig kernel{0.9};
  const double kde = kde_entropy(pts, kernel).value;
  const double knn = knn_entropy(pts, 3).value;
  const double renyi = renyi_matrix_entropy(pts, 2.0, kernel).value;
  const double renyi_frac = renyi_matrix_entropy(pts, 1.001, kernel).value;
  for (const auto* other : {&shuffled, &moved}) {
    CHECK(kde_entropy(*other, kernel).value == doctest::Approx(kde).epsilon(1e-12));
    CHECK(knn_entropy(*other, 3).value == doctest::Approx(knn).epsilon(1e-12));
    CHECK(renyi_matrix_entropy(*other, 2.0, kernel).value == doctest::Approx(renyi).epsilon(1e-10));
    CHECK(renyi_matrix_entropy(*other, 1.001, kernel).value == doctest::Approx(renyi_frac).epsilon(1e-9));
  }
}

TEST_CASE("base conversion divides by ln 2") {
  EntropyValue v{1.25, LogBase::natural, Estimator::kde};
  CHECK(v.in_base(LogBase::base2).value == 1.25 / std::numbers::ln2);
  CHECK(v.in_base(LogBase::base2).in_base(LogBase::natural).value == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(v.in_base(LogBase::natural).value == 1.25);
}

TEST_CASE("eigenvalue examples") {
  CHECK(symmetric_eigenvalues(Matrix::identity(3)) == std::vector<double>{1.0, 1.0, 1.0});
  auto diag = symmetric_eigenvalues(Matrix::from_rows({{3, 0, 0}, {0, 1, 0}, {0, 0, 2}}));
  CHECK(diag == std::vector<double>{3.0, 2.0, 1.0});
  auto two = symmetric_eigenvalues(Matrix::from_rows({{2, 1}, {1, 2}}));
  CHECK(two[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(1.0).epsilon(1e-14));
  try {
    symmetric_eigenvalues(Matrix::from_rows({{1, 2}, {0, 1}}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("tridiagonal solver agrees with Jacobi") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (std::size_t n : {1u, 2u, 3u, 7u, 30u, 80u}) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = g(rng);
    auto jac = symmetric_eigenvalues(m, EigenSolver::jacobi);
    auto ql = symmetric_eigenvalues(m, EigenSolver::tridiagonal);
    REQUIRE(jac.size() == ql.size());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(jac[i] - ql[i]) < 1e-10 * std::max(1.0, std::fabs(jac[i])));
  }
  // Rank-one matrix with a large block of exact zeros.
  Matrix ones(40, 40, 1.0 / 40.0);
  auto ql = symmetric_eigenvalues(ones, EigenSolver::tridiagonal);
  CHECK(ql[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 1; i < ql.size(); ++i) CHECK(std::fabs(ql[i]) < 1e-12);
}

TEST_CASE("large episodes use the fast route and match Jacobi") {
  auto pts = random_points(kJacobiMaxSize + 6, 2, 5, 2.0);
  const double fast = renyi_matrix_entropy(pts, 1.001, KernelConfig{}).value;
  const double reference = renyi_entropy_from_eigenvalues(pts, 1.001, KernelConfig{}, EigenSolver::jacobi).value;
  CHECK(std::fabs(fast - reference) < 1e-9);
}

TEST_CASE("kernel sum gap examples") {
  auto pts = random_points(4, 2, 1);
  CHECK(kernel_sum_gap(pts, 3, KernelConfig{}, 1e-6).gap == 0.0);

  // Coincident points: every kernel term is 1, so the tail holds N - 1 - k ones.
  auto same = std::vector<StatePoint>(6, StatePoint{1.0, 1.0});
  auto r = kernel_sum_gap(same, 2, KernelConfig{}, 1e-6);
  CHECK(r.gap == 3.0);
  CHECK(r.min_kth_distance == 0.0);
  CHECK_FALSE(r.threshold_ok);
  auto pair = kernel_sum_gap(std::vector<StatePoint>(3, StatePoint{1.0}), 2, KernelConfig{}, 1e-6);
  CHECK(pair.gap == 0.0);
  CHECK_FALSE(pair.threshold_ok);

  CHECK_THROWS_AS(kernel_sum_gap(pts, 4, KernelConfig{}, 1e-6), Error);
}

TEST_CASE("kernel sum gap on a clustered configuration respects the tail bound") {
  std::mt19937_64 rng(12);
  const double sigma = 0.5;
  const double eps = 1e-6;
  const std::size_t n = 30;
  const std::size_t k = 3;
  auto pts = separated_configuration(n, k, 2, sigma, eps, rng);
  auto r = kernel_sum_gap(pts, k, KernelConfig{sigma}, eps);
  REQUIRE(r.threshold_ok);
  CHECK(r.gap <= eps);
  const double bound = static_cast<double>(n - k) * std::exp(-r.min_kth_distance * r.min_kth_distance / (2.0 * sigma));
  CHECK(r.gap <= bound);
}

TEST_CASE("kernel sum gap: threshold met implies gap below epsilon") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::size_t met = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const std::size_t n = k + 2 + trial % 25;
    const double sigma = u(rng);
    const double eps = trial % 2 ? 1e-6 : 1e-3;
    auto pts = trial % 3 == 0 ? random_points(n, 2, trial, 10.0) : separated_configuration(n, k, 2, sigma, eps, rng);
    auto r = kernel_sum_gap(pts, k, KernelConfig{sigma}, eps);
    if (r.threshold_ok) {
      ++met;
      CHECK(r.gap <= eps);
    }
  }
  CHECK(met >= 100);
}

TEST_CASE("gap is computed against an independent kernel sum") {
  auto pts = random_points(25, 2, 31, 1.5);
  const std::size_t k = 4;
  const KernelConfig kernel{0.6};
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) d.emplace_back(distance(pts[i], pts[j]), j);
    std::sort(d.begin(), d.end());
    double tail = 0.0;
    for (std::size_t m = k; m < d.size(); ++m) tail += std::exp(-d[m].first * d[m].first / (2.0 * 0.6));
    worst = std::max(worst, tail);
  }
  CHECK(kernel_sum_gap(pts, k, kernel, 1e-6).gap == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("even subsampling is deterministic and bounded") {
  auto pts = random_points(1000, 2, 2);
  auto a = subsample_evenly(pts, 256);
  CHECK(a.size() == 256);
  CHECK(a == subsample_evenly(pts, 256));
  CHECK(a.front() == pts.front());
  CHECK(subsample_evenly(pts, 2000).size() == 1000);
}
