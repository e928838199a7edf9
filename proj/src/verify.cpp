#include "element/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "element/bench.hpp"
#include "element/entropy.hpp"
#include "element/error.hpp"
#include "element/knn_graph.hpp"
#include "element/linalg.hpp"
#include "element/rewards.hpp"

namespace element {

std::vector<ScoredEpisode> random_tabular_episodes(std::size_t episodes, std::size_t length,
                                                   std::size_t key_pool, std::mt19937_64& rng) {
  if (episodes == 0 || length == 0 || key_pool == 0) fail(ErrorKind::invalid_argument, "empty episode spec");
  std::uniform_int_distribution<StateKey> key(0, static_cast<StateKey>(key_pool) - 1);
  std::uniform_real_distribution<double> entropy(0.0, 5.0);
  std::vector<ScoredEpisode> out(episodes);
  for (auto& ep : out) {
    ep.keys.resize(length);
    for (auto& k : ep.keys) k = key(rng);
    ep.entropy = entropy(rng);
  }
  return out;
}

namespace {

// E over episodes of T^2 times the population variance of the rewards along the episode.
double variance_term(const RewardMap& r, const std::vector<ScoredEpisode>& episodes) {
  double total = 0.0;
  for (const auto& ep : episodes) {
    const double t = static_cast<double>(ep.length());
    double m = 0.0;
    for (StateKey k : ep.keys) m += r.at(k);
    m /= t;
    double v = 0.0;
    for (StateKey k : ep.keys) v += (r.at(k) - m) * (r.at(k) - m);
    total += t * t * (v / t);
  }
  return total / static_cast<double>(episodes.size());
}

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

CheckResult closed_form(const std::string& name, double got, double want, double tol) {
  return {name, std::fabs(got - want) <= tol, format("got %.10f expected %.10f", got, want)};
}

}  // namespace

OptimalityReport check_reward_optimality(std::size_t instances, std::size_t perturbations,
                                         std::uint64_t seed, double denominator_scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> scale_pick(-3, 0);
  OptimalityReport report;
  report.instances = instances;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const auto episodes = random_tabular_episodes(10, 20, 40, rng);
    RewardMap best = optimal_reward_closed_form(episodes, false);
    for (auto& [key, value] : best) value /= denominator_scale;
    const double bound = upper_bound_loss(best, episodes);

    const double rhs = decomposition_loss(best, episodes) + variance_term(best, episodes);
    report.max_identity_error = std::max(report.max_identity_error, std::fabs(bound - rhs));

    for (std::size_t p = 0; p < perturbations; ++p) {
      RewardMap trial = best;
      const double s = std::pow(10.0, scale_pick(rng));
      for (auto& [key, value] : trial) value += s * gauss(rng);
      const double trial_bound = upper_bound_loss(trial, episodes);
      if (trial_bound < bound - 1e-12 * std::max(1.0, bound)) ++report.beaten;
      const double rhs = decomposition_loss(trial, episodes) + variance_term(trial, episodes);
      report.max_identity_error = std::max(report.max_identity_error, std::fabs(trial_bound - rhs));
      ++report.perturbations;
    }

    const double h = 1e-5;
    for (auto& [key, value] : best) {
      const double keep = value;
      value = keep + h;
      const double up = upper_bound_loss(best, episodes);
      value = keep - h;
      const double down = upper_bound_loss(best, episodes);
      value = keep;
      report.max_gradient = std::max(report.max_gradient, std::fabs(up - down) / (2.0 * h));
    }
  }
  return report;
}

std::vector<StatePoint> separated_configuration(std::size_t n, std::size_t k, std::size_t dim,
                                                double sigma, double epsilon, std::mt19937_64& rng) {
  if (n <= k || k == 0 || dim == 0) fail(ErrorKind::invalid_argument, "need n > k >= 1 and dim >= 1");
  const double threshold = std::sqrt(2.0 * sigma * std::log(static_cast<double>(n - k) / epsilon));
  const double spacing = 1.05 * threshold + 1e-2;
  const std::size_t sites = n - k + 1;
  std::size_t side = 2;
  while (std::pow(static_cast<double>(side), static_cast<double>(dim)) < static_cast<double>(sites)) ++side;
  std::size_t lattice = 1;
  for (std::size_t i = 0; i < dim; ++i) lattice *= side;

  std::vector<std::size_t> ids(lattice);
  for (std::size_t i = 0; i < lattice; ++i) ids[i] = i;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::uniform_real_distribution<double> jitter(-0.005 * spacing, 0.005 * spacing);
  std::uniform_real_distribution<double> packed(-2.5e-4, 2.5e-4);

  auto site = [&](std::size_t id) {
    StatePoint p(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      p[j] = static_cast<double>(id % side) * spacing + jitter(rng);
      id /= side;
    }
    return p;
  };
  std::vector<StatePoint> out;
  const StatePoint centre = site(ids[0]);
  for (std::size_t i = 0; i < k; ++i) {
    StatePoint p = centre;
    for (double& x : p) x += packed(rng);
    out.push_back(std::move(p));
  }
  for (std::size_t i = 1; i < sites; ++i) out.push_back(site(ids[i]));
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

GapReport check_kernel_gap(std::size_t configurations, double epsilon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_k(1, 5);
  std::uniform_int_distribution<std::size_t> pick_dim(1, 4);
  std::uniform_real_distribution<double> pick_sigma(0.05, 2.0);
  GapReport report;
  report.configurations = configurations;
  for (std::size_t c = 0; c < configurations; ++c) {
    const std::size_t k = pick_k(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(k + 1, 60)(rng);
    const std::size_t dim = pick_dim(rng);
    const double sigma = pick_sigma(rng);
    const auto points = separated_configuration(n, k, dim, sigma, epsilon, rng);
    const auto result = kernel_sum_gap(points, k, KernelConfig{sigma}, epsilon);
    report.max_gap = std::max(report.max_gap, result.gap);
    if (!result.threshold_ok) continue;
    ++report.threshold_met;
    if (result.gap > epsilon) ++report.violations;
  }
  return report;
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> rows;
  const std::vector<StatePoint> pair{{0.0}, {1.0}};
  const KernelConfig half{0.5};

  rows.push_back(closed_form("gram two-point off-diagonal", gram_matrix(pair, half).entries(0, 1),
                             std::exp(-1.0), 1e-12));
  rows.push_back(closed_form("kde two-point", kde_entropy(pair, half).value,
                             -std::log((1.0 + std::exp(-1.0)) / 2.0), 1e-9));
  rows.push_back(closed_form("knn two-point", knn_entropy(pair, 1).value,
                             std::log(4.0) + std::numbers::egamma, 1e-9));
  rows.push_back(closed_form("renyi two-point", renyi_matrix_entropy(pair, 2.0, half).value,
                             -std::log2((1.0 + std::exp(-2.0)) / 2.0), 1e-9));
  {
    const std::vector<StatePoint> same(7, StatePoint{1.5, -2.0});
    rows.push_back(closed_form("renyi identical points", renyi_matrix_entropy(same, 2.0, KernelConfig{}).value,
                               0.0, 1e-12));
    std::vector<StatePoint> apart;
    for (int i = 0; i < 8; ++i) apart.push_back({100.0 * i});
    rows.push_back(closed_form("renyi separated points",
                               renyi_matrix_entropy(apart, 1.001, KernelConfig{}).value, 3.0, 1e-9));
    const auto ev = symmetric_eigenvalues(Matrix::from_rows({{2.0, 1.0}, {1.0, 2.0}}));
    rows.push_back({"jacobi 2x2", std::fabs(ev[0] - 3.0) < 1e-12 && std::fabs(ev[1] - 1.0) < 1e-12,
                    format("eigenvalues %.12f %.12f", ev[0], ev[1])});
  }

  {
    const double scale = options.inject_fault ? 1.25 : 1.0;
    const auto rep = check_reward_optimality(50, 1000, options.seed, scale);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%zu instances, %zu perturbations, %zu beat the closed form, max |grad| %.3g, "
                  "identity error %.3g%s",
                  rep.instances, rep.perturbations, rep.beaten, rep.max_gradient, rep.max_identity_error,
                  options.inject_fault ? " (fault injected)" : "");
    rows.push_back({"episodic reward optimality",
                    rep.beaten == 0 && rep.max_gradient < 1e-8 && rep.max_identity_error < 1e-10, buf});
  }

  {
    const auto rep = check_kernel_gap(100, 1e-6, options.seed + 1);
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu configurations, %zu meet the threshold, %zu exceed eps, max gap %.3g",
                  rep.configurations, rep.threshold_met, rep.violations, rep.max_gap);
    rows.push_back({"kernel-sum gap bound", rep.threshold_met == rep.configurations && rep.violations == 0, buf});
  }

  {
    const SearchConfig table_iv{20, 20, 2};
    KnnGraph tiny(3, options.seed);
    const auto few = smooth_walk(3, 2, options.seed);
    for (const auto& p : few) tiny.insert(p, table_iv);
    const double small = recall_at_k(tiny, jittered_queries(few, 50, options.seed), table_iv, options.seed);
    rows.push_back({"graph recall, at most k nodes", small == 1.0, format("recall %.4f", small)});

    KnnGraph fifty(3, options.seed);
    const auto pts50 = smooth_walk(50, 2, options.seed);
    for (const auto& p : pts50) fifty.insert(p, table_iv);
    const SearchConfig wide{50, 50, 2};
    const double full = recall_at_k(fifty, jittered_queries(pts50, 200, options.seed), wide, options.seed);
    rows.push_back({"graph recall, exhaustive budget", full == 1.0, format("recall %.4f", full)});

    KnnGraph online(3, options.seed);
    for (const auto& p : smooth_walk(2000, 2, options.seed)) online.insert(p, table_iv);
    const double acc = edge_accuracy(online);
    rows.push_back({"online graph edge accuracy (N=2000)", acc >= 0.7, format("accuracy %.4f", acc)});

    KnnGraph big(3, options.seed);
    const auto pts = smooth_walk(10000, 2, options.seed);
    for (const auto& p : pts) big.insert(p, table_iv);
    const auto queries = jittered_queries(pts, 1000, options.seed + 2);
    std::mt19937_64 rng(options.seed);
    std::size_t worst = 0;
    for (const auto& q : queries) {
      SearchStats stats;
      big.search(q, table_iv, rng, &stats);
      worst = std::max(worst, stats.touched);
    }
    rows.push_back({"search work bound", worst <= big.touched_bound(table_iv),
                    format("max touched %.0f, bound %.0f", static_cast<double>(worst),
                           static_cast<double>(big.touched_bound(table_iv)))});
    const double r1 = recall_at_k(big, queries, table_iv, options.seed);
    const double r2 = recall_at_k(big, queries, table_iv, options.seed);
    rows.push_back({"graph recall reproducible", r1 == r2, format("recall %.6f twice %.6f", r1, r2)});
    rows.push_back({"graph recall@3 (N=10000, R1=R2=20)", r1 >= 0.8, format("recall %.4f, target 0.8", r1),
                    true});
  }
  return rows;
}

}  // namespace element
