#include "element/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "element/error.hpp"
#include "element/knn_graph.hpp"
#include "element/rewards.hpp"

namespace element {

std::vector<StatePoint> smooth_walk(std::size_t n, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) fail(ErrorKind::invalid_argument, "walk dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  StatePoint x(dim, 0.0);
  std::vector<double> v(dim, 0.0);
  std::vector<StatePoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      v[j] = 0.95 * v[j] + 0.3 * gauss(rng);
      x[j] += v[j];
    }
    out.push_back(x);
  }
  return out;
}

std::vector<StatePoint> jittered_queries(const std::vector<StatePoint>& stored, std::size_t count,
                                         std::uint64_t seed) {
  if (stored.empty()) fail(ErrorKind::empty_input, "no stored points to draw queries from");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, stored.size() - 1);
  std::normal_distribution<double> gauss(0.0, 0.5);
  std::vector<StatePoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    StatePoint p = stored[pick(rng)];
    for (double& x : p) x += gauss(rng);
    out.push_back(std::move(p));
  }
  return out;
}

BenchRow bench_graph(std::size_t n, std::size_t dim, std::size_t k, std::size_t r1, std::size_t r2,
                     std::size_t queries, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  const SearchConfig cfg{r1, r2, 2};
  cfg.validate();
  BenchRow row{n, dim, k, r1, r2, queries};
  const auto points = smooth_walk(n, dim, seed);
  const auto qs = jittered_queries(points, queries, seed + 1);

  KnnGraph graph(k, seed);
  auto t0 = clock::now();
  for (const auto& p : points) graph.insert(p, cfg);
  row.build_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  row.touched_bound = graph.touched_bound(cfg);

  std::mt19937_64 rng(seed + 2);
  double sink = 0.0;
  std::size_t touched_sum = 0;
  t0 = clock::now();
  for (const auto& q : qs) {
    SearchStats stats;
    sink += novelty_from_neighbors(graph.search(q, cfg, rng, &stats), NeighborNorm::k_vector);
    touched_sum += stats.touched;
    row.max_touched = std::max(row.max_touched, stats.touched);
  }
  row.graph_query_us = std::chrono::duration<double, std::micro>(clock::now() - t0).count() / queries;
  row.mean_touched = static_cast<double>(touched_sum) / queries;

  t0 = clock::now();
  for (const auto& q : qs) sink += novelty_from_neighbors(brute_force_knn(points, q, k), NeighborNorm::k_vector);
  row.brute_query_us = std::chrono::duration<double, std::micro>(clock::now() - t0).count() / queries;
  if (!std::isfinite(sink)) fail(ErrorKind::numerical_failure, "non-finite novelty in benchmark");

  row.recall = recall_at_k(graph, qs, cfg, seed + 3);
  return row;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "n,dim,k,r1,r2,queries,build_seconds,graph_query_us,brute_query_us,speedup,mean_touched,max_touched,"
      "touched_bound,recall\n";
  for (const auto& r : rows) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%zu,%zu,%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%zu,%zu,%.6g\n", r.n, r.dim,
                  r.k, r.r1, r.r2, r.queries, r.build_seconds, r.graph_query_us, r.brute_query_us,
                  r.brute_query_us / r.graph_query_us, r.mean_touched, r.max_touched, r.touched_bound, r.recall);
    out += buf;
  }
  return out;
}

}  // namespace element
