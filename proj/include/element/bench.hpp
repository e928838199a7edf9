#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "element/state.hpp"

namespace element {

/// Momentum random walk: v <- 0.95 v + 0.3 N(0, I), x <- x + v.
std::vector<StatePoint> smooth_walk(std::size_t n, std::size_t dim, std::uint64_t seed);

/// Stored points picked uniformly and jittered by N(0, 0.5^2 I).
std::vector<StatePoint> jittered_queries(const std::vector<StatePoint>& stored, std::size_t count,
                                         std::uint64_t seed);

struct BenchRow {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t k = 0;
  std::size_t r1 = 0;
  std::size_t r2 = 0;
  std::size_t queries = 0;
  double build_seconds = 0.0;
  double graph_query_us = 0.0;   ///< mean lifelong-reward time via graph search
  double brute_query_us = 0.0;   ///< mean lifelong-reward time via exhaustive scan
  double mean_touched = 0.0;
  std::size_t max_touched = 0;
  std::size_t touched_bound = 0;
  double recall = 0.0;
};

BenchRow bench_graph(std::size_t n, std::size_t dim, std::size_t k, std::size_t r1, std::size_t r2,
                     std::size_t queries, std::uint64_t seed);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace element
