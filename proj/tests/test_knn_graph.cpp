#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "element/bench.hpp"
#include "element/error.hpp"
#include "element/knn_graph.hpp"

using namespace element;

namespace {

KnnGraph build(const std::vector<StatePoint>& pts, std::size_t k, std::uint64_t seed, const SearchConfig& cfg = {}) {
  KnnGraph g(k, seed);
  for (const auto& p : pts) g.insert(p, cfg);
  return g;
}

std::vector<StatePoint> uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<StatePoint> pts(n, StatePoint(d));
  for (auto& p : pts)
    for (double& x : p) x = u(rng);
  return pts;
}

void check_structure(const KnnGraph& g) {
  const std::size_t expected_degree = std::min(g.k(), g.size() - 1);
  for (NodeId id = 0; id < g.size(); ++id) {
    auto out = g.edges(id);
    CHECK(out.size() == expected_degree);
    std::set<NodeId> targets;
    for (const auto& e : out) {
      CHECK(e.id < g.size());
      CHECK(e.id != id);
      CHECK(e.distance == doctest::Approx(distance(g.point(id), g.point(e.id))).epsilon(1e-12));
      targets.insert(e.id);
    }
    CHECK(targets.size() == out.size());
    CHECK(std::is_sorted(out.begin(), out.end(), closer));
  }
}

}  // namespace

TEST_CASE("closer orders by distance then id") {
  CHECK(closer({3, 1.0}, {1, 2.0}));
  CHECK(closer({1, 1.0}, {3, 1.0}));
  CHECK_FALSE(closer({3, 1.0}, {1, 1.0}));
}

TEST_CASE("brute force examples") {
  std::vector<StatePoint> pts{{0.0}, {1.0}, {3.0}};
  auto r = brute_force_knn(pts, std::vector<double>{0.9}, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].id == 1);
  CHECK(r[1].id == 0);
  CHECK(r[0].distance == doctest::Approx(0.1));
  // Tie at the boundary goes to the smaller index.
  std::vector<StatePoint> tie{{-1.0}, {1.0}, {5.0}};
  auto t = brute_force_knn(tie, std::vector<double>{0.0}, 1);
  CHECK(t[0].id == 0);
  CHECK(brute_force_knn(tie, std::vector<double>{0.0}, 10).size() == 3);
}

TEST_CASE("first k+1 insertions form a complete graph") {
  SearchConfig cfg;
  KnnGraph g(3, 1);
  std::vector<StatePoint> pts{{0.0, 0.0}, {1.0, 0.0}, {0.0, 2.0}, {4.0, 4.0}};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(g.insert(pts[i], cfg) == i);
    CHECK(g.edges(i).size() == i);
    for (NodeId j = 0; j <= i; ++j) CHECK(g.edges(j).size() == i);
  }
  check_structure(g);
}

TEST_CASE("single node graph has no edges and search returns it") {
  KnnGraph g(2, 7);
  g.insert(std::vector<double>{1.0, 2.0}, SearchConfig{});
  CHECK(g.edges(0).empty());
  std::mt19937_64 rng(0);
  auto r = g.search(std::vector<double>{0.0, 0.0}, SearchConfig{}, rng);
  REQUIRE(r.size() == 1);
  CHECK(r[0].id == 0);
}

TEST_CASE("degree, edge validity and sorted edges hold after many insertions") {
  for (std::size_t k : {1u, 3u, 5u}) {
    auto g = build(uniform_points(400, 3, k), k, 11 + k, SearchConfig{5, 5, 2});
    CHECK(g.size() == 400);
    check_structure(g);
  }
}

TEST_CASE("search touches at most R1*R2*k + k nodes") {
  auto g = build(smooth_walk(3000, 2, 4), 3, 5, SearchConfig{4, 4, 2});
  auto queries = jittered_queries(smooth_walk(3000, 2, 4), 200, 9);
  std::mt19937_64 rng(1);
  for (const SearchConfig cfg : {SearchConfig{1, 1, 1}, SearchConfig{3, 2, 1}, SearchConfig{20, 20, 1}}) {
    for (const auto& q : queries) {
      SearchStats stats;
      auto r = g.search(q, cfg, rng, &stats);
      CHECK(stats.touched <= cfg.greedy_steps * cfg.restarts * 3 + 3);
      CHECK(stats.touched == std::min(stats.touched, g.touched_bound(cfg)));
      CHECK(r.size() == 3);
    }
  }
}

TEST_CASE("greedy descent is strictly monotone in distance to the query") {
  auto g = build(uniform_points(1000, 2, 2), 4, 3);
  std::mt19937_64 rng(17);
  for (const auto& q : uniform_points(50, 2, 99)) {
    SearchStats stats;
    stats.record_descents = true;
    g.search(q, SearchConfig{10, 5, 2}, rng, &stats);
    CHECK_FALSE(stats.descents.empty());
    for (const auto& d : stats.descents) {
      CHECK(d.size() <= 11);
      for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
    }
  }
}

TEST_CASE("search results are sorted, distinct and exact distances") {
  auto pts = uniform_points(500, 2, 8);
  auto g = build(pts, 5, 8);
  std::mt19937_64 rng(2);
  for (const auto& q : uniform_points(20, 2, 3)) {
    auto r = g.search(q, SearchConfig{}, rng);
    CHECK(r.size() == 5);
    CHECK(std::is_sorted(r.begin(), r.end(), closer));
    std::set<NodeId> ids;
    for (const auto& n : r) {
      ids.insert(n.id);
      CHECK(n.distance == doctest::Approx(distance(pts[n.id], q)).epsilon(1e-12));
    }
    CHECK(ids.size() == 5);
  }
}

TEST_CASE("graphs with at most k nodes are searched exhaustively") {
  auto pts = uniform_points(4, 2, 6);
  auto g = build(pts, 5, 1);
  std::mt19937_64 rng(0);
  for (const auto& q : uniform_points(10, 2, 7)) {
    auto approx = g.search(q, SearchConfig{1, 1, 1}, rng);
    auto exact = brute_force_knn(pts, q, 5);
    CHECK(approx == exact);
  }
  CHECK(recall_at_k(g, uniform_points(10, 2, 7), SearchConfig{1, 1, 1}, 3) == 1.0);
}

TEST_CASE("many restarts on a small graph recover the exact neighbours") {
  auto pts = smooth_walk(50, 2, 10);
  auto g = build(pts, 3, 1);
  CHECK(recall_at_k(g, jittered_queries(pts, 200, 11), SearchConfig{50, 50, 1}, 3) == 1.0);
}

TEST_CASE("exact neighbours agree with brute force") {
  auto pts = uniform_points(200, 3, 12);
  auto g = build(pts, 3, 1);
  for (const auto& q : uniform_points(10, 3, 13)) CHECK(g.exact_neighbors(q, 7) == brute_force_knn(pts, q, 7));
}

TEST_CASE("graph is deterministic for a fixed seed and insertion order") {
  auto pts = smooth_walk(800, 2, 21);
  auto a = build(pts, 3, 42);
  auto b = build(pts, 3, 42);
  CHECK(a == b);
  CHECK(a.serialize() == b.serialize());
  auto c = build(pts, 3, 43);
  CHECK(c.seed() == 43);
}

TEST_CASE("search is reproducible for a fixed rng seed") {
  auto g = build(uniform_points(600, 2, 1), 3, 2);
  auto queries = uniform_points(40, 2, 4);
  CHECK(recall_at_k(g, queries, SearchConfig{3, 3, 1}, 5) == recall_at_k(g, queries, SearchConfig{3, 3, 1}, 5));
}

TEST_CASE("edge accuracy on a 2000-node walk is at least 0.7") {
  for (std::size_t d : {2u, 8u}) {
    auto g = build(smooth_walk(2000, d, 30 + d), 3, 1);
    CHECK(edge_accuracy(g) >= 0.7);
  }
}

TEST_CASE("edge accuracy oracle: exact graph scores 1") {
  // Four points are a complete graph at k = 3, so every edge is exact.
  auto g = build(uniform_points(4, 2, 1), 3, 1);
  CHECK(edge_accuracy(g) == 1.0);
}

TEST_CASE("errors") {
  KnnGraph g(3, 0);
  std::mt19937_64 rng(0);
  try {
    g.search(std::vector<double>{0.0}, SearchConfig{}, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_graph);
  }
  g.insert(std::vector<double>{0.0, 1.0}, SearchConfig{});
  try {
    g.search(std::vector<double>{0.0}, SearchConfig{}, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  CHECK_THROWS_AS(g.insert(std::vector<double>{1.0, 2.0, 3.0}, SearchConfig{}), Error);
  CHECK_THROWS_AS(g.insert(std::vector<double>{1.0, std::nan("")}, SearchConfig{}), Error);
  try {
    SearchConfig{0, 1, 1}.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("r1") != std::string::npos);
  }
  CHECK_THROWS_AS((SearchConfig{1, 0, 1}.validate()), Error);
  CHECK_THROWS_AS((SearchConfig{1, 1, 0}.validate()), Error);
}

TEST_CASE("serialization round-trips") {
  auto g = build(smooth_walk(300, 3, 2), 3, 77);
  auto bytes = g.serialize();
  auto back = KnnGraph::deserialize(bytes);
  CHECK(back == g);
  CHECK(back.seed() == 77);
  CHECK(back.serialize() == bytes);

  KnnGraph empty(4, 9);
  auto e = KnnGraph::deserialize(empty.serialize());
  CHECK(e.empty());
  CHECK(e.k() == 4);
  CHECK(e == empty);
}

TEST_CASE("reloaded graph keeps inserting like the original") {
  auto pts = smooth_walk(600, 2, 5);
  std::vector<StatePoint> head(pts.begin(), pts.begin() + 300);
  auto partial = build(head, 3, 12);
  auto reloaded = KnnGraph::deserialize(partial.serialize());
  for (std::size_t i = 300; i < pts.size(); ++i) reloaded.insert(pts[i], SearchConfig{});
  CHECK(reloaded == build(pts, 3, 12));
}

TEST_CASE("save and load through a file") {
  auto g = build(uniform_points(50, 2, 3), 2, 4);
  auto path = (std::filesystem::temp_directory_path() / "element_test_graph.knng").string();
  save_graph(g, path);
  CHECK(load_graph(path) == g);
  std::filesystem::remove(path);
  try {
    load_graph(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_error);
  }
}

TEST_CASE("every truncation is a parse error") {
  auto bytes = build(uniform_points(6, 2, 3), 2, 4).serialize();
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    CHECK_THROWS_AS(KnnGraph::deserialize(std::string_view(bytes).substr(0, len)), ParseError);
  }
}

TEST_CASE("corrupted streams are parse errors with offsets") {
  auto bytes = build(uniform_points(6, 2, 3), 2, 4).serialize();
  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    try {
      KnnGraph::deserialize(b);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 0);
    }
  }
  SUBCASE("trailing bytes") {
    CHECK_THROWS_AS(KnnGraph::deserialize(bytes + "x"), ParseError);
  }
  SUBCASE("zero k") {
    auto b = bytes;
    for (int i = 6; i < 10; ++i) b[i] = 0;
    try {
      KnnGraph::deserialize(b);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 6);
      CHECK(e.kind() == ErrorKind::parse_error);
    }
  }
  SUBCASE("edge target out of range") {
    // Header is 4+2+4+8+4+8 = 30 bytes; node 0 is id, 2 coords, edge count, then first edge target.
    auto b = bytes;
    const std::size_t target = 30 + 8 + 16 + 4;
    b[target] = 0x7f;
    try {
      KnnGraph::deserialize(b);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == target);
    }
  }
}
