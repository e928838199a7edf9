#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "element/state.hpp"

namespace element {

using NodeId = std::uint64_t;

struct Neighbor {
  NodeId id = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ascending distance, ties by smaller id.
bool closer(const Neighbor& a, const Neighbor& b);

struct SearchConfig {
  std::size_t greedy_steps = 20;  ///< R1
  std::size_t restarts = 20;      ///< R2
  std::size_t update_depth = 2;

  /// Throws invalid-argument naming the first field below 1.
  void validate() const;
};

/// Optional instrumentation filled in by KnnGraph::search.
struct SearchStats {
  std::size_t touched = 0;  ///< distinct nodes whose distance to the query was computed
  bool record_descents = false;
  /// Per restart, the distance of the current node after each accepted move
  /// (first entry is the start node).
  std::vector<std::vector<double>> descents;
};

/// Directed kNN graph over every state ever inserted; append-only.
///
/// Each node keeps exactly k out-edges once the graph holds more than k
/// nodes (all other nodes before that), sorted by `closer`. Searches are
/// const and may run concurrently; insert needs exclusive access.
class KnnGraph {
 public:
  KnnGraph(std::size_t k, std::uint64_t seed);

  std::size_t k() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return edge_counts_.size(); }
  bool empty() const { return edge_counts_.empty(); }
  /// 0 until the first insertion fixes it.
  std::size_t dimension() const { return dim_; }

  std::span<const double> point(NodeId id) const;
  std::span<const Neighbor> edges(NodeId id) const;

  /// Approximate k nearest stored nodes to `query` by greedy descent from
  /// `restarts` random start nodes, each taking at most `greedy_steps` moves
  /// to the out-neighbour closest to the query and stopping early once no
  /// neighbour improves. Every node touched along the way is a candidate.
  /// Work is capped at touched_bound(cfg) distance evaluations. When `entry`
  /// is given, the first restart starts there instead of at a random node.
  /// Graphs with at most k nodes are scanned exhaustively.
  std::vector<Neighbor> search(std::span<const double> query, const SearchConfig& cfg,
                               std::mt19937_64& rng, SearchStats* stats = nullptr,
                               std::optional<NodeId> entry = std::nullopt) const;

  /// Adds a node and returns its id. The first k+1 nodes form a complete
  /// graph; afterwards the new node takes the k neighbours found by search
  /// (first restart anchored at the previously inserted node), then nodes
  /// within update_depth hops of those neighbours swap their longest edge for
  /// one to the new node when it is closer.
  NodeId insert(std::span<const double> point, const SearchConfig& cfg);

  /// Exact k nearest stored nodes, ties by id.
  std::vector<Neighbor> exact_neighbors(std::span<const double> query, std::size_t k) const;

  std::size_t touched_bound(const SearchConfig& cfg) const;

  /// Binary form: "KNNG", u16 version, u32 k, u64 node count, u32 dimension,
  /// u64 seed, then per node: u64 id, dimension x f64 coordinates, u32 edge
  /// count, (u64 id, f64 distance) per edge. All little-endian.
  std::string serialize() const;
  static KnnGraph deserialize(std::string_view bytes);

  friend bool operator==(const KnnGraph& a, const KnnGraph& b);

 private:
  void check_query(std::span<const double> query) const;
  double distance_to(NodeId id, std::span<const double> query) const;
  void rebuild_complete();
  void offer_edge(NodeId node, NodeId candidate, double dist);

  std::size_t k_;
  std::uint64_t seed_;
  std::size_t dim_ = 0;
  std::vector<double> coords_;           // node-major, dim_ per node
  std::vector<Neighbor> edge_storage_;   // k_ slots per node
  std::vector<std::uint32_t> edge_counts_;
};

/// Exact k nearest by Euclidean distance; result ids are indices into
/// `points`, ties by index.
std::vector<Neighbor> brute_force_knn(std::span<const StatePoint> points,
                                      std::span<const double> query, std::size_t k);

/// Mean over queries of |approx ∩ exact| / min(k, size), exact neighbours by
/// brute force over the stored points.
double recall_at_k(const KnnGraph& graph, std::span<const StatePoint> queries,
                   const SearchConfig& cfg, std::uint64_t seed);

/// Mean fraction of each node's out-edges that are among its exact k nearest
/// other nodes.
double edge_accuracy(const KnnGraph& graph);

void save_graph(const KnnGraph& graph, const std::string& path);
KnnGraph load_graph(const std::string& path);

}  // namespace element
