#include "element/knn_graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "element/error.hpp"

namespace element {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

void SearchConfig::validate() const {
  if (greedy_steps < 1) fail(ErrorKind::invalid_argument, "search.r1 (greedy steps) must be >= 1");
  if (restarts < 1) fail(ErrorKind::invalid_argument, "search.r2 (random restarts) must be >= 1");
  if (update_depth < 1) fail(ErrorKind::invalid_argument, "search.depth must be >= 1");
}

namespace {

constexpr char kMagic[4] = {'K', 'N', 'N', 'G'};
constexpr std::uint16_t kFormatVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

// Open-addressing map NodeId -> distance for the nodes touched by one query.
class TouchedMap {
 public:
  TouchedMap() : slots_(256, Slot{kEmpty, 0.0}) {}

  // Returns nullptr when absent.
  const double* find(NodeId id) const {
    std::size_t mask = slots_.size() - 1;
    for (std::size_t i = hash(id) & mask;; i = (i + 1) & mask) {
      if (slots_[i].id == id) return &slots_[i].dist;
      if (slots_[i].id == kEmpty) return nullptr;
    }
  }

  void insert(NodeId id, double dist) {
    if (2 * (size_ + 1) > slots_.size()) grow();
    place(id, dist);
    ++size_;
  }

  std::size_t size() const { return size_; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const Slot& s : slots_)
      if (s.id != kEmpty) fn(s.id, s.dist);
  }

 private:
  static constexpr NodeId kEmpty = std::numeric_limits<NodeId>::max();
  struct Slot {
    NodeId id;
    double dist;
  };

  static std::size_t hash(NodeId id) { return static_cast<std::size_t>(id * 0x9e3779b97f4a7c15ULL >> 17); }

  void place(NodeId id, double dist) {
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash(id) & mask;
    while (slots_[i].id != kEmpty) i = (i + 1) & mask;
    slots_[i] = Slot{id, dist};
  }

  void grow() {
    std::vector<Slot> old(slots_.size() * 2, Slot{kEmpty, 0.0});
    old.swap(slots_);
    for (const Slot& s : old)
      if (s.id != kEmpty) place(s.id, s.dist);
  }

  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

// Keeps the k best neighbours seen so far, sorted by `closer`.
class BestK {
 public:
  explicit BestK(std::size_t k) : k_(k) { items_.reserve(k + 1); }

  void offer(Neighbor n) {
    if (items_.size() == k_ && !closer(n, items_.back())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), n, closer);
    items_.insert(pos, n);
    if (items_.size() > k_) items_.pop_back();
  }

  std::vector<Neighbor> take() { return std::move(items_); }

 private:
  std::size_t k_;
  std::vector<Neighbor> items_;
};

// Little-endian byte writer / reader for the graph format.
class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
    }
  }
  void put_double(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_bytes(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    require(sizeof(T), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double get_double(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }
  std::string_view get_bytes(std::size_t n, const char* what) {
    require(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void require(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError::at_offset(pos_, std::string("truncated stream while reading ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

KnnGraph::KnnGraph(std::size_t k, std::uint64_t seed) : k_(k), seed_(seed) {
  if (k == 0) fail(ErrorKind::invalid_argument, "graph k must be at least 1");
}

std::span<const double> KnnGraph::point(NodeId id) const {
  if (id >= size()) fail(ErrorKind::invalid_argument, "node id " + std::to_string(id) + " out of range");
  return {coords_.data() + id * dim_, dim_};
}

std::span<const Neighbor> KnnGraph::edges(NodeId id) const {
  if (id >= size()) fail(ErrorKind::invalid_argument, "node id " + std::to_string(id) + " out of range");
  return {edge_storage_.data() + id * k_, edge_counts_[id]};
}

std::size_t KnnGraph::touched_bound(const SearchConfig& cfg) const {
  return cfg.greedy_steps * cfg.restarts * k_ + k_;
}

void KnnGraph::check_query(std::span<const double> query) const {
  if (query.size() != dim_) {
    fail(ErrorKind::invalid_argument, "query has dimension " + std::to_string(query.size()) +
                                          ", graph stores dimension " + std::to_string(dim_));
  }
}

double KnnGraph::distance_to(NodeId id, std::span<const double> query) const {
  return distance({coords_.data() + id * dim_, dim_}, query);
}

std::vector<Neighbor> KnnGraph::search(std::span<const double> query, const SearchConfig& cfg,
                                       std::mt19937_64& rng, SearchStats* stats,
                                       std::optional<NodeId> entry) const {
  if (empty()) fail(ErrorKind::empty_graph, "search on an empty graph");
  check_query(query);
  cfg.validate();
  if (stats) {
    stats->touched = 0;
    stats->descents.clear();
  }

  const std::size_t n = size();
  if (n <= k_) {
    BestK best(k_);
    for (NodeId id = 0; id < n; ++id) best.offer({id, distance_to(id, query)});
    if (stats) stats->touched = n;
    return best.take();
  }

  const std::size_t budget = touched_bound(cfg);
  TouchedMap touched;
  BestK best(k_);
  // Distance to `id`, computing and recording it on first touch. Returns
  // false once the work budget is exhausted.
  auto probe = [&](NodeId id, double& out) {
    if (const double* d = touched.find(id)) {
      out = *d;
      return true;
    }
    if (touched.size() >= budget) return false;
    out = distance_to(id, query);
    touched.insert(id, out);
    best.offer({id, out});
    return true;
  };

  bool exhausted = false;
  for (std::size_t r = 0; r < cfg.restarts && !exhausted; ++r) {
    NodeId current = (r == 0 && entry && *entry < n) ? *entry : uniform_index(rng, n);
    double current_dist = 0.0;
    if (!probe(current, current_dist)) break;
    std::vector<double>* trace = nullptr;
    if (stats && stats->record_descents) {
      trace = &stats->descents.emplace_back();
      trace->push_back(current_dist);
    }
    for (std::size_t step = 0; step < cfg.greedy_steps; ++step) {
      Neighbor step_best{current, current_dist};
      for (const Neighbor& e : edges(current)) {
        double d = 0.0;
        if (!probe(e.id, d)) {
          exhausted = true;
          break;
        }
        if (closer({e.id, d}, step_best)) step_best = {e.id, d};
      }
      if (exhausted || step_best.id == current || !(step_best.distance < current_dist)) break;
      current = step_best.id;
      current_dist = step_best.distance;
      if (trace) trace->push_back(current_dist);
    }
  }
  if (stats) stats->touched = touched.size();
  return best.take();
}

void KnnGraph::rebuild_complete() {
  const std::size_t n = size();
  for (NodeId i = 0; i < n; ++i) {
    BestK best(k_);
    for (NodeId j = 0; j < n; ++j) {
      if (j != i) best.offer({j, distance(point(i), point(j))});
    }
    auto chosen = best.take();
    std::copy(chosen.begin(), chosen.end(), edge_storage_.begin() + static_cast<std::ptrdiff_t>(i * k_));
    edge_counts_[i] = static_cast<std::uint32_t>(chosen.size());
  }
}

void KnnGraph::offer_edge(NodeId node, NodeId candidate, double dist) {
  Neighbor* first = edge_storage_.data() + node * k_;
  const std::size_t count = edge_counts_[node];
  for (std::size_t i = 0; i < count; ++i)
    if (first[i].id == candidate) return;
  const Neighbor incoming{candidate, dist};
  if (count < k_) {
    first[count] = incoming;
    edge_counts_[node] = static_cast<std::uint32_t>(count + 1);
  } else if (closer(incoming, first[count - 1])) {
    first[count - 1] = incoming;
  } else {
    return;
  }
  std::sort(first, first + edge_counts_[node], closer);
}

NodeId KnnGraph::insert(std::span<const double> p, const SearchConfig& cfg) {
  cfg.validate();
  if (empty()) {
    if (p.empty()) fail(ErrorKind::invalid_argument, "cannot insert a zero-dimensional point");
    dim_ = p.size();
  } else {
    check_query(p);
  }
  for (double x : p) {
    if (!std::isfinite(x)) fail(ErrorKind::invalid_argument, "cannot insert a non-finite coordinate");
  }

  const NodeId id = size();
  if (id <= k_) {
    coords_.insert(coords_.end(), p.begin(), p.end());
    edge_storage_.resize(edge_storage_.size() + k_);
    edge_counts_.push_back(0);
    rebuild_complete();
    return id;
  }

  // Per-insertion stream derived from (seed, id) so a reloaded graph keeps
  // inserting exactly as the original would have.
  std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(id)));
  const std::vector<Neighbor> found = search(p, cfg, rng, nullptr, id - 1);

  coords_.insert(coords_.end(), p.begin(), p.end());
  edge_storage_.resize(edge_storage_.size() + k_);
  edge_counts_.push_back(static_cast<std::uint32_t>(found.size()));
  std::copy(found.begin(), found.end(), edge_storage_.begin() + static_cast<std::ptrdiff_t>(id * k_));

  // Breadth-first over the found neighbours: level 0 are the neighbours
  // themselves, each further level their out-neighbours.
  std::vector<NodeId> frontier;
  std::unordered_set<NodeId> seen{id};
  for (const Neighbor& nb : found)
    if (seen.insert(nb.id).second) frontier.push_back(nb.id);
  for (std::size_t level = 0; level < cfg.update_depth && !frontier.empty(); ++level) {
    std::vector<NodeId> next;
    for (NodeId x : frontier) {
      for (const Neighbor& e : edges(x))
        if (seen.insert(e.id).second) next.push_back(e.id);
      offer_edge(x, id, distance(point(x), p));
    }
    frontier = std::move(next);
  }
  return id;
}

std::vector<Neighbor> KnnGraph::exact_neighbors(std::span<const double> query, std::size_t k) const {
  if (empty()) fail(ErrorKind::empty_graph, "exact search on an empty graph");
  check_query(query);
  BestK best(k);
  for (NodeId id = 0; id < size(); ++id) best.offer({id, distance_to(id, query)});
  return best.take();
}

std::string KnnGraph::serialize() const {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint16_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(k_));
  w.put<std::uint64_t>(size());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(seed_);
  for (NodeId id = 0; id < size(); ++id) {
    w.put<std::uint64_t>(id);
    for (double x : point(id)) w.put_double(x);
    const auto out = edges(id);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(out.size()));
    for (const Neighbor& e : out) {
      w.put<std::uint64_t>(e.id);
      w.put_double(e.distance);
    }
  }
  return w.take();
}

KnnGraph KnnGraph::deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.get_bytes(sizeof(kMagic), "magic") != std::string_view(kMagic, sizeof(kMagic))) {
    throw ParseError::at_offset(0, "bad magic, expected KNNG");
  }
  std::size_t at = r.offset();
  const auto version = r.get<std::uint16_t>("version");
  if (version != kFormatVersion) {
    throw ParseError::at_offset(at, "unsupported format version " + std::to_string(version));
  }
  at = r.offset();
  const auto k = r.get<std::uint32_t>("k");
  if (k == 0) throw ParseError::at_offset(at, "k must be positive");
  const auto count = r.get<std::uint64_t>("node count");
  at = r.offset();
  const auto dim = r.get<std::uint32_t>("dimension");
  if ((count > 0) != (dim > 0)) throw ParseError::at_offset(at, "dimension inconsistent with node count");
  const auto seed = r.get<std::uint64_t>("seed");
  // Each node needs at least id + coordinates + edge count.
  const std::uint64_t min_node_bytes = 8 + 8ULL * dim + 4;
  if (count > r.remaining() / min_node_bytes) {
    throw ParseError::at_offset(r.offset(), "node count exceeds stream length");
  }

  KnnGraph g(k, seed);
  g.dim_ = dim;
  g.coords_.reserve(count * dim);
  g.edge_storage_.assign(count * k, Neighbor{});
  g.edge_counts_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    at = r.offset();
    if (r.get<std::uint64_t>("node id") != i) throw ParseError::at_offset(at, "node ids must be sequential");
    for (std::uint32_t c = 0; c < dim; ++c) {
      at = r.offset();
      const double x = r.get_double("coordinate");
      if (!std::isfinite(x)) throw ParseError::at_offset(at, "non-finite coordinate");
      g.coords_.push_back(x);
    }
    at = r.offset();
    const auto edge_count = r.get<std::uint32_t>("edge count");
    if (edge_count > k || edge_count > count - 1) throw ParseError::at_offset(at, "too many edges for node");
    for (std::uint32_t e = 0; e < edge_count; ++e) {
      at = r.offset();
      const auto target = r.get<std::uint64_t>("edge target");
      if (target >= count || target == i) throw ParseError::at_offset(at, "edge target out of range");
      at = r.offset();
      const double d = r.get_double("edge distance");
      if (!(d >= 0.0) || !std::isfinite(d)) throw ParseError::at_offset(at, "invalid edge distance");
      g.edge_storage_[i * k + e] = Neighbor{target, d};
    }
    g.edge_counts_.push_back(edge_count);
  }
  if (!r.done()) throw ParseError::at_offset(r.offset(), "trailing bytes after last node");
  return g;
}

bool operator==(const KnnGraph& a, const KnnGraph& b) {
  if (a.k_ != b.k_ || a.seed_ != b.seed_ || a.dim_ != b.dim_ || a.coords_ != b.coords_ ||
      a.edge_counts_ != b.edge_counts_) {
    return false;
  }
  for (NodeId id = 0; id < a.size(); ++id) {
    const auto ea = a.edges(id);
    const auto eb = b.edges(id);
    if (!std::equal(ea.begin(), ea.end(), eb.begin(), eb.end())) return false;
  }
  return true;
}

std::vector<Neighbor> brute_force_knn(std::span<const StatePoint> points,
                                      std::span<const double> query, std::size_t k) {
  if (points.empty()) fail(ErrorKind::empty_input, "brute-force kNN over an empty point set");
  if (k == 0) fail(ErrorKind::invalid_argument, "k must be at least 1");
  BestK best(k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != query.size()) {
      fail(ErrorKind::invalid_argument, "point " + std::to_string(i) + " dimension differs from query");
    }
    best.offer({i, distance(points[i], query)});
  }
  return best.take();
}

double recall_at_k(const KnnGraph& graph, std::span<const StatePoint> queries,
                   const SearchConfig& cfg, std::uint64_t seed) {
  if (queries.empty()) fail(ErrorKind::empty_input, "recall needs at least one query");
  if (graph.empty()) fail(ErrorKind::empty_graph, "recall on an empty graph");
  std::mt19937_64 rng(seed);
  const std::size_t k = std::min(graph.k(), graph.size());
  double total = 0.0;
  for (const StatePoint& q : queries) {
    const auto approx = graph.search(q, cfg, rng);
    const auto exact = graph.exact_neighbors(q, k);
    std::size_t hits = 0;
    for (const Neighbor& a : approx)
      for (const Neighbor& e : exact)
        if (a.id == e.id) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(queries.size());
}

double edge_accuracy(const KnnGraph& graph) {
  if (graph.size() < 2) return 1.0;
  const std::size_t k = std::min(graph.k(), graph.size() - 1);
  double total = 0.0;
  for (NodeId id = 0; id < graph.size(); ++id) {
    BestK best(k);
    for (NodeId j = 0; j < graph.size(); ++j) {
      if (j != id) best.offer({j, distance(graph.point(id), graph.point(j))});
    }
    const auto exact = best.take();
    std::size_t hits = 0;
    for (const Neighbor& e : graph.edges(id))
      for (const Neighbor& x : exact)
        if (e.id == x.id) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(graph.size());
}

void save_graph(const KnnGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io_error, "cannot open " + path + " for writing");
  const std::string bytes = graph.serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io_error, "failed writing " + path);
}

KnnGraph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io_error, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return KnnGraph::deserialize(buffer.str());
}

}  // namespace element
