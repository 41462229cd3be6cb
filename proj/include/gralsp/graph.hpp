#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gralsp/matrix.hpp"
#include "gralsp/random.hpp"

namespace gralsp {

using NodeId = std::uint32_t;

inline constexpr int kUnlabeled = -1;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure carrying the 1-based line number of the offending input line.
class ParseError : public GraphError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : GraphError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Neighbor lists are sorted, deduplicated and free of self-loops. Node ids are
/// contiguous; `name(v)` recovers the identifier used in input files.
class Graph {
 public:
  Graph() = default;

  /// Builds from an undirected edge list over `names.size()` nodes. Duplicate
  /// edges (in either orientation) collapse; self-loops are dropped and counted.
  static Graph from_edges(std::vector<std::string> names,
                          std::span<const std::pair<NodeId, NodeId>> edges) {
    Graph g;
    const std::size_t n = names.size();
    g.names_ = std::move(names);
    g.index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!g.index_.emplace(g.names_[i], static_cast<NodeId>(i)).second) {
        throw GraphError("duplicate node identifier '" + g.names_[i] + "'");
      }
    }
    std::vector<std::size_t> deg(n, 0);
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw GraphError("edge endpoint out of range");
      if (u == v) {
        ++g.dropped_self_loops_;
        continue;
      }
      ++deg[u];
      ++deg[v];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
    g.adjacency_.resize(g.offsets_[n]);
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      if (u == v) continue;
      g.adjacency_[cursor[u]++] = v;
      g.adjacency_[cursor[v]++] = u;
    }
    // sort + dedup each list, then compact
    std::size_t write = 0;
    std::vector<std::size_t> new_offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto first = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
      auto last = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
      std::sort(first, last);
      auto uend = std::unique(first, last);
      for (auto it = first; it != uend; ++it) g.adjacency_[write++] = *it;
      new_offsets[i + 1] = write;
    }
    g.adjacency_.resize(write);
    g.offsets_ = std::move(new_offsets);
    g.labels_.assign(n, kUnlabeled);
    return g;
  }

  std::size_t num_nodes() const { return names_.size(); }
  std::size_t num_edges() const { return adjacency_.size() / 2; }
  std::size_t dropped_self_loops() const { return dropped_self_loops_; }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], degree(v)};
  }
  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  const std::string& name(NodeId v) const { return names_[v]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<NodeId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Canonical edge list: each undirected edge once as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes(); ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  bool has_features() const { return features_.has_value(); }
  const Matrix& features() const {
    if (!features_) throw GraphError("graph has no features");
    return *features_;
  }
  std::size_t feature_dim() const { return features_ ? features_->cols() : 0; }
  void set_features(Matrix f) {
    if (f.rows() != num_nodes()) {
      throw GraphError("feature matrix has " + std::to_string(f.rows()) + " rows for " +
                       std::to_string(num_nodes()) + " nodes");
    }
    if (!f.all_finite()) throw GraphError("feature matrix contains non-finite values");
    features_ = std::move(f);
  }

  /// Labels per node; kUnlabeled where absent.
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  bool has_labels() const { return !label_names_.empty(); }
  void set_labels(std::vector<int> labels, std::vector<std::string> label_names) {
    if (labels.size() != num_nodes()) throw GraphError("label vector size mismatch");
    for (int l : labels) {
      if (l != kUnlabeled && (l < 0 || static_cast<std::size_t>(l) >= label_names.size())) {
        throw GraphError("label id out of range");
      }
    }
    labels_ = std::move(labels);
    label_names_ = std::move(label_names);
  }

  /// Same node set, ids, features and labels; only the listed edges.
  Graph with_edges(std::span<const std::pair<NodeId, NodeId>> edges) const {
    Graph g = from_edges(names_, edges);
    g.features_ = features_;
    g.labels_ = labels_;
    g.label_names_ = label_names_;
    return g;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::size_t dropped_self_loops_ = 0;
  std::optional<Matrix> features_;
  std::vector<int> labels_;
  std::vector<std::string> label_names_;
};

// ---------------------------------------------------------------------------
// File ingestion

struct LoadOptions {
  /// Without a feature file, nodes get one-hot identity features up to this size.
  std::size_t identity_feature_limit = 20000;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

inline bool is_blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::optional<double> parse_double(std::string_view tok) {
  // std::from_chars for double is available in libstdc++ 11
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads an edge list plus optional feature and label streams.
///
/// Edge lines: two whitespace-separated identifiers. Feature lines: identifier
/// followed by F floats. Label lines: identifier and class token. Blank lines and
/// lines starting with '#' are skipped. Directed input is symmetrized.
inline Graph load_graph(std::istream& edge_source, std::istream* feature_source = nullptr,
                        std::istream* label_source = nullptr, const LoadOptions& opts = {}) {
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> index;
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto intern = [&](std::string_view tok) {
    auto [it, inserted] = index.emplace(std::string(tok), static_cast<NodeId>(names.size()));
    if (inserted) names.emplace_back(tok);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(edge_source, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    auto tok = detail::split_ws(line);
    if (tok.size() != 2) {
      throw ParseError("edges", lineno,
                       "expected 2 node identifiers, found " + std::to_string(tok.size()));
    }
    NodeId u = intern(tok[0]);
    NodeId v = intern(tok[1]);
    edges.emplace_back(u, v);
  }
  // Feature rows may name nodes absent from the edge list; those load as
  // isolated nodes, since an edge list has no way to carry them.
  std::size_t dim = 0;
  std::vector<std::pair<NodeId, std::vector<double>>> rows;
  if (feature_source != nullptr) {
    lineno = 0;
    while (std::getline(*feature_source, line)) {
      ++lineno;
      if (detail::is_blank_or_comment(line)) continue;
      auto tok = detail::split_ws(line);
      if (tok.size() < 2) throw ParseError("features", lineno, "expected identifier and values");
      if (dim == 0) {
        dim = tok.size() - 1;
      } else if (tok.size() - 1 != dim) {
        throw ParseError("features", lineno,
                         "feature row has " + std::to_string(tok.size() - 1) +
                             " values, expected " + std::to_string(dim));
      }
      std::vector<double> values(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        auto x = detail::parse_double(tok[j + 1]);
        if (!x || !std::isfinite(*x)) {
          throw ParseError("features", lineno, "bad value '" + std::string(tok[j + 1]) + "'");
        }
        values[j] = *x;
      }
      rows.emplace_back(intern(tok[0]), std::move(values));
    }
  }

  Graph g = Graph::from_edges(std::move(names), edges);
  if (g.num_edges() == 0) throw GraphError("graph has zero edges");

  const std::size_t n = g.num_nodes();
  if (feature_source != nullptr) {
    std::vector<double> data(n * dim, 0.0);
    std::vector<bool> seen(n, false);
    for (const auto& [v, values] : rows) {
      if (seen[v]) throw GraphError("duplicate feature row for node '" + g.name(v) + "'");
      seen[v] = true;
      std::copy(values.begin(), values.end(), data.begin() + static_cast<std::ptrdiff_t>(v * dim));
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (!seen[v]) throw GraphError("node '" + g.name(static_cast<NodeId>(v)) + "' has no features");
    }
    g.set_features(Matrix(n, dim, std::move(data)));
  } else {
    if (n > opts.identity_feature_limit) {
      throw GraphError("graph has " + std::to_string(n) +
                       " nodes; identity features are limited to " +
                       std::to_string(opts.identity_feature_limit) +
                       ", supply an explicit feature file");
    }
    g.set_features(Matrix::identity(n));
  }

  if (label_source != nullptr) {
    std::vector<int> labels(n, kUnlabeled);
    std::vector<std::string> label_names;
    std::unordered_map<std::string, int> label_index;
    lineno = 0;
    while (std::getline(*label_source, line)) {
      ++lineno;
      if (detail::is_blank_or_comment(line)) continue;
      auto tok = detail::split_ws(line);
      if (tok.size() != 2) throw ParseError("labels", lineno, "expected identifier and label");
      auto v = g.find(tok[0]);
      if (!v) {
        throw ParseError("labels", lineno, "label for unknown node '" + std::string(tok[0]) + "'");
      }
      auto [it, inserted] =
          label_index.emplace(std::string(tok[1]), static_cast<int>(label_names.size()));
      if (inserted) label_names.emplace_back(tok[1]);
      labels[*v] = it->second;
    }
    g.set_labels(std::move(labels), std::move(label_names));
  }
  return g;
}

inline void write_edge_list(const Graph& g, std::ostream& out) {
  for (auto [u, v] : g.edges()) out << g.name(u) << ' ' << g.name(v) << '\n';
}

inline void write_features(const Graph& g, std::ostream& out) {
  const Matrix& f = g.features();
  std::ostringstream line;
  line.precision(17);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    line.str("");
    line << g.name(v);
    for (double x : f.row(v)) line << ' ' << x;
    out << line.str() << '\n';
  }
}

inline void write_labels(const Graph& g, std::ostream& out) {
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    int l = g.labels()[v];
    if (l != kUnlabeled) out << g.name(v) << ' ' << g.label_names()[static_cast<std::size_t>(l)] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Statistics

struct DegreeStats {
  double avg_degree = 0.0;
  std::size_t max_degree = 0;
  double clustering_coefficient = 0.0;
};

inline DegreeStats degree_stats(const Graph& g) {
  if (g.num_edges() == 0) throw GraphError("degree_stats: graph has no edges");
  DegreeStats s;
  const std::size_t n = g.num_nodes();
  s.avg_degree = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(n);
  double csum = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    auto nb = g.neighbors(v);
    s.max_degree = std::max(s.max_degree, nb.size());
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (g.has_edge(nb[i], nb[j])) ++links;
    double pairs = static_cast<double>(nb.size()) * static_cast<double>(nb.size() - 1) / 2.0;
    csum += static_cast<double>(links) / pairs;
  }
  s.clustering_coefficient = csum / static_cast<double>(n);
  return s;
}

/// Expected edge count of an ego-network under a power-law degree model, from the
/// average degree d, maximum degree d_max and clustering coefficient c.
/// Singular at d = 2; defined for d > 2 only.
inline double expected_ego_edges(double d, double d_max, double c) {
  if (!(d > 2.0)) {
    throw std::domain_error("expected_ego_edges: average degree must exceed 2 (the estimate is "
                            "singular at d = 2), got " + std::to_string(d));
  }
  if (d_max < d) throw std::domain_error("expected_ego_edges: d_max must be >= d");
  if (c < 0.0 || c > 1.0) throw std::domain_error("expected_ego_edges: c must lie in [0, 1]");
  return (1.0 - c / 2.0) * d +
         (c * d) / (2.0 * (d - 2.0)) * (std::pow(d_max, (d - 2.0) / (d - 1.0)) - 1.0);
}

// ---------------------------------------------------------------------------
// Alias sampling

/// Walker/Vose alias table: O(n) build, O(1) per draw.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights) { build(weights); }

  void build(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("AliasTable: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("AliasTable: bad weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("AliasTable: weights sum to zero");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      auto s = small.back();
      small.pop_back();
      auto l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;  // numerical leftovers
  }

  std::size_t size() const { return prob_.size(); }

  std::size_t sample(Rng& rng) const {
    std::size_t i = uniform_index(rng, prob_.size());
    return uniform01(rng) < prob_[i] ? i : alias_[i];
  }

  const std::vector<double>& probabilities() const { return prob_; }
  const std::vector<std::uint32_t>& aliases() const { return alias_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// Per-node alias tables for uniform neighbor selection.
class AliasSampler {
 public:
  explicit AliasSampler(const Graph& g) : graph_(&g), tables_(g.num_nodes()) {
    std::vector<double> ones;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (g.degree(v) == 0) continue;
      ones.assign(g.degree(v), 1.0);
      tables_[v].build(ones);
    }
  }

  NodeId sample_neighbor(NodeId v, Rng& rng) const {
    auto nb = graph_->neighbors(v);
    if (nb.empty()) {
      throw GraphError("sample_neighbor: node '" + graph_->name(v) + "' is isolated");
    }
    return nb[tables_[v].sample(rng)];
  }

  const Graph& graph() const { return *graph_; }

 private:
  const Graph* graph_;
  std::vector<AliasTable> tables_;
};

// ---------------------------------------------------------------------------
// Synthetic graphs

inline std::vector<std::string> numbered_names(std::size_t n, std::string_view prefix = "") {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = std::string(prefix) + std::to_string(i);
  return names;
}

/// Uniform noise features in [0, 1), or identity when dim == 0.
inline Matrix default_features(std::size_t n, std::size_t noise_dim, std::uint64_t seed,
                               std::size_t identity_limit = 20000) {
  if (noise_dim == 0) {
    if (n > identity_limit) {
      throw GraphError("identity features requested for " + std::to_string(n) +
                       " nodes; pass a noise feature dimension instead");
    }
    return Matrix::identity(n);
  }
  Rng rng = make_rng(seed, {0xfea7u});
  Matrix f(n, noise_dim);
  for (auto& x : f.data()) x = uniform01(rng);
  return f;
}

namespace detail {

// Batagelj-Brandes geometric skipping over the pairs (i, j), i < j, of [lo, hi) x [lo, hi)
// or, when `cross` is set, over [lo, hi) x [lo2, hi2).
inline void sample_pairs(std::size_t lo, std::size_t hi, double p, Rng& rng,
                         std::vector<std::pair<NodeId, NodeId>>& out) {
  const std::size_t n = hi - lo;
  if (n < 2 || p <= 0.0) return;
  const double log_q = std::log1p(-p);
  std::int64_t v = 1, w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    double r = uniform01(rng);
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) out.emplace_back(static_cast<NodeId>(lo + static_cast<std::size_t>(w)),
                                 static_cast<NodeId>(lo + static_cast<std::size_t>(v)));
  }
}

inline void sample_cross_pairs(std::size_t lo1, std::size_t hi1, std::size_t lo2, std::size_t hi2,
                               double p, Rng& rng, std::vector<std::pair<NodeId, NodeId>>& out) {
  if (p <= 0.0) return;
  const auto total = static_cast<std::int64_t>((hi1 - lo1) * (hi2 - lo2));
  const auto width = static_cast<std::int64_t>(hi2 - lo2);
  const double log_q = std::log1p(-p);
  std::int64_t idx = -1;
  while (true) {
    double r = uniform01(rng);
    idx += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    if (idx >= total) break;
    out.emplace_back(static_cast<NodeId>(lo1 + static_cast<std::size_t>(idx / width)),
                     static_cast<NodeId>(lo2 + static_cast<std::size_t>(idx % width)));
  }
}

}  // namespace detail

/// Erdos-Renyi G(n, p) in O(n + |E|) expected time via geometric skipping.
/// Features are identity when `noise_dim` is 0, else uniform noise of that width.
inline Graph generate_er(std::size_t n, double p, std::uint64_t seed, std::size_t noise_dim = 0) {
  if (n < 2) throw std::invalid_argument("generate_er: n must be >= 2");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("generate_er: p must lie in (0, 1)");
  Rng rng = make_rng(seed, {0xe7u});
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(static_cast<std::size_t>(static_cast<double>(n) * static_cast<double>(n - 1) * p / 2.0 * 1.1) + 16);
  detail::sample_pairs(0, n, p, rng, edges);
  Graph g = Graph::from_edges(numbered_names(n), edges);
  g.set_features(default_features(n, noise_dim, seed));
  return g;
}

/// Two-or-more-block stochastic block model: independent ER blocks with p_in,
/// cross-block pairs with p_out. Nodes are labeled with their block.
inline Graph generate_planted_partition(std::span<const std::size_t> block_sizes, double p_in,
                                        double p_out, std::uint64_t seed,
                                        std::size_t noise_dim = 0) {
  if (block_sizes.empty()) throw std::invalid_argument("generate_planted_partition: no blocks");
  Rng rng = make_rng(seed, {0x5b3u});
  std::vector<std::size_t> starts{0};
  for (auto s : block_sizes) starts.push_back(starts.back() + s);
  const std::size_t n = starts.back();
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    detail::sample_pairs(starts[b], starts[b + 1], p_in, rng, edges);
    for (std::size_t c = b + 1; c < block_sizes.size(); ++c)
      detail::sample_cross_pairs(starts[b], starts[b + 1], starts[c], starts[c + 1], p_out, rng,
                                 edges);
  }
  Graph g = Graph::from_edges(numbered_names(n), edges);
  g.set_features(default_features(n, noise_dim, seed));
  std::vector<int> labels(n);
  std::vector<std::string> names;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    names.push_back("block" + std::to_string(b));
    for (std::size_t v = starts[b]; v < starts[b + 1]; ++v) labels[v] = static_cast<int>(b);
  }
  g.set_labels(std::move(labels), std::move(names));
  return g;
}

inline constexpr std::size_t kTriadPendants = 4;
inline constexpr std::size_t kTriadsPerCircleNode = 2;

/// Circle of n nodes; even positions carry two closed triads, odd positions two
/// open triads. Each triad is (center, a, b) with fresh peripherals a and b, and
/// four pendant nodes hang off peripheral a. Circle nodes are labeled
/// "closed" (0) or "open" (1); features are a single constant channel.
inline Graph generate_triad_circle(std::size_t n) {
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("generate_triad_circle: n must be even and >= 4, got " +
                                std::to_string(n));
  }
  const std::size_t per_triad = 2 + kTriadPendants;
  const std::size_t total = n + n * kTriadsPerCircleNode * per_triad;
  std::vector<std::string> names;
  names.reserve(total);
  for (std::size_t i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool closed = i % 2 == 0;
    for (std::size_t t = 0; t < kTriadsPerCircleNode; ++t) {
      const std::string base = "c" + std::to_string(i) + "t" + std::to_string(t);
      auto a = static_cast<NodeId>(names.size());
      names.push_back(base + "a");
      auto b = static_cast<NodeId>(names.size());
      names.push_back(base + "b");
      auto center = static_cast<NodeId>(i);
      edges.emplace_back(center, a);
      edges.emplace_back(center, b);
      if (closed) edges.emplace_back(a, b);
      for (std::size_t k = 0; k < kTriadPendants; ++k) {
        auto pendant = static_cast<NodeId>(names.size());
        names.push_back(base + "p" + std::to_string(k));
        edges.emplace_back(a, pendant);
      }
    }
  }
  Graph g = Graph::from_edges(std::move(names), edges);
  g.set_features(Matrix(total, 1, 1.0));
  std::vector<int> labels(total, kUnlabeled);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % 2 == 0 ? 0 : 1;
  g.set_labels(std::move(labels), {"closed", "open"});
  return g;
}

/// Number of triangles through v.
inline std::size_t triangles_at(const Graph& g, NodeId v) {
  auto nb = g.neighbors(v);
  std::size_t count = 0;
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (g.has_edge(nb[i], nb[j])) ++count;
  return count;
}

}  // namespace gralsp
