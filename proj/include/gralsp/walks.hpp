#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gralsp/graph.hpp"
#include "gralsp/random.hpp"

namespace gralsp {

/// First-visit index sequence of a walk, e.g. (v2, v1, v3, v4, v1) -> (1, 2, 3, 4, 2).
using PatternSteps = std::vector<std::uint8_t>;
using PatternId = std::uint32_t;

inline constexpr std::size_t kMaxEnumerateLength = 10;
inline constexpr std::size_t kMaxWalkLength = 255;

class WalkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replaces every node by the number of distinct nodes seen up to its first occurrence.
template <std::ranges::forward_range R>
PatternSteps anonymize(const R& walk) {
  using Node = std::ranges::range_value_t<R>;
  PatternSteps steps;
  std::vector<Node> seen;
  for (const Node& node : walk) {
    auto it = std::find(seen.begin(), seen.end(), node);
    if (it == seen.end()) {
      seen.push_back(node);
      steps.push_back(static_cast<std::uint8_t>(seen.size()));
    } else {
      steps.push_back(static_cast<std::uint8_t>(it - seen.begin() + 1));
    }
  }
  if (steps.empty()) throw WalkError("anonymize: empty walk");
  return steps;
}

/// True when `steps` is a dense first-visit sequence without repeated consecutive entries.
inline bool is_valid_pattern(std::span<const std::uint8_t> steps) {
  if (steps.empty() || steps[0] != 1) return false;
  std::uint8_t mx = 1;
  for (std::size_t t = 1; t < steps.size(); ++t) {
    if (steps[t] < 1 || steps[t] > mx + 1 || steps[t] == steps[t - 1]) return false;
    mx = std::max(mx, steps[t]);
  }
  return true;
}

/// All anonymous patterns of length l realizable on a simple graph, in lexicographic order.
inline std::vector<PatternSteps> enumerate_patterns(std::size_t l) {
  if (l == 0) throw WalkError("enumerate_patterns: length must be positive");
  if (l > kMaxEnumerateLength) {
    throw WalkError("enumerate_patterns: length " + std::to_string(l) + " exceeds the limit of " +
                    std::to_string(kMaxEnumerateLength));
  }
  std::vector<PatternSteps> out;
  PatternSteps cur{1};
  std::function<void(std::uint8_t)> rec = [&](std::uint8_t mx) {
    if (cur.size() == l) {
      out.push_back(cur);
      return;
    }
    for (std::uint8_t s = 1; s <= mx + 1; ++s) {
      if (s == cur.back()) continue;
      cur.push_back(s);
      rec(std::max(mx, s));
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

/// floor(2l / distinct nodes), capped at l. Walks that revisit few nodes reach further.
inline std::size_t receptive_radius(std::span<const std::uint8_t> steps) {
  if (steps.empty()) throw WalkError("receptive_radius: empty pattern");
  const std::size_t l = steps.size();
  const std::size_t distinct = *std::max_element(steps.begin(), steps.end());
  return std::min(l, (2 * l) / distinct);
}

/// Bidirectional steps <-> id map; ids are assigned in first-seen order.
class PatternRegistry {
 public:
  PatternId intern(std::span<const std::uint8_t> steps) {
    std::string key(steps.begin(), steps.end());
    auto [it, inserted] = index_.emplace(std::move(key), static_cast<PatternId>(patterns_.size()));
    if (inserted) {
      patterns_.emplace_back(steps.begin(), steps.end());
      radii_.push_back(static_cast<std::uint8_t>(receptive_radius(steps)));
    }
    return it->second;
  }

  std::optional<PatternId> find(std::span<const std::uint8_t> steps) const {
    auto it = index_.find(std::string(steps.begin(), steps.end()));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return patterns_.size(); }
  const PatternSteps& steps(PatternId id) const { return patterns_.at(id); }
  std::size_t radius(PatternId id) const { return radii_.at(id); }

  friend bool operator==(const PatternRegistry& a, const PatternRegistry& b) {
    return a.patterns_ == b.patterns_;
  }

 private:
  std::vector<PatternSteps> patterns_;
  std::vector<std::uint8_t> radii_;
  std::unordered_map<std::string, PatternId> index_;
};

inline std::string pattern_to_string(std::span<const std::uint8_t> steps, char sep = '-') {
  std::string s;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(steps[i]);
  }
  return s;
}

struct PatternProb {
  PatternId pattern;
  double probability;
};

/// Sampled walks for every node plus their anonymous patterns and the
/// per-node and graph-level pattern distributions. Immutable once built.
class WalkCorpus {
 public:
  WalkCorpus() = default;

  /// Builds from raw walks listed per source node. `walks[v]` holds that node's
  /// walks, each `walk_length` nodes long and starting at v.
  static WalkCorpus from_walks(std::size_t walk_length,
                               const std::vector<std::vector<std::vector<NodeId>>>& walks) {
    const std::size_t n = walks.size();
    std::vector<std::size_t> walk_begin(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) walk_begin[v + 1] = walk_begin[v] + walks[v].size();
    std::vector<NodeId> nodes;
    nodes.reserve(walk_begin[n] * walk_length);
    for (std::size_t v = 0; v < n; ++v) {
      for (const auto& w : walks[v]) {
        if (w.size() != walk_length) throw WalkError("from_walks: walk length mismatch");
        if (w.front() != v) throw WalkError("from_walks: walk does not start at its source");
        nodes.insert(nodes.end(), w.begin(), w.end());
      }
    }
    return from_flat(walk_length, std::move(walk_begin), std::move(nodes));
  }

  /// Flat form: walks of node v are [walk_begin[v], walk_begin[v+1]) and walk i
  /// occupies nodes[i*walk_length, (i+1)*walk_length).
  static WalkCorpus from_flat(std::size_t walk_length, std::vector<std::size_t> walk_begin,
                              std::vector<NodeId> nodes) {
    WalkCorpus c;
    c.walk_length_ = walk_length;
    c.walk_begin_ = std::move(walk_begin);
    c.nodes_ = std::move(nodes);
    if (c.walk_begin_.empty() || c.nodes_.size() != c.walk_begin_.back() * walk_length) {
      throw WalkError("from_flat: inconsistent walk storage");
    }
    for (std::size_t v = 0; v + 1 < c.walk_begin_.size(); ++v) {
      const std::size_t cnt = c.walk_begin_[v + 1] - c.walk_begin_[v];
      if (cnt == 0) c.isolated_.push_back(static_cast<NodeId>(v));
      else if (c.walks_per_node_ == 0) c.walks_per_node_ = cnt;
    }
    c.finalize();
    return c;
  }

  std::size_t num_nodes() const { return walk_begin_.size() - 1; }
  std::size_t walk_length() const { return walk_length_; }
  /// Nominal walks per non-isolated node (gamma).
  std::size_t walks_per_node() const { return walks_per_node_; }
  std::size_t num_walks() const { return walk_begin_.back(); }

  std::size_t first_walk(NodeId v) const { return walk_begin_[v]; }
  std::size_t walk_count(NodeId v) const { return walk_begin_[v + 1] - walk_begin_[v]; }
  std::span<const NodeId> walk(std::size_t index) const {
    return {nodes_.data() + index * walk_length_, walk_length_};
  }
  PatternId pattern(std::size_t index) const { return patterns_[index]; }

  const PatternRegistry& registry() const { return registry_; }
  const std::vector<NodeId>& isolated() const { return isolated_; }

  /// Empirical pattern distribution of node v, sorted by pattern id.
  std::span<const PatternProb> node_dist(NodeId v) const { return node_dist_[v]; }
  double node_prob(NodeId v, PatternId id) const {
    const auto& d = node_dist_[v];
    auto it = std::lower_bound(d.begin(), d.end(), id,
                               [](const PatternProb& p, PatternId x) { return p.pattern < x; });
    return it != d.end() && it->pattern == id ? it->probability : 0.0;
  }
  /// Mean of node distributions over nodes that have walks.
  const std::vector<double>& graph_dist() const { return graph_dist_; }

 private:
  void finalize() {
    const std::size_t n = num_nodes();
    patterns_.resize(num_walks());
    PatternSteps steps;
    std::vector<NodeId> seen;
    for (std::size_t i = 0; i < num_walks(); ++i) {
      auto w = walk(i);
      steps.clear();
      seen.clear();
      for (NodeId node : w) {
        auto pos = static_cast<std::size_t>(std::find(seen.begin(), seen.end(), node) - seen.begin());
        if (pos == seen.size()) seen.push_back(node);
        steps.push_back(static_cast<std::uint8_t>(pos + 1));
      }
      patterns_[i] = registry_.intern(steps);
    }
    node_dist_.assign(n, {});
    graph_dist_.assign(registry_.size(), 0.0);
    std::vector<std::size_t> counts;
    std::size_t active = 0;
    for (NodeId v = 0; v < n; ++v) {
      const std::size_t cnt = walk_count(v);
      if (cnt == 0) continue;
      ++active;
      std::vector<PatternId> ids(patterns_.begin() + static_cast<std::ptrdiff_t>(first_walk(v)),
                                 patterns_.begin() + static_cast<std::ptrdiff_t>(first_walk(v) + cnt));
      std::sort(ids.begin(), ids.end());
      auto& dist = node_dist_[v];
      for (std::size_t i = 0; i < ids.size();) {
        std::size_t j = i;
        while (j < ids.size() && ids[j] == ids[i]) ++j;
        dist.push_back({ids[i], static_cast<double>(j - i) / static_cast<double>(cnt)});
        i = j;
      }
    }
    // Summed in node order so the reduction is deterministic.
    for (NodeId v = 0; v < n; ++v)
      for (const auto& pp : node_dist_[v]) graph_dist_[pp.pattern] += pp.probability;
    if (active > 0)
      for (auto& g : graph_dist_) g /= static_cast<double>(active);
  }

  std::size_t walk_length_ = 0;
  std::size_t walks_per_node_ = 0;
  std::vector<std::size_t> walk_begin_{0};
  std::vector<NodeId> nodes_;
  std::vector<PatternId> patterns_;
  std::vector<NodeId> isolated_;
  PatternRegistry registry_;
  std::vector<std::vector<PatternProb>> node_dist_;
  std::vector<double> graph_dist_;
};

/// Samples `gamma` uniform random walks of `length` nodes from every non-isolated
/// node. Each source node draws from its own stream derived from (seed, node), so
/// the corpus does not depend on `threads`.
inline WalkCorpus sample_walks(const Graph& g, const AliasSampler& sampler, std::size_t gamma,
                               std::size_t length, std::uint64_t seed, std::size_t threads = 1) {
  if (length < 2) throw WalkError("sample_walks: walk length must be >= 2");
  if (length > kMaxWalkLength) throw WalkError("sample_walks: walk length too large");
  if (gamma == 0) throw WalkError("sample_walks: gamma must be positive");
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> walk_begin(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v)
    walk_begin[v + 1] = walk_begin[v] + (g.degree(static_cast<NodeId>(v)) > 0 ? gamma : 0);
  std::vector<NodeId> nodes(walk_begin[n] * length);
  parallel_for(n, threads, [&](std::size_t v) {
    if (g.degree(static_cast<NodeId>(v)) == 0) return;
    Rng rng = make_rng(seed, {0x3a1cu, v});
    NodeId* out = nodes.data() + walk_begin[v] * length;
    for (std::size_t i = 0; i < gamma; ++i, out += length) {
      out[0] = static_cast<NodeId>(v);
      for (std::size_t t = 1; t < length; ++t) out[t] = sampler.sample_neighbor(out[t - 1], rng);
    }
  });
  return WalkCorpus::from_flat(length, std::move(walk_begin), std::move(nodes));
}

struct WalkTriple {
  NodeId node;
  PatternId anchor;    // over-represented at node
  PatternId positive;  // over-represented at node
  PatternId negative;  // under-represented at node
};

/// Draws up to `per_node` (j, k, n) triples per node, where j and k are
/// over-represented at the node relative to the graph mean and n is
/// under-represented. Nodes lacking either set are skipped.
inline std::vector<WalkTriple> sample_walk_triples(const WalkCorpus& c, std::size_t per_node,
                                                   Rng& rng) {
  const auto& gdist = c.graph_dist();
  const std::size_t num_patterns = c.registry().size();
  if (gdist.size() != num_patterns) throw WalkError("sample_walk_triples: corpus has no distributions");
  std::vector<WalkTriple> out;
  std::vector<PatternId> over;
  std::vector<PatternId> under_explicit;
  for (NodeId v = 0; v < c.num_nodes(); ++v) {
    auto dist = c.node_dist(v);
    if (dist.empty()) continue;
    over.clear();
    std::size_t observed_under = 0;
    for (const auto& pp : dist) {
      if (pp.probability > gdist[pp.pattern]) over.push_back(pp.pattern);
      else if (pp.probability < gdist[pp.pattern]) ++observed_under;
    }
    if (over.empty()) continue;
    // Unobserved patterns qualify whenever their graph mean is positive.
    const bool maybe_under = observed_under > 0 || dist.size() < num_patterns;
    if (!maybe_under) continue;

    auto is_under = [&](PatternId id) { return c.node_prob(v, id) < gdist[id]; };
    under_explicit.clear();
    bool explicit_built = false;
    for (std::size_t t = 0; t < per_node; ++t) {
      PatternId j = over[uniform_index(rng, over.size())];
      PatternId k = over[uniform_index(rng, over.size())];
      std::optional<PatternId> neg;
      if (!explicit_built) {
        for (int attempt = 0; attempt < 64; ++attempt) {
          auto id = static_cast<PatternId>(uniform_index(rng, num_patterns));
          if (is_under(id)) {
            neg = id;
            break;
          }
        }
      }
      if (!neg) {
        if (!explicit_built) {
          for (PatternId id = 0; id < num_patterns; ++id)
            if (is_under(id)) under_explicit.push_back(id);
          explicit_built = true;
        }
        if (under_explicit.empty()) break;
        neg = under_explicit[uniform_index(rng, under_explicit.size())];
      }
      out.push_back({v, j, k, *neg});
    }
  }
  return out;
}

/// (t, u) position pairs with 0 < |u - t| <= window inside a walk of `length` nodes.
inline std::vector<std::pair<std::uint8_t, std::uint8_t>> context_offsets(std::size_t length,
                                                                          std::size_t window) {
  std::vector<std::pair<std::uint8_t, std::uint8_t>> out;
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t u = (t > window ? t - window : 0); u < std::min(length, t + window + 1); ++u)
      if (u != t) out.emplace_back(static_cast<std::uint8_t>(t), static_cast<std::uint8_t>(u));
  return out;
}

/// Streams skip-gram (center, context) pairs from every walk; pairs whose
/// endpoints coincide are dropped.
template <typename Sink>
void context_pairs(const WalkCorpus& c, std::size_t window, Sink&& sink) {
  const auto offsets = context_offsets(c.walk_length(), window);
  for (std::size_t i = 0; i < c.num_walks(); ++i) {
    auto w = c.walk(i);
    for (auto [t, u] : offsets)
      if (w[t] != w[u]) sink(w[t], w[u]);
  }
}

// ---------------------------------------------------------------------------
// Corpus dump: "<source-id> <node ids...> | <pattern steps...>" per walk.

inline void write_corpus(const WalkCorpus& c, const Graph& g, std::ostream& out) {
  std::string line;
  for (std::size_t i = 0; i < c.num_walks(); ++i) {
    auto w = c.walk(i);
    line = g.name(w[0]);
    for (NodeId v : w) {
      line += ' ';
      line += g.name(v);
    }
    line += " |";
    for (auto s : c.registry().steps(c.pattern(i))) {
      line += ' ';
      line += std::to_string(s);
    }
    out << line << '\n';
  }
}

inline WalkCorpus read_corpus(const Graph& g, std::istream& in) {
  std::vector<std::vector<std::vector<NodeId>>> walks(g.num_nodes());
  std::size_t length = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    auto tok = detail::split_ws(line);
    auto bar = std::find(tok.begin(), tok.end(), std::string_view("|"));
    if (bar == tok.end() || bar - tok.begin() < 3) throw ParseError("corpus", lineno, "malformed walk line");
    auto src = g.find(tok[0]);
    if (!src) throw ParseError("corpus", lineno, "unknown source node");
    std::vector<NodeId> w;
    for (auto it = tok.begin() + 1; it != bar; ++it) {
      auto v = g.find(*it);
      if (!v) throw ParseError("corpus", lineno, "unknown node '" + std::string(*it) + "'");
      w.push_back(*v);
    }
    PatternSteps steps;
    for (auto it = bar + 1; it != tok.end(); ++it) {
      auto x = detail::parse_double(*it);
      if (!x) throw ParseError("corpus", lineno, "bad pattern step");
      steps.push_back(static_cast<std::uint8_t>(*x));
    }
    if (length == 0) length = w.size();
    if (w.size() != length) throw ParseError("corpus", lineno, "inconsistent walk length");
    if (w.front() != *src) throw ParseError("corpus", lineno, "walk does not start at its source");
    for (std::size_t t = 0; t + 1 < w.size(); ++t)
      if (!g.has_edge(w[t], w[t + 1])) throw ParseError("corpus", lineno, "walk uses a non-edge");
    if (anonymize(w) != steps) throw ParseError("corpus", lineno, "pattern does not match walk");
    walks[*src].push_back(std::move(w));
  }
  if (length == 0) throw WalkError("read_corpus: no walks");
  return WalkCorpus::from_walks(length, walks);
}

}  // namespace gralsp
