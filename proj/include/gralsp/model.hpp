#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gralsp/autodiff.hpp"
#include "gralsp/graph.hpp"
#include "gralsp/random.hpp"
#include "gralsp/walks.hpp"

namespace gralsp {

/// Architecture and aggregation switches. The defaults are the full model; the
/// switches exist for ablations (plain mean aggregation over fixed-radius walks).
struct ModelOptions {
  std::size_t input_dim = 0;                      // F
  std::vector<std::size_t> layer_dims{100, 32};   // dim_1 .. dim_K
  std::size_t pattern_dim = 30;                   // d'
  std::size_t walks_per_layer = 20;               // s
  bool attention = true;
  bool amplification = true;
  bool adaptive_radius = true;
  std::size_t fixed_radius = 2;   // used when adaptive_radius is off
  bool include_center = true;     // whether walk position 1 (the node itself) is aggregated
  bool per_walk_mean = false;     // mean of per-walk means instead of one pooled mean
  bool relu_output = false;       // ReLU on the last layer as well as the hidden ones
  bool normalize_output = false;  // unit-norm output rows

  std::size_t num_layers() const { return layer_dims.size(); }
  std::size_t dim(std::size_t k) const { return k == 0 ? input_dim : layer_dims[k - 1]; }
  std::size_t output_dim() const { return layer_dims.empty() ? input_dim : layer_dims.back(); }

  /// Plain-mean ablation: no attention, no amplification, fixed radius 2.
  ModelOptions plain_mean() const {
    ModelOptions o = *this;
    o.attention = false;
    o.amplification = false;
    o.adaptive_radius = false;
    o.fixed_radius = 2;
    return o;
  }
};

/// Per-layer parameters. U, V: dim_k x dim_{k-1}; P: 1 x d'; b: 1 x 1;
/// Q: dim_{k-1} x d'; r: 1 x dim_{k-1}.
struct LayerParams {
  Tensor U, V, P, b, Q, r;
};

struct ModelParams {
  ModelOptions options;
  PatternRegistry registry;
  Tensor walk_table;  // one row per registered pattern, plus a final "unknown" row
  std::vector<LayerParams> layers;

  std::size_t unknown_row() const { return walk_table.rows() - 1; }

  std::vector<std::pair<std::string, Tensor*>> named_tensors() {
    std::vector<std::pair<std::string, Tensor*>> out{{"walk_table", &walk_table}};
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const std::string p = "layer" + std::to_string(k + 1) + ".";
      auto& L = layers[k];
      out.insert(out.end(), {{p + "U", &L.U}, {p + "V", &L.V}, {p + "P", &L.P},
                             {p + "b", &L.b}, {p + "Q", &L.Q}, {p + "r", &L.r}});
    }
    return out;
  }

  std::vector<Tensor*> tensors() {
    std::vector<Tensor*> out;
    for (auto& [name, t] : named_tensors()) out.push_back(t);
    return out;
  }

  /// Parameter groups by role across layers: walk_table, U, V, P, b, Q, r.
  std::vector<std::pair<std::string, std::vector<Tensor*>>> groups() {
    std::vector<std::pair<std::string, std::vector<Tensor*>>> g{
        {"walk_table", {&walk_table}}, {"U", {}}, {"V", {}}, {"P", {}}, {"b", {}}, {"Q", {}}, {"r", {}}};
    for (auto& L : layers) {
      g[1].second.push_back(&L.U);
      g[2].second.push_back(&L.V);
      g[3].second.push_back(&L.P);
      g[4].second.push_back(&L.b);
      g[5].second.push_back(&L.Q);
      g[6].second.push_back(&L.r);
    }
    return g;
  }

  void zero_grad() {
    for (Tensor* t : tensors()) t->zero_grad();
  }

  /// Table row for a corpus pattern; patterns unknown to this model map to the shared row.
  std::vector<std::size_t> pattern_rows(const WalkCorpus& corpus) const {
    const auto& reg = corpus.registry();
    std::vector<std::size_t> rows(reg.size());
    for (PatternId id = 0; id < reg.size(); ++id) {
      auto mine = registry.find(reg.steps(id));
      rows[id] = mine ? *mine : unknown_row();
    }
    return rows;
  }
};

namespace detail {

inline Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = dist(rng);
  return m;
}

}  // namespace detail

/// Glorot-uniform weights, N(0, 0.1^2) pattern embeddings (redrawn outside
/// [-1, 1]), zero biases. Deterministic in `seed`.
inline ModelParams init_params(const ModelOptions& options, const PatternRegistry& registry,
                               std::uint64_t seed) {
  if (options.input_dim == 0) throw std::invalid_argument("init_params: input_dim must be positive");
  if (options.layer_dims.empty()) throw std::invalid_argument("init_params: need at least one layer");
  if (options.pattern_dim == 0) throw std::invalid_argument("init_params: pattern_dim must be positive");
  for (auto d : options.layer_dims)
    if (d == 0) throw std::invalid_argument("init_params: layer dims must be positive");

  ModelParams p;
  p.options = options;
  p.registry = registry;
  Rng rng = make_rng(seed, {0x1a17u});
  std::normal_distribution<double> normal(0.0, 0.1);
  Matrix table(registry.size() + 1, options.pattern_dim);
  for (auto& x : table.data()) {
    do x = normal(rng);
    while (std::abs(x) > 1.0);
  }
  p.walk_table = Tensor(std::move(table));
  const std::size_t dp = options.pattern_dim;
  for (std::size_t k = 1; k <= options.num_layers(); ++k) {
    const std::size_t in = options.dim(k - 1), out = options.dim(k);
    LayerParams L;
    L.U = Tensor(detail::glorot_uniform(out, in, rng));
    L.V = Tensor(detail::glorot_uniform(out, in, rng));
    L.P = Tensor(detail::glorot_uniform(1, dp, rng));
    L.b = Tensor(1, 1);
    L.Q = Tensor(detail::glorot_uniform(in, dp, rng));
    L.r = Tensor(1, in);
    p.layers.push_back(std::move(L));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Neighborhood sampling

struct SampledWalk {
  std::size_t walk_index;
  PatternId pattern;       // corpus pattern id
  std::size_t radius;      // r_w (adaptive or fixed)
  std::span<const NodeId> receptive;  // walk positions aggregated for this walk
};

struct NeighborhoodSample {
  NodeId node;
  std::vector<SampledWalk> walks;
};

inline std::size_t walk_radius(const WalkCorpus& corpus, PatternId pattern, const ModelOptions& opt) {
  if (!opt.adaptive_radius) return std::min(opt.fixed_radius, corpus.walk_length());
  return corpus.registry().radius(pattern);
}

/// s walks drawn uniformly with replacement from the node's stored walks.
inline NeighborhoodSample sample_neighborhood(const WalkCorpus& corpus, NodeId v,
                                              const ModelOptions& opt, Rng& rng) {
  NeighborhoodSample s{v, {}};
  const std::size_t cnt = corpus.walk_count(v);
  if (cnt == 0) return s;
  s.walks.reserve(opt.walks_per_layer);
  for (std::size_t i = 0; i < opt.walks_per_layer; ++i) {
    const std::size_t w = corpus.first_walk(v) + uniform_index(rng, cnt);
    const PatternId pid = corpus.pattern(w);
    const std::size_t r = walk_radius(corpus, pid, opt);
    auto nodes = corpus.walk(w);
    const std::size_t start = opt.include_center ? 0 : 1;
    s.walks.push_back({w, pid, r, nodes.subspan(start, r - start)});
  }
  return s;
}

// ---------------------------------------------------------------------------
// Value-level building blocks (reference implementations of one node's update)

/// Softmax over the sampled walks of P . u_pattern + b.
inline std::vector<double> attention_coeffs(const LayerParams& layer, const Matrix& walk_table,
                                            std::span<const std::size_t> pattern_rows) {
  if (pattern_rows.empty()) throw std::invalid_argument("attention_coeffs: empty walk sample");
  std::vector<double> scores(pattern_rows.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = dot(layer.P.value.row(0), walk_table.row(pattern_rows[i])) + layer.b.value[0];
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (auto& s : scores) z += (s = std::exp(s - mx));
  for (auto& s : scores) s /= z;
  return scores;
}

/// Channel gate sigmoid(Q . u_pattern + r), one entry per input channel.
inline std::vector<double> amplification_gate(const LayerParams& layer, const Matrix& walk_table,
                                              std::size_t pattern_row) {
  const Matrix& Q = layer.Q.value;
  std::vector<double> q(Q.rows());
  for (std::size_t c = 0; c < Q.rows(); ++c)
    q[c] = ad::sigmoid(dot(Q.row(c), walk_table.row(pattern_row)) + layer.r.value[c]);
  return q;
}

/// h_v = ReLU(U h_v' + V a_v), where a_v pools lambda_w * (q_w (.) h'_{w_p}) over the
/// in-radius positions of the sampled walks. `h_prev(u)` returns layer k-1 vectors.
inline std::vector<double> aggregate_layer(
    NodeId v, const std::function<std::span<const double>(NodeId)>& h_prev,
    const NeighborhoodSample& sample, const LayerParams& layer, const Matrix& walk_table,
    std::span<const std::size_t> pattern_rows, const ModelOptions& opt) {
  auto self = h_prev(v);
  const std::size_t in = self.size();
  std::vector<double> a(in, 0.0);
  if (!sample.walks.empty()) {
    std::vector<std::size_t> rows;
    for (const auto& w : sample.walks) rows.push_back(pattern_rows[w.pattern]);
    std::vector<double> lambda = opt.attention ? attention_coeffs(layer, walk_table, rows)
                                               : std::vector<double>(rows.size(), 1.0);
    double positions = 0.0;
    for (std::size_t i = 0; i < sample.walks.size(); ++i) {
      const auto& w = sample.walks[i];
      std::vector<double> q = opt.amplification ? amplification_gate(layer, walk_table, rows[i])
                                                : std::vector<double>(in, 1.0);
      const double per_walk = opt.per_walk_mean ? 1.0 / static_cast<double>(w.receptive.size()) : 1.0;
      for (NodeId u : w.receptive) {
        auto hu = h_prev(u);
        for (std::size_t c = 0; c < in; ++c) a[c] += per_walk * lambda[i] * q[c] * hu[c];
      }
      positions += static_cast<double>(w.receptive.size());
    }
    const double denom = opt.per_walk_mean ? static_cast<double>(sample.walks.size()) : positions;
    for (auto& x : a) x /= denom;
  }
  const Matrix& U = layer.U.value;
  const Matrix& V = layer.V.value;
  std::vector<double> h(U.rows());
  for (std::size_t o = 0; o < U.rows(); ++o)
    h[o] = std::max(0.0, dot(U.row(o), self) + dot(V.row(o), a));
  return h;
}

// ---------------------------------------------------------------------------
// Batched forward on a tape

/// Handles of all parameters bound onto one tape.
struct ParamVars {
  Var walk_table;
  struct Layer {
    Var U_t, V_t, P_t, b, Q_t, r;  // transposed where the forward multiplies from the right
  };
  std::vector<Layer> layers;
};

inline ParamVars bind_params(Tape& tape, ModelParams& p) {
  ParamVars pv;
  pv.walk_table = tape.parameter(p.walk_table);
  for (auto& L : p.layers) {
    pv.layers.push_back({tape.transpose(tape.parameter(L.U)), tape.transpose(tape.parameter(L.V)),
                         tape.transpose(tape.parameter(L.P)), tape.parameter(L.b),
                         tape.transpose(tape.parameter(L.Q)), tape.parameter(L.r)});
  }
  return pv;
}

/// Running record of the structural invariants observed during forward passes.
struct ForwardStats {
  std::size_t attention_groups = 0;
  double max_attention_sum_error = 0.0;
  std::size_t gate_values = 0;
  double gate_min = std::numeric_limits<double>::infinity();
  double gate_max = -std::numeric_limits<double>::infinity();
  std::size_t radius_min = std::numeric_limits<std::size_t>::max();
  std::size_t radius_max = 0;
  std::size_t walks = 0;

  void merge(const ForwardStats& o) {
    attention_groups += o.attention_groups;
    max_attention_sum_error = std::max(max_attention_sum_error, o.max_attention_sum_error);
    gate_values += o.gate_values;
    gate_min = std::min(gate_min, o.gate_min);
    gate_max = std::max(gate_max, o.gate_max);
    radius_min = std::min(radius_min, o.radius_min);
    radius_max = std::max(radius_max, o.radius_max);
    walks += o.walks;
  }
};

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Everything the forward pass reads besides parameters.
struct ForwardInputs {
  const Matrix* features = nullptr;
  const WalkCorpus* corpus = nullptr;
  std::vector<std::size_t> pattern_rows;  // corpus pattern id -> walk_table row
};

inline ForwardInputs make_inputs(const ModelParams& params, const Graph& g, const WalkCorpus& corpus) {
  if (corpus.num_nodes() != g.num_nodes()) throw std::invalid_argument("corpus does not match graph");
  if (g.feature_dim() != params.options.input_dim) {
    throw std::invalid_argument("feature dimension " + std::to_string(g.feature_dim()) +
                                " does not match model input " + std::to_string(params.options.input_dim));
  }
  return {&g.features(), &corpus, params.pattern_rows(corpus)};
}

/// Records the K-layer computation for `batch` and returns its |batch| x dim_K output.
///
/// The computation tree is built top-down: each node at layer k samples s walks
/// (independently per layer), and the in-radius nodes of those walks join the
/// node set of layer k-1 together with the node itself. Values are then
/// computed bottom-up from feature rows.
inline Var forward(Tape& tape, const ModelParams& params, const ParamVars& pv,
                   const ForwardInputs& in, std::span<const NodeId> batch, Rng& rng,
                   ForwardStats* stats = nullptr) {
  const ModelOptions& opt = params.options;
  const WalkCorpus& corpus = *in.corpus;
  const std::size_t K = opt.num_layers();
  const std::size_t n = corpus.num_nodes();
  for (NodeId v : batch)
    if (v >= n) throw std::out_of_range("forward: node id out of range");

  // levels[k]: nodes whose layer-k representation is needed; index[k] maps node -> row.
  std::vector<std::vector<NodeId>> levels(K + 1);
  std::vector<std::vector<std::int32_t>> index(K + 1);
  std::vector<std::vector<NeighborhoodSample>> samples(K + 1);
  auto add = [&](std::size_t k, NodeId u) {
    if (index[k][u] < 0) {
      index[k][u] = static_cast<std::int32_t>(levels[k].size());
      levels[k].push_back(u);
    }
  };
  index[K].assign(n, -1);
  for (NodeId v : batch) add(K, v);
  for (std::size_t k = K; k >= 1; --k) {
    index[k - 1].assign(n, -1);
    for (NodeId v : levels[k]) add(k - 1, v);
    samples[k].reserve(levels[k].size());
    for (NodeId v : levels[k]) {
      samples[k].push_back(sample_neighborhood(corpus, v, opt, rng));
      for (const auto& w : samples[k].back().walks)
        for (NodeId u : w.receptive) add(k - 1, u);
    }
  }

  Var h = tape.gather_constant(*in.features, std::span<const NodeId>(levels[0]));
  for (std::size_t k = 1; k <= K; ++k) {
    const auto& pos = index[k - 1];
    const auto& cur = levels[k];
    const auto& L = pv.layers[k - 1];
    const std::size_t in_dim = opt.dim(k - 1);

    std::vector<std::size_t> node_offsets{0}, walk_offsets{0}, walk_rows, position_rows, self_rows;
    std::vector<double> inv_count, inv_radius;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const auto& s = samples[k][i];
      self_rows.push_back(static_cast<std::size_t>(pos[cur[i]]));
      std::size_t positions = 0;
      for (const auto& w : s.walks) {
        walk_rows.push_back(in.pattern_rows[w.pattern]);
        for (NodeId u : w.receptive) position_rows.push_back(static_cast<std::size_t>(pos[u]));
        walk_offsets.push_back(position_rows.size());
        inv_radius.push_back(1.0 / static_cast<double>(w.receptive.size()));
        positions += w.receptive.size();
        if (stats) {
          stats->radius_min = std::min(stats->radius_min, w.radius);
          stats->radius_max = std::max(stats->radius_max, w.radius);
          ++stats->walks;
        }
      }
      node_offsets.push_back(walk_rows.size());
      const std::size_t denom = opt.per_walk_mean ? s.walks.size() : positions;
      inv_count.push_back(denom == 0 ? 0.0 : 1.0 / static_cast<double>(denom));
    }

    Var a;
    if (walk_rows.empty()) {
      a = tape.constant(Matrix(cur.size(), in_dim));
    } else {
      // Attention scores and gates depend only on the pattern, so they are
      // computed once per distinct pattern and then gathered per walk.
      std::vector<std::int32_t> local(params.walk_table.rows(), -1);
      std::vector<std::size_t> distinct_rows, walk_local;
      walk_local.reserve(walk_rows.size());
      for (std::size_t row : walk_rows) {
        if (local[row] < 0) {
          local[row] = static_cast<std::int32_t>(distinct_rows.size());
          distinct_rows.push_back(row);
        }
        walk_local.push_back(static_cast<std::size_t>(local[row]));
      }
      Var emb = tape.gather_rows(pv.walk_table, std::span<const std::size_t>(distinct_rows));
      Var pooled = tape.bag_sum(h, std::span<const std::size_t>(position_rows), walk_offsets);
      if (opt.per_walk_mean) {
        pooled = tape.mul(pooled, tape.constant(Matrix(inv_radius.size(), 1, inv_radius)));
      }
      if (opt.amplification) {
        Var gate = tape.sigmoid(tape.add(tape.matmul(emb, L.Q_t), L.r));
        if (stats) {
          for (double x : tape.value(gate).data()) {
            stats->gate_min = std::min(stats->gate_min, x);
            stats->gate_max = std::max(stats->gate_max, x);
          }
          stats->gate_values += tape.value(gate).size();
        }
        pooled = tape.mul(tape.gather_rows(gate, std::span<const std::size_t>(walk_local)), pooled);
      }
      if (opt.attention) {
        Var scores = tape.add(tape.matmul(emb, L.P_t), L.b);
        Var lambda = tape.segment_softmax(tape.gather_rows(scores, std::span<const std::size_t>(walk_local)),
                                          node_offsets);
        if (stats) {
          const Matrix& lv = tape.value(lambda);
          for (std::size_t g = 0; g + 1 < node_offsets.size(); ++g) {
            if (node_offsets[g] == node_offsets[g + 1]) continue;
            double sum = 0.0;
            for (std::size_t j = node_offsets[g]; j < node_offsets[g + 1]; ++j) sum += lv[j];
            stats->max_attention_sum_error = std::max(stats->max_attention_sum_error, std::abs(sum - 1.0));
            ++stats->attention_groups;
          }
        }
        pooled = tape.mul(pooled, lambda);
      }
      a = tape.mul(tape.segment_sum(pooled, node_offsets),
                   tape.constant(Matrix(inv_count.size(), 1, inv_count)));
    }
    Var self = tape.gather_rows(h, std::span<const std::size_t>(self_rows));
    Var pre = tape.add(tape.matmul(self, L.U_t), tape.matmul(a, L.V_t));
    h = (k < K || opt.relu_output) ? tape.relu(pre) : pre;
  }
  if (opt.normalize_output) h = tape.row_normalize(h);

  std::vector<std::size_t> out_rows;
  out_rows.reserve(batch.size());
  for (NodeId v : batch) out_rows.push_back(static_cast<std::size_t>(index[K][v]));
  return tape.gather_rows(h, std::span<const std::size_t>(out_rows));
}

/// Embeddings for `nodes` (all nodes when empty), computed in chunks with a fixed seed.
inline Matrix embed_nodes(ModelParams& params, const Graph& g, const WalkCorpus& corpus,
                          std::uint64_t seed, std::vector<NodeId> nodes = {}, std::size_t samples = 1,
                          std::size_t chunk = 512) {
  if (samples == 0) throw std::invalid_argument("embed_nodes: samples must be positive");
  if (nodes.empty()) {
    nodes.resize(g.num_nodes());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = static_cast<NodeId>(i);
  }
  ForwardInputs in = make_inputs(params, g, corpus);
  Matrix out(nodes.size(), params.options.output_dim());
  const double weight = 1.0 / static_cast<double>(samples);
  for (std::size_t t = 0; t < samples; ++t) {
    for (std::size_t start = 0; start < nodes.size(); start += chunk) {
      const std::size_t end = std::min(nodes.size(), start + chunk);
      Rng rng = make_rng(seed, {0xe3bdu, t, start});
      Tape tape;
      ParamVars pv = bind_params(tape, params);
      Var h = forward(tape, params, pv, in, std::span<const NodeId>(nodes).subspan(start, end - start), rng);
      const Matrix& hv = tape.value(h);
      for (std::size_t i = 0; i < hv.rows(); ++i)
        for (std::size_t j = 0; j < hv.cols(); ++j) out(start + i, j) += weight * hv(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints: sectioned text with hex-float values, exact on reload.

inline void save_checkpoint(ModelParams& p, std::ostream& out) {
  const auto& o = p.options;
  out << "gralsp-checkpoint 1\n";
  out << "input_dim " << o.input_dim << "\n";
  out << "layer_dims " << o.layer_dims.size();
  for (auto d : o.layer_dims) out << ' ' << d;
  out << "\n";
  out << "pattern_dim " << o.pattern_dim << "\n";
  out << "walks_per_layer " << o.walks_per_layer << "\n";
  out << "attention " << o.attention << "\n";
  out << "amplification " << o.amplification << "\n";
  out << "adaptive_radius " << o.adaptive_radius << "\n";
  out << "fixed_radius " << o.fixed_radius << "\n";
  out << "include_center " << o.include_center << "\n";
  out << "per_walk_mean " << o.per_walk_mean << "\n";
  out << "relu_output " << o.relu_output << "\n";
  out << "normalize_output " << o.normalize_output << "\n";
  out << "registry " << p.registry.size() << "\n";
  for (PatternId id = 0; id < p.registry.size(); ++id) out << pattern_to_string(p.registry.steps(id), ' ') << "\n";
  out << std::hexfloat;
  for (auto& [name, t] : p.named_tensors()) {
    out << "tensor " << name << ' ' << std::dec << t->rows() << ' ' << t->cols() << std::hexfloat << "\n";
    for (std::size_t r = 0; r < t->rows(); ++r) {
      for (std::size_t c = 0; c < t->cols(); ++c) out << (c ? " " : "") << t->value(r, c);
      out << "\n";
    }
  }
  out << std::defaultfloat << "end\n";
}

inline ModelParams load_checkpoint(std::istream& in) {
  auto fail = [](const std::string& what) -> void { throw std::runtime_error("checkpoint: " + what); };
  std::string key;
  auto expect = [&](const char* k) {
    if (!(in >> key) || key != k) fail(std::string("expected '") + k + "'");
  };
  int version = 0;
  expect("gralsp-checkpoint");
  in >> version;
  if (version != 1) fail("unsupported version");
  ModelOptions o;
  std::size_t nlayers = 0;
  expect("input_dim");
  in >> o.input_dim;
  expect("layer_dims");
  in >> nlayers;
  o.layer_dims.assign(nlayers, 0);
  for (auto& d : o.layer_dims) in >> d;
  expect("pattern_dim");
  in >> o.pattern_dim;
  expect("walks_per_layer");
  in >> o.walks_per_layer;
  expect("attention");
  in >> o.attention;
  expect("amplification");
  in >> o.amplification;
  expect("adaptive_radius");
  in >> o.adaptive_radius;
  expect("fixed_radius");
  in >> o.fixed_radius;
  expect("include_center");
  in >> o.include_center;
  expect("per_walk_mean");
  in >> o.per_walk_mean;
  expect("relu_output");
  in >> o.relu_output;
  expect("normalize_output");
  in >> o.normalize_output;
  expect("registry");
  std::size_t npat = 0;
  in >> npat;
  std::string line;
  std::getline(in, line);
  PatternRegistry reg;
  for (std::size_t i = 0; i < npat; ++i) {
    if (!std::getline(in, line)) fail("truncated registry");
    std::istringstream ls(line);
    PatternSteps steps;
    int s = 0;
    while (ls >> s) steps.push_back(static_cast<std::uint8_t>(s));
    if (!is_valid_pattern(steps) || reg.intern(steps) != i) fail("bad registry entry " + std::to_string(i));
  }
  if (!in) fail("malformed header");
  ModelParams p = init_params(o, reg, 0);
  for (auto& [name, t] : p.named_tensors()) {
    std::string got;
    std::size_t rows = 0, cols = 0;
    expect("tensor");
    in >> got >> rows >> cols;
    if (got != name || rows != t->rows() || cols != t->cols()) fail("unexpected tensor " + got);
    for (auto& x : t->value.data()) {
      std::string tok;
      if (!(in >> tok)) fail("truncated tensor " + name);
      x = std::strtod(tok.c_str(), nullptr);
    }
    t->zero_grad();
  }
  expect("end");
  return p;
}

}  // namespace gralsp
