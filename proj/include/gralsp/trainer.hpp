#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gralsp/autodiff.hpp"
#include "gralsp/graph.hpp"
#include "gralsp/model.hpp"
#include "gralsp/random.hpp"
#include "gralsp/walks.hpp"

namespace gralsp {

struct TrainConfig {
  std::size_t walks_per_node = 100;  // gamma
  std::size_t walk_length = 8;       // l, in nodes
  std::size_t window = 5;
  std::size_t negatives = 8;         // k
  std::size_t walks_per_layer = 20;  // s
  double walk_loss_weight = 0.1;     // mu
  std::size_t pattern_dim = 30;
  std::size_t hidden_dim = 100;
  std::size_t output_dim = 32;
  std::size_t num_layers = 2;
  double learning_rate = 0.005;
  std::size_t batch_size = 256;      // context pairs per iteration
  std::size_t triples_per_node = 5;
  std::size_t max_iters = 1000;
  std::size_t patience = 10;
  std::size_t smoothing = 10;        // moving-average window of the convergence rule
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t inference_samples = 10;  // neighborhood draws averaged into the final embeddings

  bool attention = true;
  bool amplification = true;
  bool adaptive_radius = true;
  bool include_center = true;
  bool per_walk_mean = false;
  bool relu_output = false;
  bool normalize_output = false;

  /// Drop walk triples entirely (the walk objective contributes nothing).
  bool withhold_walk_triples = false;
  /// Use the node objective's negative term with the sign as literally printed
  /// in the original formulation. It is unbounded below; never use for training.
  bool printed_negative_sign = false;

  void validate() const {
    auto positive = [](std::size_t v, const char* name) {
      if (v == 0) throw std::invalid_argument(std::string("TrainConfig: ") + name + " must be positive");
    };
    positive(walks_per_node, "walks_per_node");
    positive(window, "window");
    positive(negatives, "negatives");
    positive(walks_per_layer, "walks_per_layer");
    positive(pattern_dim, "pattern_dim");
    positive(hidden_dim, "hidden_dim");
    positive(output_dim, "output_dim");
    positive(num_layers, "num_layers");
    positive(batch_size, "batch_size");
    positive(patience, "patience");
    positive(smoothing, "smoothing");
    positive(inference_samples, "inference_samples");
    if (walk_length < 2) throw std::invalid_argument("TrainConfig: walk_length must be >= 2");
    if (!(walk_loss_weight >= 0.0)) throw std::invalid_argument("TrainConfig: walk_loss_weight must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  }

  ModelOptions model_options(std::size_t input_dim) const {
    ModelOptions o;
    o.input_dim = input_dim;
    o.layer_dims.assign(num_layers - 1, hidden_dim);
    o.layer_dims.push_back(output_dim);
    o.pattern_dim = pattern_dim;
    o.walks_per_layer = walks_per_layer;
    o.attention = attention;
    o.amplification = amplification;
    o.adaptive_radius = adaptive_radius;
    o.include_center = include_center;
    o.per_walk_mean = per_walk_mean;
    o.relu_output = relu_output;
    o.normalize_output = normalize_output;
    return o;
  }

  /// The plain-mean aggregation baseline under otherwise identical settings.
  TrainConfig plain_mean() const {
    TrainConfig c = *this;
    c.attention = false;
    c.amplification = false;
    c.adaptive_radius = false;
    return c;
  }
};

// ---------------------------------------------------------------------------
// Objectives

/// Mean over triples of -log sigmoid(u_j . u_k - u_j . u_n). Zero for no triples.
inline Var walk_loss(Tape& tape, Var walk_table, std::span<const WalkTriple> triples,
                     std::span<const std::size_t> pattern_rows) {
  if (triples.empty()) return tape.constant(Matrix(1, 1, 0.0));
  std::vector<std::size_t> j, k, n;
  for (const auto& t : triples) {
    j.push_back(pattern_rows[t.anchor]);
    k.push_back(pattern_rows[t.positive]);
    n.push_back(pattern_rows[t.negative]);
  }
  Var uj = tape.gather_rows(walk_table, std::span<const std::size_t>(j));
  Var uk = tape.gather_rows(walk_table, std::span<const std::size_t>(k));
  Var un = tape.gather_rows(walk_table, std::span<const std::size_t>(n));
  Var margin = tape.sub(tape.row_dot(uj, uk), tape.row_dot(uj, un));
  return tape.negate(tape.mean(tape.log_sigmoid(margin)));
}

/// Mean over pairs of -[log s(h_i.h_j) + sum_n log s(-h_i.h_n)].
/// `negatives` holds k rows per pair, pair-major.
inline Var node_loss(Tape& tape, Var centers, Var contexts, Var negatives, std::size_t k,
                     bool printed_negative_sign = false) {
  const std::size_t pairs = tape.value(centers).rows();
  if (pairs == 0) throw std::invalid_argument("node_loss: empty batch");
  if (tape.value(negatives).rows() != pairs * k) throw ShapeError("node_loss: expected k negatives per pair");
  std::vector<std::size_t> rep(pairs * k);
  for (std::size_t i = 0; i < rep.size(); ++i) rep[i] = i / k;
  Var pos = tape.sum(tape.log_sigmoid(tape.row_dot(centers, contexts)));
  Var centers_rep = tape.gather_rows(centers, std::span<const std::size_t>(rep));
  Var neg_scores = tape.row_dot(centers_rep, negatives);
  Var neg = printed_negative_sign ? tape.negate(tape.sum(tape.log_sigmoid(neg_scores)))
                                  : tape.sum(tape.log_sigmoid(tape.negate(neg_scores)));
  return tape.scale(tape.add(pos, neg), -1.0 / static_cast<double>(pairs));
}

/// Noise distribution for negative sampling: unigram over nodes, proportional to degree^0.75.
class NegativeSampler {
 public:
  explicit NegativeSampler(const Graph& g) {
    std::vector<double> w(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) w[v] = std::pow(static_cast<double>(g.degree(v)), 0.75);
    table_.build(w);
  }
  NodeId sample(Rng& rng) const { return static_cast<NodeId>(table_.sample(rng)); }
  std::vector<NodeId> sample(std::size_t count, Rng& rng) const {
    std::vector<NodeId> out(count);
    for (auto& v : out) v = sample(rng);
    return out;
  }

 private:
  AliasTable table_;
};

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// One bias-corrected Adam update; gradients are zeroed afterwards.
inline void adam_step(std::span<Tensor* const> params, AdamState& state, double lr) {
  if (state.m.empty()) {
    for (Tensor* p : params) {
      state.m.emplace_back(p->rows(), p->cols());
      state.v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: parameter count changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = *params[i];
    if (!p.grad.same_shape(p.value) || !state.m[i].same_shape(p.value)) {
      throw ShapeError("adam_step: shape mismatch on parameter " + std::to_string(i));
    }
    for (std::size_t j = 0; j < p.grad.size(); ++j) {
      if (!std::isfinite(p.grad[j])) {
        throw NonFiniteError("adam_step: non-finite gradient in parameter " + std::to_string(i) +
                             " at coordinate " + std::to_string(j));
      }
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    if (!p.requires_grad) continue;
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      p.value[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.epsilon);
    }
    p.zero_grad();
  }
}

// ---------------------------------------------------------------------------
// Training

struct LossRecord {
  std::size_t iter = 0;
  double node_loss = 0.0;
  double walk_loss = 0.0;
  double total = 0.0;
};

inline void write_loss_csv(std::span<const LossRecord> history, std::ostream& out) {
  out << "iter,node_loss,walk_loss,total\n";
  auto old = out.precision(17);
  for (const auto& r : history) out << r.iter << ',' << r.node_loss << ',' << r.walk_loss << ',' << r.total << '\n';
  out.precision(old);
}

/// Trailing moving average of `values` with window w at each index (shorter at the start).
inline std::vector<double> moving_average(std::span<const double> values, std::size_t w) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= w) acc -= values[i - w];
    out[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

struct TrainResult {
  ModelParams params;
  Matrix embeddings;  // |V| x output_dim
  std::vector<LossRecord> history;
  bool converged = false;
  ForwardStats stats;
  std::size_t iterations_without_triples = 0;
  double seconds = 0.0;
};

/// Builds the alias sampler and walk corpus the trainer consumes.
inline WalkCorpus build_corpus(const Graph& g, const TrainConfig& cfg) {
  AliasSampler sampler(g);
  return sample_walks(g, sampler, cfg.walks_per_node, cfg.walk_length, derive_seed(cfg.seed, {0xc0u}),
                      cfg.threads);
}

/// Uniform draws from the corpus' skip-gram pair stream.
class PairSampler {
 public:
  PairSampler(const WalkCorpus& c, std::size_t window)
      : corpus_(&c), offsets_(context_offsets(c.walk_length(), window)) {
    if (offsets_.empty()) throw std::invalid_argument("PairSampler: window yields no pairs");
  }

  /// Draws `count` (center, context) pairs; self pairs are rejected and redrawn.
  void sample(std::size_t count, Rng& rng, std::vector<NodeId>& centers, std::vector<NodeId>& contexts) const {
    centers.clear();
    contexts.clear();
    const std::size_t walks = corpus_->num_walks();
    if (walks == 0) throw std::invalid_argument("PairSampler: empty corpus");
    std::size_t attempts = 0;
    while (centers.size() < count) {
      if (++attempts > 100 * count + 1000) throw std::runtime_error("PairSampler: corpus has no non-self pairs");
      auto w = corpus_->walk(uniform_index(rng, walks));
      auto [t, u] = offsets_[uniform_index(rng, offsets_.size())];
      if (w[t] == w[u]) continue;
      centers.push_back(w[t]);
      contexts.push_back(w[u]);
    }
  }

 private:
  const WalkCorpus* corpus_;
  std::vector<std::pair<std::uint8_t, std::uint8_t>> offsets_;
};

/// One minibatch: skip-gram pairs, k negatives per pair (pair-major), walk
/// triples, and the seed of the forward pass' neighborhood sampling.
struct Batch {
  std::vector<NodeId> centers, contexts, negatives;
  std::vector<WalkTriple> triples;
  std::uint64_t forward_seed = 0;
};

struct BatchLoss {
  Var node, walk, total;
};

/// Records L_node + mu * L_walk for a batch. Each distinct node is forwarded once.
inline BatchLoss batch_loss(Tape& tape, ModelParams& params, const ForwardInputs& inputs, const Batch& b,
                            const TrainConfig& cfg, ForwardStats* stats = nullptr) {
  std::vector<NodeId> nodes;
  std::vector<std::int32_t> slot(inputs.corpus->num_nodes(), -1);
  auto rows_of = [&](const std::vector<NodeId>& vs) {
    std::vector<std::size_t> rows;
    rows.reserve(vs.size());
    for (NodeId v : vs) {
      if (slot[v] < 0) {
        slot[v] = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(v);
      }
      rows.push_back(static_cast<std::size_t>(slot[v]));
    }
    return rows;
  };
  auto c_rows = rows_of(b.centers);
  auto x_rows = rows_of(b.contexts);
  auto n_rows = rows_of(b.negatives);

  ParamVars pv = bind_params(tape, params);
  Rng rng(b.forward_seed);
  Var h = forward(tape, params, pv, inputs, nodes, rng, stats);
  Var hc = tape.gather_rows(h, std::span<const std::size_t>(c_rows));
  Var hx = tape.gather_rows(h, std::span<const std::size_t>(x_rows));
  Var hn = tape.gather_rows(h, std::span<const std::size_t>(n_rows));
  BatchLoss out;
  out.node = node_loss(tape, hc, hx, hn, cfg.negatives, cfg.printed_negative_sign);
  out.walk = walk_loss(tape, pv.walk_table, b.triples, inputs.pattern_rows);
  out.total = out.node;
  if (cfg.walk_loss_weight > 0.0 && !b.triples.empty()) {
    out.total = tape.add(out.node, tape.scale(out.walk, cfg.walk_loss_weight));
  }
  return out;
}

using TrainObserver = std::function<void(const LossRecord&)>;

/// Minimizes L_node + mu * L_walk with Adam until the `smoothing`-step moving
/// average of the total loss has not reached a new minimum for `patience`
/// consecutive iterations, or `max_iters` is hit. Each iteration's randomness is
/// derived from (seed, iteration, stream), so runs are bit-reproducible.
inline TrainResult train(const Graph& g, const WalkCorpus& corpus, const TrainConfig& cfg,
                         const TrainObserver& observer = {}, bool collect_stats = false) {
  cfg.validate();
  if (corpus.num_nodes() != g.num_nodes()) throw std::invalid_argument("train: corpus does not match graph");
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  result.params = init_params(cfg.model_options(g.feature_dim()), corpus.registry(), derive_seed(cfg.seed, {0x1417u}));
  ModelParams& params = result.params;
  ForwardInputs inputs = make_inputs(params, g, corpus);
  const std::vector<Tensor*> tensors = params.tensors();

  PairSampler pairs(corpus, cfg.window);
  NegativeSampler noise(g);
  AdamState adam;

  std::vector<WalkTriple> pool;
  std::size_t pool_cursor = 0, epoch = 0;
  auto next_triples = [&](std::vector<WalkTriple>& out) {
    out.clear();
    if (cfg.withhold_walk_triples) return;
    while (out.size() < cfg.batch_size) {
      if (pool_cursor >= pool.size()) {
        Rng prng = make_rng(cfg.seed, {0x7e1u, epoch++});
        pool = sample_walk_triples(corpus, cfg.triples_per_node, prng);
        std::shuffle(pool.begin(), pool.end(), prng);
        pool_cursor = 0;
        if (pool.empty()) return;
      }
      std::size_t take = std::min(cfg.batch_size - out.size(), pool.size() - pool_cursor);
      out.insert(out.end(), pool.begin() + static_cast<std::ptrdiff_t>(pool_cursor),
                 pool.begin() + static_cast<std::ptrdiff_t>(pool_cursor + take));
      pool_cursor += take;
    }
  };

  Batch batch;
  std::vector<double> totals;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;

  for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
    Rng pair_rng = make_rng(cfg.seed, {0x9a1u, iter});
    Rng neg_rng = make_rng(cfg.seed, {0x4e9u, iter});
    pairs.sample(cfg.batch_size, pair_rng, batch.centers, batch.contexts);
    batch.negatives = noise.sample(cfg.batch_size * cfg.negatives, neg_rng);
    next_triples(batch.triples);
    batch.forward_seed = derive_seed(cfg.seed, {0xf0du, iter});
    if (batch.triples.empty()) ++result.iterations_without_triples;

    Tape tape;
    ForwardStats stats;
    BatchLoss loss = batch_loss(tape, params, inputs, batch, cfg, collect_stats ? &stats : nullptr);
    LossRecord rec{iter, tape.scalar(loss.node), tape.scalar(loss.walk), tape.scalar(loss.total)};
    if (!std::isfinite(rec.total)) {
      throw NonFiniteError("train: loss diverged at iteration " + std::to_string(iter));
    }
    tape.backward(loss.total);
    adam_step(tensors, adam, cfg.learning_rate);
    if (collect_stats) result.stats.merge(stats);

    result.history.push_back(rec);
    if (observer) observer(rec);
    totals.push_back(rec.total);
    if (totals.size() >= cfg.smoothing) {
      double ma = 0.0;
      for (std::size_t i = totals.size() - cfg.smoothing; i < totals.size(); ++i) ma += totals[i];
      ma /= static_cast<double>(cfg.smoothing);
      if (ma < best) {
        best = ma;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        result.converged = true;
        break;
      }
    }
  }

  result.embeddings = embed_nodes(params, g, corpus, derive_seed(cfg.seed, {0xe7a1u}), {}, cfg.inference_samples);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Walks + training + embeddings for a graph: the full representation pipeline.
inline TrainResult fit_embeddings(const Graph& g, const TrainConfig& cfg) {
  WalkCorpus corpus = build_corpus(g, cfg);
  return train(g, corpus, cfg);
}

// ---------------------------------------------------------------------------
// Gradient gate

struct GradientGateOptions {
  std::size_t nodes = 30;
  double edge_prob = 0.2;
  std::size_t feature_dim = 8;
  std::size_t pattern_dim = 8;
  std::size_t hidden_dim = 16;
  std::size_t output_dim = 8;
  std::size_t batch_size = 16;
  std::size_t walks_per_node = 10;
  double eps = 1e-4;
  // Central differences on a loss of order 10 carry ~1e-11 of round-off, so
  // gradients much below 1e-6 cannot be resolved relatively.
  double error_floor = 1e-6;
  std::size_t coords_per_tensor = 100;
};

struct GradientGateReport {
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> groups;  // worst error per parameter group
  std::size_t coordinates = 0;
};

/// Finite-difference check of the full objective L_node + mu * L_walk on a small
/// ER graph with noise features, one fixed batch and a fixed neighborhood draw.
inline GradientGateReport gradient_gate(std::uint64_t seed, const GradientGateOptions& opt = {}) {
  Graph g = generate_er(opt.nodes, opt.edge_prob, seed, opt.feature_dim);
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.walks_per_node = opt.walks_per_node;
  cfg.pattern_dim = opt.pattern_dim;
  cfg.hidden_dim = opt.hidden_dim;
  cfg.output_dim = opt.output_dim;
  cfg.batch_size = opt.batch_size;
  WalkCorpus corpus = build_corpus(g, cfg);
  ModelParams params = init_params(cfg.model_options(g.feature_dim()), corpus.registry(), derive_seed(seed, {0x1417u}));
  ForwardInputs inputs = make_inputs(params, g, corpus);

  Batch batch;
  Rng rng = make_rng(seed, {0x6a7eu});
  PairSampler(corpus, cfg.window).sample(cfg.batch_size, rng, batch.centers, batch.contexts);
  batch.negatives = NegativeSampler(g).sample(cfg.batch_size * cfg.negatives, rng);
  batch.triples = sample_walk_triples(corpus, cfg.triples_per_node, rng);
  if (batch.triples.empty()) throw std::runtime_error("gradient_gate: graph yields no walk triples");
  batch.forward_seed = derive_seed(seed, {0xf0du});

  auto loss_fn = [&](Tape& tape) { return batch_loss(tape, params, inputs, batch, cfg).total; };
  GradientGateReport report;
  for (auto& [name, tensors] : params.groups()) {
    GradCheckReport r = finite_diff_check(loss_fn, tensors, opt.eps, opt.coords_per_tensor,
                                        derive_seed(seed, {report.groups.size()}), opt.error_floor);
    report.groups.emplace_back(name, r.max_relative_error);
    report.coordinates += r.coordinates;
    report.max_relative_error = std::max(report.max_relative_error, r.max_relative_error);
  }
  return report;
}

}  // namespace gralsp
