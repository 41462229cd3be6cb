#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gralsp/graph.hpp"
#include "gralsp/matrix.hpp"
#include "gralsp/random.hpp"
#include "gralsp/trainer.hpp"

namespace gralsp {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over repeats
  std::vector<double> values;
};

struct EvalReport {
  std::string task;
  std::map<std::string, MetricSummary> metrics;
  std::size_t num_repeats = 0;
  std::vector<std::uint64_t> seeds;

  void add(const std::string& name, std::vector<double> values) {
    MetricSummary m;
    m.values = std::move(values);
    const double n = static_cast<double>(m.values.size());
    m.mean = std::accumulate(m.values.begin(), m.values.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : m.values) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / n);
    metrics[name] = std::move(m);
  }
  const MetricSummary& at(const std::string& name) const { return metrics.at(name); }
};

inline void write_report_csv(const EvalReport& r, std::ostream& out) {
  out << "task,metric,mean,std,repeats\n";
  for (const auto& [name, m] : r.metrics)
    out << r.task << ',' << name << ',' << m.mean << ',' << m.stddev << ',' << r.num_repeats << "\n";
}

inline void write_report_table(const EvalReport& r, std::ostream& out) {
  out << r.task << " (" << r.num_repeats << " repeat" << (r.num_repeats == 1 ? "" : "s") << ")\n";
  for (const auto& [name, m] : r.metrics) {
    out << "  " << name;
    for (std::size_t i = name.size(); i < 16; ++i) out << ' ';
    out << m.mean << " +- " << m.stddev << "\n";
  }
}

// ---------------------------------------------------------------------------
// F1

struct F1Scores {
  double macro = 0.0;
  double micro = 0.0;
};

/// Macro F1 averages over classes occurring in either truth or prediction.
inline F1Scores f1_scores(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size() || truth.empty()) throw EvalError("f1_scores: size mismatch or empty input");
  std::map<int, std::size_t> tp, fp, fn;
  std::set<int> classes;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    classes.insert(truth[i]);
    classes.insert(pred[i]);
    if (truth[i] == pred[i]) {
      ++tp[truth[i]];
      ++correct;
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  double macro = 0.0;
  for (int c : classes) {
    const double denom = 2.0 * static_cast<double>(tp[c]) + static_cast<double>(fp[c] + fn[c]);
    macro += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / denom;
  }
  // Single-label: every error is one FP and one FN, so micro F1 reduces to accuracy.
  return {macro / static_cast<double>(classes.size()),
          static_cast<double>(correct) / static_cast<double>(truth.size())};
}

// ---------------------------------------------------------------------------
// Softmax regression

struct SoftmaxRegressionOptions {
  std::size_t epochs = 300;
  double learning_rate = 0.5;
  double weight_decay = 1e-4;
};

/// Multinomial logistic regression trained by full-batch gradient descent on
/// standardized inputs.
class SoftmaxRegression {
 public:
  void fit(const Matrix& x, std::span<const int> y, std::size_t num_classes,
           const SoftmaxRegressionOptions& opt = {}) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0 || y.size() != n) throw EvalError("SoftmaxRegression: empty or mismatched training data");
    classes_ = num_classes;
    mean_.assign(d, 0.0);
    scale_.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) mean_[j] += x(i, j) / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean_[j]) * (x(i, j) - mean_[j]);
      const double sd = std::sqrt(ss / static_cast<double>(n));
      scale_[j] = sd > 1e-12 ? 1.0 / sd : 0.0;
    }
    Matrix z = standardize(x);
    w_ = Matrix(d, classes_);
    bias_.assign(classes_, 0.0);
    Matrix grad_w(d, classes_);
    std::vector<double> grad_b(classes_), p(classes_);
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
      grad_w.fill(0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        probabilities(z.row(i), p);
        p[static_cast<std::size_t>(y[i])] -= 1.0;
        for (std::size_t c = 0; c < classes_; ++c) {
          grad_b[c] += p[c];
          for (std::size_t j = 0; j < d; ++j) grad_w(j, c) += z(i, j) * p[c];
        }
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t c = 0; c < classes_; ++c)
          w_(j, c) -= opt.learning_rate * (grad_w(j, c) * inv_n + opt.weight_decay * w_(j, c));
      for (std::size_t c = 0; c < classes_; ++c) bias_[c] -= opt.learning_rate * grad_b[c] * inv_n;
    }
  }

  std::vector<int> predict(const Matrix& x) const {
    Matrix z = standardize(x);
    std::vector<int> out(x.rows());
    std::vector<double> p(classes_);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      probabilities(z.row(i), p);
      out[i] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    return out;
  }

 private:
  Matrix standardize(const Matrix& x) const {
    if (x.cols() != mean_.size()) throw EvalError("SoftmaxRegression: feature dimension mismatch");
    Matrix z(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) = (x(i, j) - mean_[j]) * scale_[j];
    return z;
  }

  void probabilities(std::span<const double> z, std::vector<double>& p) const {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes_; ++c) {
      double s = bias_[c];
      for (std::size_t j = 0; j < z.size(); ++j) s += z[j] * w_(j, c);
      p[c] = s;
      top = std::max(top, s);
    }
    double total = 0.0;
    for (auto& v : p) total += (v = std::exp(v - top));
    for (auto& v : p) v /= total;
  }

  std::size_t classes_ = 0;
  std::vector<double> mean_, scale_, bias_;
  Matrix w_;
};

// ---------------------------------------------------------------------------
// Node classification

struct ClassifyOptions {
  double test_frac = 0.2;
  std::size_t repeats = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t max_redraws = 10;
  SoftmaxRegressionOptions regression;
};

struct Split {
  std::vector<std::size_t> train, test;
};

/// Stratified split of the labeled rows; each class contributes round(frac * count) test rows.
inline Split stratified_split(std::span<const int> labels, double test_frac, Rng& rng) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kUnlabeled) by_class[labels[i]].push_back(i);
  Split s;
  for (auto& [c, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    auto take = static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(members.size())));
    take = std::min(take, members.size());
    s.test.insert(s.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    s.train.insert(s.train.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Rows of `embeddings` with label kUnlabeled are ignored.
inline EvalReport classify(const Matrix& embeddings, std::span<const int> labels, const ClassifyOptions& opt = {}) {
  if (embeddings.rows() != labels.size()) throw EvalError("classify: embeddings and labels differ in length");
  if (opt.repeats == 0) throw EvalError("classify: repeats must be positive");
  if (!(opt.test_frac > 0.0 && opt.test_frac < 1.0)) throw EvalError("classify: test_frac must be in (0, 1)");
  // Dense class ids in order of first appearance in sorted label values.
  std::map<int, int> dense;
  for (int l : labels)
    if (l != kUnlabeled) dense.emplace(l, 0);
  if (dense.size() < 2) throw EvalError("classify: need at least two classes");
  int next = 0;
  for (auto& [l, id] : dense) id = next++;

  // Rows are visited in content order so the splits, and hence the metrics,
  // do not depend on how nodes happen to be numbered.
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = embeddings.row(a), rb = embeddings.row(b);
    if (std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end())) return true;
    if (std::lexicographical_compare(rb.begin(), rb.end(), ra.begin(), ra.end())) return false;
    return labels[a] < labels[b];
  });
  std::vector<int> sorted_labels(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted_labels[i] = labels[order[i]];

  std::vector<double> macro(opt.repeats), micro(opt.repeats);
  std::vector<std::uint64_t> seeds(opt.repeats);
  for (std::size_t r = 0; r < opt.repeats; ++r) seeds[r] = derive_seed(opt.seed, {0xc1a5, r});
  parallel_for(opt.repeats, opt.threads, [&](std::size_t r) {
    Rng rng(seeds[r]);
    Split split;
    bool ok = false;
    for (std::size_t attempt = 0; attempt <= opt.max_redraws && !ok; ++attempt) {
      split = stratified_split(sorted_labels, opt.test_frac, rng);
      std::set<int> seen;
      for (auto i : split.train) seen.insert(sorted_labels[i]);
      ok = seen.size() == dense.size() && !split.test.empty();
    }
    if (!ok) throw EvalError("classify: a class is absent from every drawn training split");
    auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x, std::vector<int>& y) {
      x = Matrix(rows.size(), embeddings.cols());
      y.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = embeddings.row(order[rows[i]]);
        std::copy(src.begin(), src.end(), x.row(i).begin());
        y[i] = dense.at(sorted_labels[rows[i]]);
      }
    };
    Matrix xtr, xte;
    std::vector<int> ytr, yte;
    gather(split.train, xtr, ytr);
    gather(split.test, xte, yte);
    SoftmaxRegression model;
    model.fit(xtr, ytr, dense.size(), opt.regression);
    F1Scores f = f1_scores(yte, model.predict(xte));
    macro[r] = f.macro;
    micro[r] = f.micro;
  });
  EvalReport rep;
  rep.task = "node_classification";
  rep.num_repeats = opt.repeats;
  rep.seeds = seeds;
  rep.add("macro_f1", macro);
  rep.add("micro_f1", micro);
  return rep;
}

// ---------------------------------------------------------------------------
// Ranking metrics

/// P(score of random positive > score of random negative), ties counted half.
inline double auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw EvalError("auc: need positives and negatives");
  std::vector<std::pair<double, bool>> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, true);
  for (double s : neg) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Twice the midrank sum of positives, kept integral.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::uint64_t npos = 0;
    while (j < all.size() && all[j].first == all[i].first) npos += all[j++].second;
    twice_rank_sum += npos * (i + 1 + j);  // ranks i+1..j average to (i+1+j)/2
    i = j;
  }
  const std::uint64_t np = pos.size(), nn = neg.size();
  return static_cast<double>(twice_rank_sum - np * (np + 1)) / static_cast<double>(2 * np * nn);
}

/// Recall among the top |pos| scored pairs, with the expected value under random
/// tie-breaking at the cutoff.
inline double recall_at_positives(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty()) throw EvalError("recall: need positives");
  std::vector<std::pair<double, bool>> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, true);
  for (double s : neg) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t k = pos.size();
  const double cutoff = all[k - 1].first;
  std::uint64_t above = 0, pos_above = 0, tied = 0, pos_tied = 0;
  for (const auto& [s, is_pos] : all) {
    if (s > cutoff) {
      ++above;
      pos_above += is_pos;
    } else if (s == cutoff) {
      ++tied;
      pos_tied += is_pos;
    }
  }
  const std::uint64_t slots = k - above;
  return static_cast<double>(pos_above * tied + slots * pos_tied) / static_cast<double>(tied * k);
}

// ---------------------------------------------------------------------------
// Link prediction

struct LinkSplit {
  Graph reduced;
  std::vector<std::pair<NodeId, NodeId>> positives, negatives;
};

/// Removes `frac` of the edges without isolating any node and samples as many
/// uniform non-edges.
inline LinkSplit split_edges(const Graph& g, double frac, std::uint64_t seed) {
  if (!(frac > 0.0 && frac < 1.0)) throw EvalError("split_edges: frac must be in (0, 1)");
  auto edges = g.edges();
  const auto target = static_cast<std::size_t>(std::llround(frac * static_cast<double>(edges.size())));
  if (target == 0) throw EvalError("split_edges: graph too small for frac");
  Rng rng = make_rng(seed, {0x11e5});
  std::shuffle(edges.begin(), edges.end(), rng);
  std::vector<std::size_t> deg(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) deg[v] = g.degree(v);
  LinkSplit out;
  std::vector<std::pair<NodeId, NodeId>> kept;
  for (const auto& [u, v] : edges) {
    if (out.positives.size() < target && deg[u] > 1 && deg[v] > 1) {
      --deg[u];
      --deg[v];
      out.positives.emplace_back(u, v);
    } else {
      kept.emplace_back(u, v);
    }
  }
  if (out.positives.size() < target) throw EvalError("split_edges: graph too small for frac without isolating nodes");
  const std::uint64_t n = g.num_nodes();
  if (n * (n - 1) / 2 < g.num_edges() + target) throw EvalError("split_edges: not enough non-edges");
  std::set<std::pair<NodeId, NodeId>> chosen;
  while (out.negatives.size() < target) {
    auto a = static_cast<NodeId>(uniform_index(rng, n));
    auto b = static_cast<NodeId>(uniform_index(rng, n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (g.has_edge(a, b) || !chosen.emplace(a, b).second) continue;
    out.negatives.emplace_back(a, b);
  }
  out.reduced = g.with_edges(kept);
  return out;
}

using EmbedFn = std::function<Matrix(const Graph&)>;

inline EvalReport link_prediction_eval(const Graph& g, const EmbedFn& embed_fn, double frac = 0.1,
                                       std::uint64_t seed = 1) {
  LinkSplit split = split_edges(g, frac, seed);
  Matrix emb = embed_fn(split.reduced);
  if (emb.rows() != g.num_nodes()) throw EvalError("link_prediction_eval: embedding row count mismatch");
  auto score = [&](const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<double> s;
    s.reserve(pairs.size());
    for (const auto& [u, v] : pairs) s.push_back(dot(emb.row(u), emb.row(v)));
    return s;
  };
  auto pos = score(split.positives);
  auto neg = score(split.negatives);
  EvalReport rep;
  rep.task = "link_prediction";
  rep.num_repeats = 1;
  rep.seeds = {seed};
  rep.add("auc", {auc(pos, neg)});
  rep.add("recall_at_frac", {recall_at_positives(pos, neg)});
  return rep;
}

// ---------------------------------------------------------------------------
// PCA

struct PcaOptions {
  double tolerance = 1e-9;
  std::size_t max_iters = 200000;
};

/// Mean-centered projection onto the top two principal directions. Each
/// direction's largest-magnitude loading is made positive.
inline Matrix pca_2d(const Matrix& x, const PcaOptions& opt = {}) {
  const std::size_t n = x.rows(), d = x.cols();
  if (d < 2 || n < 3) throw EvalError("pca_2d: need at least 2 dimensions and 3 points");
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / static_cast<double>(n);
  Matrix c(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) c(i, j) = x(i, j) - mean[j];
  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov(a, b) += c(i, a) * c(i, b) / static_cast<double>(n);
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += cov(a, a);
  if (!(trace > 1e-300)) throw EvalError("pca_2d: rank-0 data");

  std::vector<std::vector<double>> dirs;
  for (int comp = 0; comp < 2; ++comp) {
    std::vector<double> v(d), w(d);
    // Deterministic start not orthogonal to generic directions.
    for (std::size_t j = 0; j < d; ++j) v[j] = 1.0 + 0.1 * static_cast<double>(j % 7) + 0.01 * static_cast<double>(j);
    // Projects out the found directions (twice, so round-off cannot leave a
    // component along them) and normalizes. Fails when what is left is below
    // `floor`, i.e. indistinguishable from round-off.
    auto orthonormalize = [&](std::vector<double>& u, double floor) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& p : dirs) {
          const double proj = std::inner_product(u.begin(), u.end(), p.begin(), 0.0);
          for (std::size_t j = 0; j < d; ++j) u[j] -= proj * p[j];
        }
      }
      const double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
      if (!(norm > floor)) return false;
      for (auto& e : u) e /= norm;
      return true;
    };
    if (!orthonormalize(v, 1e-12)) {
      // Start fell into the found subspace; any orthogonal unit vector works.
      for (std::size_t j = 0; j < d; ++j) {
        std::fill(v.begin(), v.end(), 0.0);
        v[j] = 1.0;
        if (orthonormalize(v, 1e-6)) break;
      }
    }
    for (std::size_t it = 0; it < opt.max_iters; ++it) {
      for (std::size_t a = 0; a < d; ++a) w[a] = std::inner_product(cov.row(a).begin(), cov.row(a).end(), v.begin(), 0.0);
      if (!orthonormalize(w, 1e-12 * trace)) break;  // remaining variance is zero; keep v
      double delta = 0.0;
      for (std::size_t j = 0; j < d; ++j) delta = std::max(delta, std::abs(w[j] - v[j]));
      v.swap(w);
      if (delta < opt.tolerance) break;
    }
    std::size_t big = 0;
    for (std::size_t j = 1; j < d; ++j)
      if (std::abs(v[j]) > std::abs(v[big]) + 1e-12) big = j;
    if (v[big] < 0)
      for (auto& e : v) e = -e;
    dirs.push_back(v);
  }
  Matrix out(n, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (int comp = 0; comp < 2; ++comp)
      out(i, static_cast<std::size_t>(comp)) = std::inner_product(c.row(i).begin(), c.row(i).end(), dirs[comp].begin(), 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Separability on the triad circle

struct SeparabilityResult {
  double gralsp = 0.0;
  double ablation = 0.0;
  EvalReport gralsp_report, ablation_report;
};

inline EvalReport circle_classification(const Matrix& emb, const Graph& g, std::size_t n, std::uint64_t seed,
                                        std::size_t threads = 1) {
  Matrix circle(n, emb.cols());
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(emb.row(i).begin(), emb.row(i).end(), circle.row(i).begin());
    labels[i] = g.labels()[i];
  }
  ClassifyOptions opt;
  opt.repeats = 5;
  opt.seed = seed;
  opt.threads = threads;
  return classify(circle, labels, opt);
}

/// Mean micro-F1 on the circle nodes of the triad circle for GraLSP and the plain-mean ablation.
inline SeparabilityResult triad_separability(std::size_t n, TrainConfig cfg, std::uint64_t seed) {
  Graph g = generate_triad_circle(n);
  cfg.seed = seed;
  SeparabilityResult r;
  r.gralsp_report = circle_classification(fit_embeddings(g, cfg).embeddings, g, n, seed, cfg.threads);
  r.ablation_report = circle_classification(fit_embeddings(g, cfg.plain_mean()).embeddings, g, n, seed, cfg.threads);
  r.gralsp = r.gralsp_report.at("micro_f1").mean;
  r.ablation = r.ablation_report.at("micro_f1").mean;
  return r;
}

// ---------------------------------------------------------------------------
// Scaling benchmark

struct BenchRow {
  std::size_t n = 0, edges = 0;
  double preprocess_seconds = 0.0;  // alias tables + walk sampling, minimum over repeats
  double train_seconds = 0.0;
  std::size_t iterations = 0;
};

/// Times preprocessing and training on ER graphs with expected degree `np`.
/// Training runs under `cfg` (its max_iters is the iteration budget).
inline std::vector<BenchRow> bench_scaling(std::span<const std::size_t> sizes, double np, std::size_t noise_dim,
                                           std::size_t repeats, const TrainConfig& cfg,
                                           const std::function<void(const BenchRow&)>& progress = {}) {
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::size_t n : sizes) {
    Graph g = generate_er(n, np / static_cast<double>(n), derive_seed(cfg.seed, {n}), noise_dim);
    BenchRow row{n, g.num_edges(), std::numeric_limits<double>::infinity(), 0.0, 0};
    std::optional<WalkCorpus> corpus;
    for (std::size_t rep = 0; rep < std::max<std::size_t>(repeats, 1); ++rep) {
      const auto t0 = clock::now();
      corpus.emplace(build_corpus(g, cfg));
      row.preprocess_seconds = std::min(row.preprocess_seconds, std::chrono::duration<double>(clock::now() - t0).count());
    }
    const auto t0 = clock::now();
    TrainResult r = train(g, *corpus, cfg);
    row.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    row.iterations = r.history.size();
    rows.push_back(row);
    if (progress) progress(row);
  }
  return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw EvalError("loglog_slope: need two or more paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw EvalError("loglog_slope: values must be positive");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  if (sxx == 0.0) throw EvalError("loglog_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace gralsp
