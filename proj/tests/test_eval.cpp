#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "gralsp/eval.hpp"
#include "gralsp/graph.hpp"

using namespace gralsp;

namespace {

// O(|pos| |neg|) pair count with half credit for ties.
double brute_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / static_cast<double>(pos.size() * neg.size());
}

Matrix gaussian(std::size_t n, std::size_t d, Rng& rng) {
  std::normal_distribution<double> z;
  Matrix m(n, d);
  for (auto& x : m.data()) x = z(rng);
  return m;
}

// Random orthogonal matrix by Gram-Schmidt on a Gaussian draw.
Matrix random_rotation(std::size_t d, Rng& rng) {
  Matrix q = gaussian(d, d, rng);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double p = std::inner_product(q.row(i).begin(), q.row(i).end(), q.row(j).begin(), 0.0);
      for (std::size_t k = 0; k < d; ++k) q(i, k) -= p * q(j, k);
    }
    double nrm = std::sqrt(std::inner_product(q.row(i).begin(), q.row(i).end(), q.row(i).begin(), 0.0));
    for (std::size_t k = 0; k < d; ++k) q(i, k) /= nrm;
  }
  return q;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

double column_variance(const Matrix& m, std::size_t c) {
  double mean = 0, ss = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, c) / static_cast<double>(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) ss += (m(i, c) - mean) * (m(i, c) - mean);
  return ss / static_cast<double>(m.rows());
}

}  // namespace

TEST(F1, HandComputed) {
  std::vector<int> truth{0, 1, 1}, pred{0, 0, 1};
  auto f = f1_scores(truth, pred);
  EXPECT_NEAR(f.micro, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f.macro, 2.0 / 3.0, 1e-15);
}

TEST(F1, MicroEqualsAccuracy) {
  Rng rng = make_rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> t(40), p(40);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 40; ++i) {
      t[i] = static_cast<int>(uniform_index(rng, 4));
      p[i] = static_cast<int>(uniform_index(rng, 4));
      correct += t[i] == p[i];
    }
    auto f = f1_scores(t, p);
    EXPECT_DOUBLE_EQ(f.micro, static_cast<double>(correct) / 40.0);
    EXPECT_GE(f.macro, 0.0);
    EXPECT_LE(f.macro, 1.0);
  }
}

TEST(F1, Errors) {
  std::vector<int> a{0, 1}, b{0};
  EXPECT_THROW(f1_scores(a, b), EvalError);
}

TEST(Classify, SeparableClusters) {
  Rng rng = make_rng(2);
  Matrix x(100, 2);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 0) = (y[i] ? 10.0 : -10.0) + 0.5 * (uniform01(rng) - 0.5);
    x(i, 1) = uniform01(rng) - 0.5;
  }
  auto rep = classify(x, y);
  EXPECT_EQ(rep.num_repeats, 10u);
  EXPECT_EQ(rep.at("micro_f1").mean, 1.0);
  EXPECT_EQ(rep.at("macro_f1").mean, 1.0);
}

TEST(Classify, ShuffledLabelsNearMajority) {
  Rng rng = make_rng(3);
  Matrix x = gaussian(400, 8, rng);
  std::vector<int> y(400);
  for (std::size_t i = 0; i < 400; ++i) y[i] = i < 280 ? 0 : 1;  // majority 0.7
  std::shuffle(y.begin(), y.end(), rng);
  auto rep = classify(x, y);
  EXPECT_NEAR(rep.at("micro_f1").mean, 0.7, 0.06);
}

TEST(Classify, InvariantToNodeOrder) {
  Rng rng = make_rng(4);
  Matrix x = gaussian(120, 5, rng);
  std::vector<int> y(120);
  for (std::size_t i = 0; i < 120; ++i) y[i] = static_cast<int>(i % 3);
  for (std::size_t i = 0; i < 120; ++i) x(i, 1) += 1.5 * y[i];
  std::vector<std::size_t> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix xp(120, 5);
  std::vector<int> yp(120);
  for (std::size_t i = 0; i < 120; ++i) {
    std::copy(x.row(perm[i]).begin(), x.row(perm[i]).end(), xp.row(i).begin());
    yp[i] = y[perm[i]];
  }
  ClassifyOptions opt;
  opt.repeats = 4;
  opt.seed = 9;
  auto a = classify(x, y, opt), b = classify(xp, yp, opt);
  EXPECT_EQ(a.at("micro_f1").values, b.at("micro_f1").values);
  EXPECT_EQ(a.at("macro_f1").values, b.at("macro_f1").values);
}

TEST(Classify, IgnoresUnlabeledAndChecksInputs) {
  Matrix x(6, 1, std::vector<double>{-3, -2, 2, 3, 0, -1});
  std::vector<int> y{0, 0, 1, 1, kUnlabeled, 0};
  ClassifyOptions opt;
  opt.test_frac = 0.4;
  EXPECT_NO_THROW(classify(x, y, opt));
  std::vector<int> one_class{0, 0, 0, 0, 0, 0};
  EXPECT_THROW(classify(x, one_class), EvalError);
  std::vector<int> short_labels{0, 1};
  EXPECT_THROW(classify(x, short_labels), EvalError);
}

TEST(StratifiedSplit, ProportionsPerClass) {
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = i < 70 ? 0 : 1;
  Rng rng = make_rng(5);
  Split s = stratified_split(y, 0.2, rng);
  EXPECT_EQ(s.test.size(), 20u);
  EXPECT_EQ(s.train.size(), 80u);
  std::size_t test_ones = 0;
  for (auto i : s.test) test_ones += y[i] == 1;
  EXPECT_EQ(test_ones, 6u);
}

TEST(Auc, Examples) {
  std::vector<double> p{1, 1, 1}, n{0, 0};
  EXPECT_EQ(auc(p, n), 1.0);
  EXPECT_EQ(recall_at_positives(p, n), 1.0);
  std::vector<double> p2{0.9, 0.4}, n2{0.6, 0.1};
  EXPECT_DOUBLE_EQ(auc(p2, n2), 0.75);
  EXPECT_DOUBLE_EQ(recall_at_positives(p2, n2), 0.5);
  std::vector<double> tie{0.5};
  EXPECT_DOUBLE_EQ(auc(tie, tie), 0.5);
}

TEST(Auc, MatchesBruteForceWithTies) {
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + uniform_index(rng, 30)), n(1 + uniform_index(rng, 30));
    // Coarse grid forces many ties.
    for (auto& x : p) x = static_cast<double>(uniform_index(rng, 6));
    for (auto& x : n) x = static_cast<double>(uniform_index(rng, 6));
    EXPECT_NEAR(auc(p, n), brute_auc(p, n), 1e-12);
  }
}

TEST(Auc, RandomScoresNearHalf) {
  Rng rng = make_rng(7);
  std::vector<double> p(5000), n(5000);
  for (auto& x : p) x = uniform01(rng);
  for (auto& x : n) x = uniform01(rng);
  double a = auc(p, n);
  EXPECT_GE(a, 0.47);
  EXPECT_LE(a, 0.53);
}

TEST(Recall, TiesAtCutoffUseExpectation) {
  // Top-2 cutoff falls in a tie of 1 positive and 1 negative at 0.5.
  std::vector<double> p{0.9, 0.5}, n{0.5, 0.1};
  EXPECT_DOUBLE_EQ(recall_at_positives(p, n), 0.75);
  std::vector<double> same{1.0, 1.0};
  EXPECT_DOUBLE_EQ(recall_at_positives(same, same), 0.5);
}

TEST(SplitEdges, NeverIsolatesAndHoldsOut) {
  Graph g = generate_er(200, 0.04, 3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LinkSplit s = split_edges(g, 0.1, seed);
    const auto target = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(g.num_edges())));
    EXPECT_EQ(s.positives.size(), target);
    EXPECT_EQ(s.negatives.size(), target);
    EXPECT_EQ(s.reduced.num_edges(), g.num_edges() - target);
    for (NodeId v = 0; v < g.num_nodes(); ++v)
      if (g.degree(v) > 0) {
        EXPECT_GT(s.reduced.degree(v), 0u);
      }
    for (auto [u, v] : s.positives) {
      EXPECT_TRUE(g.has_edge(u, v));
      EXPECT_FALSE(s.reduced.has_edge(u, v));
    }
    std::set<std::pair<NodeId, NodeId>> negs;
    for (auto [u, v] : s.negatives) {
      EXPECT_NE(u, v);
      EXPECT_FALSE(g.has_edge(u, v));
      EXPECT_TRUE(negs.emplace(u, v).second);
    }
  }
}

TEST(SplitEdges, TooSmallThrows) {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {1, 2}};
  Graph g = Graph::from_edges(numbered_names(3), edges);
  EXPECT_THROW(split_edges(g, 0.1, 1), EvalError);
  EXPECT_THROW(split_edges(g, 0.5, 1), EvalError);  // removing either edge isolates a leaf
}

TEST(LinkPrediction, ScoresHeldOutPairsByInnerProduct) {
  Graph g = generate_er(80, 0.1, 4);
  Rng rng = make_rng(13);
  Matrix emb = gaussian(80, 4, rng);
  std::size_t reduced_edges = 0;
  auto embed = [&](const Graph& h) {
    reduced_edges = h.num_edges();
    return emb;
  };
  auto rep = link_prediction_eval(g, embed, 0.1, 3);

  LinkSplit s = split_edges(g, 0.1, 3);
  EXPECT_EQ(reduced_edges, s.reduced.num_edges());
  std::vector<double> pos, neg;
  for (auto [u, v] : s.positives) pos.push_back(dot(emb.row(u), emb.row(v)));
  for (auto [u, v] : s.negatives) neg.push_back(dot(emb.row(u), emb.row(v)));
  EXPECT_NEAR(rep.at("auc").mean, brute_auc(pos, neg), 1e-12);

  std::vector<double> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  std::sort(all.rbegin(), all.rend());
  double cutoff = all[pos.size() - 1];
  double hits = 0;
  for (double x : pos) hits += x >= cutoff;
  EXPECT_NEAR(rep.at("recall_at_frac").mean, hits / static_cast<double>(pos.size()), 1e-12);
}

TEST(Pca, RankOneLine) {
  Rng rng = make_rng(8);
  Matrix x(50, 4);
  for (std::size_t i = 0; i < 50; ++i) {
    double t = uniform01(rng) * 10 - 5;
    x(i, 0) = t;
    x(i, 1) = t;
  }
  Matrix p = pca_2d(x);
  EXPECT_LT(column_variance(p, 1), 1e-9);
  EXPECT_GT(column_variance(p, 0), 1.0);
}

TEST(Pca, TwoDimensionalDataKeepsDistances) {
  Rng rng = make_rng(9);
  Matrix x(30, 2);
  for (std::size_t i = 0; i < 30; ++i) {
    x(i, 0) = 3.0 * (uniform01(rng) - 0.5);
    x(i, 1) = uniform01(rng) - 0.5;
  }
  Matrix p = pca_2d(x);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) {
      double dx = std::hypot(x(i, 0) - x(j, 0), x(i, 1) - x(j, 1));
      double dp = std::hypot(p(i, 0) - p(j, 0), p(i, 1) - p(j, 1));
      EXPECT_NEAR(dx, dp, 1e-9);
    }
}

TEST(Pca, VariancesNonIncreasing) {
  Rng rng = make_rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x = gaussian(60, 6, rng);
    for (std::size_t i = 0; i < 60; ++i) x(i, trial % 6) *= 3.0;
    Matrix p = pca_2d(x);
    EXPECT_GE(column_variance(p, 0), column_variance(p, 1) - 1e-12);
  }
}

TEST(Pca, RotationInvariantUpToComponentSign) {
  Rng rng = make_rng(11);
  Matrix x = gaussian(80, 5, rng);
  for (std::size_t i = 0; i < 80; ++i) {
    x(i, 0) *= 4.0;
    x(i, 1) *= 2.0;
  }
  Matrix base = pca_2d(x);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix r = random_rotation(5, rng);
    Matrix p = pca_2d(multiply(x, r));
    for (std::size_t c = 0; c < 2; ++c) {
      double sign = (base(0, c) * p(0, c) < 0) ? -1.0 : 1.0;
      for (std::size_t i = 0; i < 80; ++i) EXPECT_NEAR(p(i, c), sign * base(i, c), 1e-6);
    }
  }
}

TEST(Pca, SignRuleMakesLargestLoadingPositive) {
  // Data along -x: the loading (1, 0) must come out positive, so the point with
  // the largest x projects positive.
  Matrix x(3, 2, std::vector<double>{-1, 0, 0, 0.1, 1, 0});
  Matrix p = pca_2d(x);
  EXPECT_GT(p(2, 0), 0.0);
  EXPECT_LT(p(0, 0), 0.0);
}

TEST(Pca, Errors) {
  EXPECT_THROW(pca_2d(Matrix(5, 1, 1.0)), EvalError);
  EXPECT_THROW(pca_2d(Matrix(2, 3, 1.0)), EvalError);
  EXPECT_THROW(pca_2d(Matrix(5, 3, 1.0)), EvalError);
}

TEST(Separability, RandomEmbeddingsAreChance) {
  Graph g = generate_triad_circle(100);
  Rng rng = make_rng(12);
  double total = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    Matrix emb = gaussian(g.num_nodes(), 32, rng);
    total += circle_classification(emb, g, 100, s).at("micro_f1").mean;
  }
  EXPECT_NEAR(total / 5.0, 0.5, 0.1);
}

TEST(LogLogSlope, RecoversExponent) {
  std::vector<double> x{100, 1000, 10000}, y{0.02, 0.2, 2.0}, y2{1, 100, 10000};
  EXPECT_NEAR(loglog_slope(x, y), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope(x, y2), 2.0, 1e-12);
  std::vector<double> bad{1, -1, 2};
  EXPECT_THROW(loglog_slope(x, bad), EvalError);
}

TEST(Report, CsvAndTable) {
  EvalReport r;
  r.task = "t";
  r.num_repeats = 2;
  r.add("auc", {0.5, 0.7});
  EXPECT_NEAR(r.at("auc").mean, 0.6, 1e-15);
  EXPECT_NEAR(r.at("auc").stddev, 0.1, 1e-15);
  std::ostringstream csv;
  write_report_csv(r, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "task,metric,mean,std,repeats");
}
