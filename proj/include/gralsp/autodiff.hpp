#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gralsp/matrix.hpp"
#include "gralsp/random.hpp"

namespace gralsp {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trainable (or frozen) dense tensor: a value plus a same-shape gradient accumulator.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, bool requires_grad = true)
      : value(rows, cols), grad(rows, cols), requires_grad(requires_grad) {}
  explicit Tensor(Matrix v, bool requires_grad = true)
      : value(std::move(v)), grad(value.rows(), value.cols()), requires_grad(requires_grad) {}

  std::size_t rows() const { return value.rows(); }
  std::size_t cols() const { return value.cols(); }
  void zero_grad() { grad.fill(0.0); }

  Matrix value;
  Matrix grad;
  bool requires_grad = true;
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = std::numeric_limits<std::size_t>::max();
};

namespace ad {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(sigmoid(x)) = -softplus(-x), evaluated without overflow or underflow to -inf.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace ad

/// Append-only record of dense operations. Backward walks the record in exact
/// reverse order; parameter gradients accumulate additively into their Tensors.
/// A tape is single-use: backward() consumes it.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  const Matrix& value(Var v) const { return node(v).value; }
  double scalar(Var v) const {
    const Matrix& m = value(v);
    if (m.size() != 1) throw ShapeError("scalar(): value is " + m.shape_string());
    return m[0];
  }
  /// Gradient of the last backward pass w.r.t. a recorded value (empty if none flowed).
  const Matrix& grad(Var v) const { return node(v).grad; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }

  // -- leaves ---------------------------------------------------------------

  Var constant(Matrix m) {
    check_finite(m, "constant");
    return push(std::move(m), false, nullptr);
  }

  /// Constant made of selected rows of `src`, without copying all of `src` onto the tape.
  template <typename Index>
  Var gather_constant(const Matrix& src, std::span<const Index> rows) {
    Matrix out(rows.size(), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto r = static_cast<std::size_t>(rows[i]);
      if (r >= src.rows()) throw ShapeError("gather_constant: row index out of range");
      std::copy_n(src.row(r).begin(), src.cols(), out.row(i).begin());
    }
    return push(std::move(out), false, nullptr);
  }

  /// Leaf bound to a Tensor; gradients flow back into `t.grad` if it requires them.
  Var parameter(Tensor& t) {
    check_finite(t.value, "parameter");
    Var v = push(t.value, t.requires_grad, nullptr);
    nodes_[v.id].param = &t;
    return v;
  }

  // -- linear algebra -------------------------------------------------------

  Var matmul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols() != B.rows()) {
      throw ShapeError("matmul: " + A.shape_string() + " * " + B.shape_string());
    }
    Matrix C(A.rows(), B.cols());
    const std::size_t n = A.rows(), m = A.cols(), p = B.cols();
    for (std::size_t i = 0; i < n; ++i) {
      double* c = C.data().data() + i * p;
      for (std::size_t k = 0; k < m; ++k) {
        const double aik = A(i, k);
        if (aik == 0.0) continue;
        const double* brow = B.data().data() + k * p;
        for (std::size_t j = 0; j < p; ++j) c[j] += aik * brow[j];
      }
    }
    return record(std::move(C), {a, b}, "matmul", [a, b, n, m, p](Tape& t, const Matrix& gc) {
      if (t.requires_grad(a)) {
        const Matrix& B = t.value(b);
        Matrix& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < n; ++i) {
          const double* grow = gc.data().data() + i * p;
          for (std::size_t k = 0; k < m; ++k) {
            const double* brow = B.data().data() + k * p;
            double s = 0.0;
            for (std::size_t j = 0; j < p; ++j) s += grow[j] * brow[j];
            ga(i, k) += s;
          }
        }
      }
      if (t.requires_grad(b)) {
        const Matrix& A = t.value(a);
        Matrix& gb = t.grad_buffer(b);
        for (std::size_t i = 0; i < n; ++i) {
          const double* grow = gc.data().data() + i * p;
          for (std::size_t k = 0; k < m; ++k) {
            const double aik = A(i, k);
            if (aik == 0.0) continue;
            double* gbrow = gb.data().data() + k * p;
            for (std::size_t j = 0; j < p; ++j) gbrow[j] += aik * grow[j];
          }
        }
      }
    });
  }

  Var transpose(Var a) {
    const Matrix& A = value(a);
    Matrix T(A.cols(), A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j) T(j, i) = A(i, j);
    return record(std::move(T), {a}, "transpose", [a](Tape& t, const Matrix& g) {
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < ga.rows(); ++i)
        for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(j, i);
    });
  }

  // -- elementwise ----------------------------------------------------------

  /// a + b, where b has a's shape or is a 1 x cols row broadcast over a's rows.
  Var add(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    const bool row_bcast = !A.same_shape(B);
    if (row_bcast && !(B.rows() == 1 && B.cols() == A.cols())) {
      throw ShapeError("add: " + A.shape_string() + " + " + B.shape_string());
    }
    Matrix C = A;
    for (std::size_t i = 0; i < C.rows(); ++i)
      for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) += row_bcast ? B(0, j) : B(i, j);
    return record(std::move(C), {a, b}, "add", [a, b, row_bcast](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) {
        Matrix& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (t.requires_grad(b)) {
        Matrix& gb = t.grad_buffer(b);
        if (!row_bcast) {
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        } else {
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
        }
      }
    });
  }

  Var sub(Var a, Var b) { return add(a, negate(b)); }

  /// Elementwise a * b, where b has a's shape or is a rows x 1 column broadcast.
  Var mul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    const bool col_bcast = !A.same_shape(B);
    if (col_bcast && !(B.cols() == 1 && B.rows() == A.rows())) {
      throw ShapeError("mul: " + A.shape_string() + " * " + B.shape_string());
    }
    Matrix C = A;
    for (std::size_t i = 0; i < C.rows(); ++i)
      for (std::size_t j = 0; j < C.cols(); ++j) C(i, j) *= col_bcast ? B(i, 0) : B(i, j);
    return record(std::move(C), {a, b}, "mul", [a, b, col_bcast](Tape& t, const Matrix& g) {
      const Matrix& A = t.value(a);
      const Matrix& B = t.value(b);
      if (t.requires_grad(a)) {
        Matrix& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j) * (col_bcast ? B(i, 0) : B(i, j));
      }
      if (t.requires_grad(b)) {
        Matrix& gb = t.grad_buffer(b);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) {
            if (col_bcast) gb(i, 0) += g(i, j) * A(i, j);
            else gb(i, j) += g(i, j) * A(i, j);
          }
      }
    });
  }

  Var scale(Var a, double c) {
    Matrix C = value(a);
    for (auto& x : C.data()) x *= c;
    return record(std::move(C), {a}, "scale", [a, c](Tape& t, const Matrix& g) {
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    });
  }

  Var negate(Var a) { return scale(a, -1.0); }

  Var relu(Var a) {
    Matrix C = value(a);
    for (auto& x : C.data()) x = x > 0.0 ? x : 0.0;
    return record(std::move(C), {a}, "relu", [a](Tape& t, const Matrix& g) {
      const Matrix& A = t.value(a);
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (A[i] > 0.0) ga[i] += g[i];
    });
  }

  Var sigmoid(Var a) {
    Matrix C = value(a);
    for (auto& x : C.data()) x = ad::sigmoid(x);
    Var out = record(std::move(C), {a}, "sigmoid", nullptr);
    set_backward(out, [a, out](Tape& t, const Matrix& g) {
      const Matrix& S = t.value(out);
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * S[i] * (1.0 - S[i]);
    });
    return out;
  }

  Var log_sigmoid(Var a) {
    Matrix C = value(a);
    for (auto& x : C.data()) x = ad::log_sigmoid(x);
    return record(std::move(C), {a}, "log_sigmoid", [a](Tape& t, const Matrix& g) {
      const Matrix& A = t.value(a);
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * ad::sigmoid(-A[i]);
    });
  }

  // -- normalization and reductions ----------------------------------------

  /// Softmax over all entries of a vector (1 x n or n x 1).
  Var softmax(Var a) {
    const Matrix& A = value(a);
    if (A.rows() != 1 && A.cols() != 1) throw ShapeError("softmax: expects a vector, got " + A.shape_string());
    if (A.size() == 0) throw ShapeError("softmax: empty vector");
    std::vector<std::size_t> offsets{0, A.size()};
    return segment_softmax_impl(a, offsets);
  }

  /// Softmax within each group of rows of a column vector; group g spans
  /// rows [offsets[g], offsets[g+1]).
  Var segment_softmax(Var a, std::span<const std::size_t> offsets) {
    const Matrix& A = value(a);
    if (A.cols() != 1) throw ShapeError("segment_softmax: expects a column vector");
    check_offsets(offsets, A.rows(), "segment_softmax");
    return segment_softmax_impl(a, {offsets.begin(), offsets.end()});
  }

  /// Row-wise sum within each group of rows: output is groups x cols.
  Var segment_sum(Var a, std::span<const std::size_t> offsets) {
    return segment_reduce(a, offsets, false);
  }

  /// Row-wise mean within each group of rows; empty groups yield a zero row.
  Var segment_mean(Var a, std::span<const std::size_t> offsets) {
    return segment_reduce(a, offsets, true);
  }

  /// Embedding lookup: row i of the output is row indices[i] of a.
  /// Backward scatter-adds into the looked-up rows.
  template <typename Index>
  Var gather_rows(Var a, std::span<const Index> indices) {
    const Matrix& A = value(a);
    std::vector<std::size_t> idx(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      idx[i] = static_cast<std::size_t>(indices[i]);
      if (idx[i] >= A.rows()) throw ShapeError("gather_rows: row index out of range");
    }
    Matrix C(idx.size(), A.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) std::copy_n(A.row(idx[i]).begin(), A.cols(), C.row(i).begin());
    return record(std::move(C), {a}, "gather_rows", [a, idx = std::move(idx)](Tape& t, const Matrix& g) {
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        auto dst = ga.row(idx[i]);
        auto src = g.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      }
    });
  }

  /// Sum of gathered rows per bag: output row g = sum of a[indices[i]] for i in
  /// [offsets[g], offsets[g+1]). Equivalent to segment_sum(gather_rows(a, indices))
  /// without materializing the gathered matrix.
  template <typename Index>
  Var bag_sum(Var a, std::span<const Index> indices, std::span<const std::size_t> offsets) {
    const Matrix& A = value(a);
    check_offsets(offsets, indices.size(), "bag_sum");
    std::vector<std::size_t> idx(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      idx[i] = static_cast<std::size_t>(indices[i]);
      if (idx[i] >= A.rows()) throw ShapeError("bag_sum: row index out of range");
    }
    const std::size_t bags = offsets.size() - 1;
    Matrix C(bags, A.cols());
    for (std::size_t b = 0; b < bags; ++b) {
      auto out = C.row(b);
      for (std::size_t i = offsets[b]; i < offsets[b + 1]; ++i) {
        auto src = A.row(idx[i]);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += src[j];
      }
    }
    std::vector<std::size_t> offs(offsets.begin(), offsets.end());
    return record(std::move(C), {a}, "bag_sum",
                  [a, idx = std::move(idx), offs = std::move(offs)](Tape& t, const Matrix& g) {
                    Matrix& ga = t.grad_buffer(a);
                    for (std::size_t b = 0; b + 1 < offs.size(); ++b) {
                      auto src = g.row(b);
                      for (std::size_t i = offs[b]; i < offs[b + 1]; ++i) {
                        auto dst = ga.row(idx[i]);
                        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                      }
                    }
                  });
  }

  /// Row-by-row inner products: output is rows x 1.
  Var row_dot(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("row_dot: " + A.shape_string() + " vs " + B.shape_string());
    Matrix C(A.rows(), 1);
    for (std::size_t i = 0; i < A.rows(); ++i) C(i, 0) = gralsp::dot(A.row(i), B.row(i));
    return record(std::move(C), {a, b}, "row_dot", [a, b](Tape& t, const Matrix& g) {
      const Matrix& A = t.value(a);
      const Matrix& B = t.value(b);
      if (t.requires_grad(a)) {
        Matrix& ga = t.grad_buffer(a);
        for (std::size_t i = 0; i < A.rows(); ++i)
          for (std::size_t j = 0; j < A.cols(); ++j) ga(i, j) += g(i, 0) * B(i, j);
      }
      if (t.requires_grad(b)) {
        Matrix& gb = t.grad_buffer(b);
        for (std::size_t i = 0; i < A.rows(); ++i)
          for (std::size_t j = 0; j < A.cols(); ++j) gb(i, j) += g(i, 0) * A(i, j);
      }
    });
  }

  /// Scales each row to unit Euclidean norm; rows with norm below `floor` are divided by `floor`.
  Var row_normalize(Var a, double floor = 1e-12) {
    const Matrix& A = value(a);
    Matrix C(A.rows(), A.cols());
    std::vector<double> norms(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
      norms[i] = std::max(std::sqrt(gralsp::dot(A.row(i), A.row(i))), floor);
      for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) = A(i, j) / norms[i];
    }
    Var out = record(std::move(C), {a}, "row_normalize", nullptr);
    set_backward(out, [a, out, floor, norms = std::move(norms)](Tape& t, const Matrix& g) {
      const Matrix& Y = t.value(out);
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < Y.rows(); ++i) {
        const double proj = norms[i] > floor ? gralsp::dot(Y.row(i), g.row(i)) : 0.0;
        for (std::size_t j = 0; j < Y.cols(); ++j) ga(i, j) += (g(i, j) - Y(i, j) * proj) / norms[i];
      }
    });
    return out;
  }

  /// Full inner product of two same-shape values: 1 x 1.
  Var dot(Var a, Var b) {
    const Matrix& A = value(a);
    if (!A.same_shape(value(b))) throw ShapeError("dot: shape mismatch");
    return sum(mul(a, b));
  }

  Var sum(Var a) {
    const Matrix& A = value(a);
    Matrix C(1, 1, std::accumulate(A.data().begin(), A.data().end(), 0.0));
    return record(std::move(C), {a}, "sum", [a](Tape& t, const Matrix& g) {
      Matrix& ga = t.grad_buffer(a);
      for (auto& x : ga.data()) x += g[0];
    });
  }

  /// Mean of all entries: 1 x 1.
  Var mean(Var a) {
    const std::size_t n = value(a).size();
    if (n == 0) throw ShapeError("mean: empty value");
    return scale(sum(a), 1.0 / static_cast<double>(n));
  }

  // -- backward ---------------------------------------------------------------

  /// Propagates d(loss)/d(.) through the record and accumulates into bound Tensors.
  void backward(Var loss) {
    if (consumed_) throw std::logic_error("backward: tape already consumed");
    const Matrix& L = value(loss);
    if (L.size() != 1) throw ShapeError("backward: loss must be scalar, got " + L.shape_string());
    consumed_ = true;
    if (!node(loss).requires_grad) return;
    grad_buffer(loss)[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& nd = nodes_[i];
      if (!nd.requires_grad || nd.grad.empty()) continue;
      if (nd.backward) nd.backward(*this, nd.grad);
      if (nd.param != nullptr) {
        Matrix& pg = nd.param->grad;
        for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += nd.grad[k];
      }
    }
  }

 private:
  using Backward = std::function<void(Tape&, const Matrix&)>;

  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Tensor* param = nullptr;
    Backward backward;
  };

  const Node& node(Var v) const {
    if (v.id >= nodes_.size()) throw std::out_of_range("Tape: invalid Var");
    return nodes_[v.id];
  }

  Matrix& grad_buffer(Var v) {
    Node& nd = nodes_[v.id];
    if (nd.grad.empty() && !nd.value.empty()) nd.grad = Matrix(nd.value.rows(), nd.value.cols());
    return nd.grad;
  }

  static void check_finite(const Matrix& m, const char* op) {
    if (!m.all_finite()) throw NonFiniteError(std::string(op) + ": non-finite value");
  }

  static void check_offsets(std::span<const std::size_t> offsets, std::size_t rows, const char* op) {
    if (offsets.empty() || offsets.front() != 0 || offsets.back() != rows ||
        !std::is_sorted(offsets.begin(), offsets.end())) {
      throw ShapeError(std::string(op) + ": offsets do not partition " + std::to_string(rows) + " rows");
    }
  }

  Var push(Matrix value, bool requires_grad, Backward bw) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, nullptr, std::move(bw)});
    return Var{nodes_.size() - 1};
  }

  Var record(Matrix value, std::initializer_list<Var> inputs, const char* op, Backward bw) {
    check_finite(value, op);
    bool rg = false;
    for (Var in : inputs) rg = rg || node(in).requires_grad;
    return push(std::move(value), rg, rg ? std::move(bw) : Backward{});
  }

  void set_backward(Var v, Backward bw) {
    if (nodes_[v.id].requires_grad) nodes_[v.id].backward = std::move(bw);
  }

  Var segment_softmax_impl(Var a, std::vector<std::size_t> offsets) {
    Matrix C = value(a);
    auto& d = C.data();
    for (std::size_t g = 0; g + 1 < offsets.size(); ++g) {
      if (offsets[g] == offsets[g + 1]) continue;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = offsets[g]; i < offsets[g + 1]; ++i) mx = std::max(mx, d[i]);
      double z = 0.0;
      for (std::size_t i = offsets[g]; i < offsets[g + 1]; ++i) z += (d[i] = std::exp(d[i] - mx));
      for (std::size_t i = offsets[g]; i < offsets[g + 1]; ++i) d[i] /= z;
    }
    Var out = record(std::move(C), {a}, "softmax", nullptr);
    set_backward(out, [a, out, offsets = std::move(offsets)](Tape& t, const Matrix& g) {
      const Matrix& S = t.value(out);
      Matrix& ga = t.grad_buffer(a);
      for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
        double inner = 0.0;
        for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) inner += g[i] * S[i];
        for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) ga[i] += S[i] * (g[i] - inner);
      }
    });
    return out;
  }

  Var segment_reduce(Var a, std::span<const std::size_t> offsets, bool average) {
    const Matrix& A = value(a);
    check_offsets(offsets, A.rows(), average ? "segment_mean" : "segment_sum");
    const std::size_t groups = offsets.size() - 1;
    std::vector<double> factor(groups, 1.0);
    Matrix C(groups, A.cols());
    for (std::size_t s = 0; s < groups; ++s) {
      const std::size_t cnt = offsets[s + 1] - offsets[s];
      if (average) factor[s] = cnt == 0 ? 0.0 : 1.0 / static_cast<double>(cnt);
      auto out = C.row(s);
      for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) {
        auto src = A.row(i);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += src[j];
      }
      for (auto& x : out) x *= factor[s];
    }
    std::vector<std::size_t> offs(offsets.begin(), offsets.end());
    return record(std::move(C), {a}, average ? "segment_mean" : "segment_sum",
                  [a, offs = std::move(offs), factor = std::move(factor)](Tape& t, const Matrix& g) {
                    Matrix& ga = t.grad_buffer(a);
                    for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
                      auto src = g.row(s);
                      for (std::size_t i = offs[s]; i < offs[s + 1]; ++i) {
                        auto dst = ga.row(i);
                        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += factor[s] * src[j];
                      }
                    }
                  });
  }

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient oracle

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<double> per_tensor;  // max relative error per checked tensor
  std::size_t coordinates = 0;
};

/// Compares tape gradients against central differences
/// (f(theta + eps e) - f(theta - eps e)) / (2 eps) on a random subsample of at
/// least `coords_per_tensor` coordinates per tensor (all of them if smaller).
/// Relative error is |a - n| / max(floor, |a| + |n|); the floor keeps
/// coordinates whose gradient is below the differencing noise from dominating.
///
/// `loss_fn` records a scalar loss onto the given tape. It must be deterministic
/// in the parameter values; a mismatch on re-evaluation throws.
inline GradCheckReport finite_diff_check(const std::function<Var(Tape&)>& loss_fn,
                                         std::span<Tensor* const> params, double eps,
                                         std::size_t coords_per_tensor = 100,
                                         std::uint64_t seed = 0, double floor = 1e-8) {
  auto evaluate = [&] {
    Tape tape;
    return tape.scalar(loss_fn(tape));
  };
  for (Tensor* p : params) p->zero_grad();
  double base = 0.0;
  {
    Tape tape;
    Var loss = loss_fn(tape);
    base = tape.scalar(loss);
    tape.backward(loss);
  }
  if (evaluate() != base) throw std::runtime_error("finite_diff_check: loss function is not deterministic");

  GradCheckReport report;
  Rng rng = make_rng(seed, {0x9c4du});
  for (Tensor* p : params) {
    double worst = 0.0;
    const std::size_t n = p->value.size();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    const std::size_t take = std::min(n, coords_per_tensor);
    for (std::size_t i = 0; i < take; ++i) std::swap(coords[i], coords[i + uniform_index(rng, n - i)]);
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t c = coords[i];
      const double orig = p->value[c];
      p->value[c] = orig + eps;
      const double up = evaluate();
      p->value[c] = orig - eps;
      const double down = evaluate();
      p->value[c] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[c];
      const double rel =
          std::abs(analytic - numeric) / std::max(floor, std::abs(analytic) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
    report.coordinates += take;
    report.per_tensor.push_back(worst);
    report.max_relative_error = std::max(report.max_relative_error, worst);
  }
  return report;
}

}  // namespace gralsp
