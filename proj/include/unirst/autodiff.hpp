#pragma once

// Reverse-mode differentiation over dense row-major double matrices.
//
// A Tape records every operation of one forward pass. Nodes that depend on a
// trainable Parameter carry a backward closure; Tape::backward runs them in
// reverse order and accumulates into Parameter::grad.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "unirst/error.hpp"

namespace unirst {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  static Matrix row(std::vector<double> v) {
    Matrix m;
    m.rows = 1;
    m.cols = static_cast<int>(v.size());
    m.data = std::move(v);
    return m;
  }

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r * cols + c)]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r * cols + c)]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Matrix&) const = default;
};

struct Parameter {
  Matrix value;
  Matrix grad;

  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), grad(value.rows, value.cols) {}
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// Named parameters in a stable (lexicographic) order.
using ParameterStore = std::map<std::string, Parameter>;

struct Var {
  int id = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  // Without gradients no closures are recorded; used for inference.
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  Var constant(Matrix m) { return push(std::move(m), false, nullptr); }

  Var param(Parameter& p) {
    Node n;
    n.external = &p.value;
    n.needs_grad = grad_enabled_;
    n.param = grad_enabled_ ? &p : nullptr;
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  const Matrix& value(Var v) const { return value(v.id); }
  const Matrix& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external ? *n.external : n.value;
  }
  double scalar(Var v) const {
    const Matrix& m = value(v);
    if (m.size() != 1) throw InvariantError("scalar() on a non-scalar node");
    return m.data[0];
  }
  bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient buffer of node `id`, allocated on first use.
  Matrix& grad(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) {
      const Matrix& v = n.external ? *n.external : n.value;
      n.grad = Matrix(v.rows, v.cols);
    }
    return n.grad;
  }
  const Matrix& grad(Var v) { return grad(v.id); }

  // Records a result. `inputs` decide whether the node needs a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    bool ng = false;
    if (grad_enabled_)
      for (Var in : inputs) ng = ng || needs_grad(in);
    return push(std::move(value), ng, ng ? std::move(backward) : Backward{});
  }
  Var record(Matrix value, const std::vector<Var>& inputs, Backward backward) {
    bool ng = false;
    if (grad_enabled_)
      for (Var in : inputs) ng = ng || needs_grad(in);
    return push(std::move(value), ng, ng ? std::move(backward) : Backward{});
  }

  // Seeds d(loss)/d(loss) = 1 and propagates to all parameters.
  void backward(Var loss) {
    if (value(loss).size() != 1) throw InvariantError("backward() needs a scalar loss");
    if (!needs_grad(loss)) return;
    grad(loss.id).data[0] += 1.0;
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.needs_grad || n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param) {
        auto& pg = n.param->grad.data;
        for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad.data[k];
      }
    }
  }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    bool needs_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };

  Var push(Matrix m, bool needs_grad, Backward bw) {
    Node n;
    n.value = std::move(m);
    n.needs_grad = needs_grad;
    n.backward = std::move(bw);
    nodes_.push_back(std::move(n));
    return {static_cast<int>(nodes_.size()) - 1};
  }

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

namespace ops {

inline void require(bool ok, const char* what) {
  if (!ok) throw InvariantError(std::string("shape mismatch in ") + what);
}

inline Var matmul(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  require(A.cols == B.rows, "matmul");
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      const double aik = A(i, k);
      if (aik == 0.0) continue;
      const double* brow = &B.data[static_cast<std::size_t>(k * B.cols)];
      double* crow = &C.data[static_cast<std::size_t>(i * C.cols)];
      for (int j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
    }
  return t.record(std::move(C), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& A = t.value(a);
    const Matrix& B = t.value(b);
    if (t.needs_grad(a)) {
      Matrix& GA = t.grad(a.id);
      for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < B.cols; ++j) {
          const double g = G(i, j);
          if (g == 0.0) continue;
          for (int k = 0; k < A.cols; ++k) GA(i, k) += g * B(k, j);
        }
    }
    if (t.needs_grad(b)) {
      Matrix& GB = t.grad(b.id);
      for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
          const double aik = A(i, k);
          if (aik == 0.0) continue;
          for (int j = 0; j < B.cols; ++j) GB(k, j) += aik * G(i, j);
        }
    }
  });
}

// a + b, where b may be a single row broadcast over a's rows.
inline Var add(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  const bool bcast = B.rows == 1 && A.rows != 1;
  require(A.cols == B.cols && (bcast || A.rows == B.rows), "add");
  Matrix C = A;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C(i, j) += B(bcast ? 0 : i, j);
  return t.record(std::move(C), {a, b}, [a, b, bcast](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    if (t.needs_grad(a)) {
      Matrix& GA = t.grad(a.id);
      for (std::size_t k = 0; k < G.size(); ++k) GA.data[k] += G.data[k];
    }
    if (t.needs_grad(b)) {
      Matrix& GB = t.grad(b.id);
      for (int i = 0; i < G.rows; ++i)
        for (int j = 0; j < G.cols; ++j) GB(bcast ? 0 : i, j) += G(i, j);
    }
  });
}

inline Var sub(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  require(A.same_shape(B), "sub");
  Matrix C = A;
  for (std::size_t k = 0; k < C.size(); ++k) C.data[k] -= B.data[k];
  return t.record(std::move(C), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    if (t.needs_grad(a)) {
      Matrix& GA = t.grad(a.id);
      for (std::size_t k = 0; k < G.size(); ++k) GA.data[k] += G.data[k];
    }
    if (t.needs_grad(b)) {
      Matrix& GB = t.grad(b.id);
      for (std::size_t k = 0; k < G.size(); ++k) GB.data[k] -= G.data[k];
    }
  });
}

inline Var hadamard(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  require(A.same_shape(B), "hadamard");
  Matrix C = A;
  for (std::size_t k = 0; k < C.size(); ++k) C.data[k] *= B.data[k];
  return t.record(std::move(C), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    if (t.needs_grad(a)) {
      Matrix& GA = t.grad(a.id);
      const Matrix& B = t.value(b);
      for (std::size_t k = 0; k < G.size(); ++k) GA.data[k] += G.data[k] * B.data[k];
    }
    if (t.needs_grad(b)) {
      Matrix& GB = t.grad(b.id);
      const Matrix& A = t.value(a);
      for (std::size_t k = 0; k < G.size(); ++k) GB.data[k] += G.data[k] * A.data[k];
    }
  });
}

inline Var scale(Tape& t, Var a, double s) {
  Matrix C = t.value(a);
  for (double& x : C.data) x *= s;
  return t.record(std::move(C), {a}, [a, s](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    Matrix& GA = t.grad(a.id);
    for (std::size_t k = 0; k < G.size(); ++k) GA.data[k] += s * G.data[k];
  });
}

// a + c elementwise for a constant matrix c (same shape or a broadcast row).
inline Var add_const(Tape& t, Var a, const Matrix& c) { return add(t, a, t.constant(c)); }

// Elementwise map f with derivative expressed through the output y = f(x).
template <typename F, typename DyFromY>
Var unary_from_output(Tape& t, Var a, F f, DyFromY dy) {
  Matrix Y = t.value(a);
  for (double& x : Y.data) x = f(x);
  return t.record(std::move(Y), {a}, [a, dy](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& Y = t.value(self);
    Matrix& GA = t.grad(a.id);
    for (std::size_t k = 0; k < G.size(); ++k) GA.data[k] += G.data[k] * dy(Y.data[k]);
  });
}

inline Var tanh(Tape& t, Var a) {
  return unary_from_output(t, a, [](double x) { return std::tanh(x); },
                           [](double y) { return 1.0 - y * y; });
}

inline Var sigmoid(Tape& t, Var a) {
  return unary_from_output(
      t, a, [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double y) { return y * (1.0 - y); });
}

inline Var exp(Tape& t, Var a) {
  return unary_from_output(t, a, [](double x) { return std::exp(x); }, [](double y) { return y; });
}

inline Var log(Tape& t, Var a) {
  Matrix Y = t.value(a);
  for (double& x : Y.data) {
    if (!(x > 0)) throw InvariantError("log of a non-positive value");
    x = std::log(x);
  }
  return t.record(std::move(Y), {a}, [a](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& X = t.value(a);
    Matrix& GA = t.grad(a.id);
    for (std::size_t k = 0; k < G.size(); ++k) GA.data[k] += G.data[k] / X.data[k];
  });
}

namespace detail {
inline double row_max(const Matrix& m, int r) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols; ++j) mx = std::max(mx, m(r, j));
  return mx;
}
}  // namespace detail

// Row-wise log-sum-exp: rows x 1.
inline Var logsumexp(Tape& t, Var a) {
  const Matrix& A = t.value(a);
  Matrix Y(A.rows, 1);
  for (int i = 0; i < A.rows; ++i) {
    const double mx = detail::row_max(A, i);
    double s = 0;
    for (int j = 0; j < A.cols; ++j) s += std::exp(A(i, j) - mx);
    Y(i, 0) = mx + std::log(s);
  }
  return t.record(std::move(Y), {a}, [a](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& A = t.value(a);
    const Matrix& Y = t.value(self);
    Matrix& GA = t.grad(a.id);
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < A.cols; ++j) GA(i, j) += G(i, 0) * std::exp(A(i, j) - Y(i, 0));
  });
}

// Row-wise softmax.
inline Var softmax(Tape& t, Var a) {
  const Matrix& A = t.value(a);
  Matrix Y(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i) {
    const double mx = detail::row_max(A, i);
    double s = 0;
    for (int j = 0; j < A.cols; ++j) s += (Y(i, j) = std::exp(A(i, j) - mx));
    for (int j = 0; j < A.cols; ++j) Y(i, j) /= s;
  }
  return t.record(std::move(Y), {a}, [a](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& Y = t.value(self);
    Matrix& GA = t.grad(a.id);
    for (int i = 0; i < Y.rows; ++i) {
      double dot = 0;
      for (int j = 0; j < Y.cols; ++j) dot += G(i, j) * Y(i, j);
      for (int j = 0; j < Y.cols; ++j) GA(i, j) += Y(i, j) * (G(i, j) - dot);
    }
  });
}

// Row-wise log-softmax.
inline Var log_softmax(Tape& t, Var a) {
  const Matrix& A = t.value(a);
  Matrix Y(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i) {
    const double mx = detail::row_max(A, i);
    double s = 0;
    for (int j = 0; j < A.cols; ++j) s += std::exp(A(i, j) - mx);
    const double lse = mx + std::log(s);
    for (int j = 0; j < A.cols; ++j) Y(i, j) = A(i, j) - lse;
  }
  return t.record(std::move(Y), {a}, [a](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& Y = t.value(self);
    Matrix& GA = t.grad(a.id);
    for (int i = 0; i < Y.rows; ++i) {
      double gs = 0;
      for (int j = 0; j < Y.cols; ++j) gs += G(i, j);
      for (int j = 0; j < Y.cols; ++j) GA(i, j) += G(i, j) - std::exp(Y(i, j)) * gs;
    }
  });
}

inline Var transpose(Tape& t, Var a) {
  const Matrix& A = t.value(a);
  Matrix Y(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) Y(j, i) = A(i, j);
  return t.record(std::move(Y), {a}, [a](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    Matrix& GA = t.grad(a.id);
    for (int i = 0; i < GA.rows; ++i)
      for (int j = 0; j < GA.cols; ++j) GA(i, j) += G(j, i);
  });
}

inline Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols");
  const int rows = t.value(parts[0]).rows;
  int cols = 0;
  for (Var p : parts) {
    require(t.value(p).rows == rows, "concat_cols");
    cols += t.value(p).cols;
  }
  Matrix Y(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const Matrix& P = t.value(p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < P.cols; ++j) Y(i, off + j) = P(i, j);
    off += P.cols;
  }
  return t.record(std::move(Y), parts, [parts](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    int off = 0;
    for (Var p : parts) {
      const int pc = t.value(p).cols;
      if (t.needs_grad(p)) {
        Matrix& GP = t.grad(p.id);
        for (int i = 0; i < GP.rows; ++i)
          for (int j = 0; j < pc; ++j) GP(i, j) += G(i, off + j);
      }
      off += pc;
    }
  });
}

inline Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows");
  const int cols = t.value(parts[0]).cols;
  int rows = 0;
  for (Var p : parts) {
    require(t.value(p).cols == cols, "concat_rows");
    rows += t.value(p).rows;
  }
  Matrix Y(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& P = t.value(p);
    std::copy(P.data.begin(), P.data.end(), Y.data.begin() + static_cast<long>(off));
    off += P.size();
  }
  return t.record(std::move(Y), parts, [parts](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    std::size_t off = 0;
    for (Var p : parts) {
      const std::size_t n = t.value(p).size();
      if (t.needs_grad(p)) {
        Matrix& GP = t.grad(p.id);
        for (std::size_t k = 0; k < n; ++k) GP.data[k] += G.data[off + k];
      }
      off += n;
    }
  });
}

inline Var slice_rows(Tape& t, Var a, int begin, int count) {
  const Matrix& A = t.value(a);
  require(begin >= 0 && count >= 0 && begin + count <= A.rows, "slice_rows");
  Matrix Y(count, A.cols);
  std::copy(A.data.begin() + static_cast<long>(begin) * A.cols,
            A.data.begin() + static_cast<long>(begin + count) * A.cols, Y.data.begin());
  return t.record(std::move(Y), {a}, [a, begin](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    Matrix& GA = t.grad(a.id);
    const std::size_t off = static_cast<std::size_t>(begin) * static_cast<std::size_t>(GA.cols);
    for (std::size_t k = 0; k < G.size(); ++k) GA.data[off + k] += G.data[k];
  });
}

inline Var slice_cols(Tape& t, Var a, int begin, int count) {
  const Matrix& A = t.value(a);
  require(begin >= 0 && count >= 0 && begin + count <= A.cols, "slice_cols");
  Matrix Y(A.rows, count);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < count; ++j) Y(i, j) = A(i, begin + j);
  return t.record(std::move(Y), {a}, [a, begin](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    Matrix& GA = t.grad(a.id);
    for (int i = 0; i < G.rows; ++i)
      for (int j = 0; j < G.cols; ++j) GA(i, begin + j) += G(i, j);
  });
}

inline Var pick(Tape& t, Var a, int r, int c) {
  const Matrix& A = t.value(a);
  require(r >= 0 && r < A.rows && c >= 0 && c < A.cols, "pick");
  return t.record(Matrix(1, 1, A(r, c)), {a}, [a, r, c](Tape& t, int self) {
    t.grad(a.id)(r, c) += t.grad(self).data[0];
  });
}

inline Var sum(Tape& t, Var a) {
  double s = 0;
  for (double x : t.value(a).data) s += x;
  return t.record(Matrix(1, 1, s), {a}, [a](Tape& t, int self) {
    const double g = t.grad(self).data[0];
    for (double& x : t.grad(a.id).data) x += g;
  });
}

// Column means: 1 x cols.
inline Var mean_rows(Tape& t, Var a) {
  const Matrix& A = t.value(a);
  require(A.rows > 0, "mean_rows");
  Matrix Y(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) Y(0, j) += A(i, j);
  for (double& x : Y.data) x /= A.rows;
  return t.record(std::move(Y), {a}, [a](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    Matrix& GA = t.grad(a.id);
    const double inv = 1.0 / GA.rows;
    for (int i = 0; i < GA.rows; ++i)
      for (int j = 0; j < GA.cols; ++j) GA(i, j) += G(0, j) * inv;
  });
}

// Flattened outer product of two rows: out[i * n + j] = a[i] * b[j].
inline Var outer_flat(Tape& t, Var a, Var b) {
  const Matrix& A = t.value(a);
  const Matrix& B = t.value(b);
  require(A.rows == 1 && B.rows == 1, "outer_flat");
  Matrix Y(1, A.cols * B.cols);
  for (int i = 0; i < A.cols; ++i)
    for (int j = 0; j < B.cols; ++j) Y(0, i * B.cols + j) = A(0, i) * B(0, j);
  return t.record(std::move(Y), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& A = t.value(a);
    const Matrix& B = t.value(b);
    const int n = B.cols;
    if (t.needs_grad(a)) {
      Matrix& GA = t.grad(a.id);
      for (int i = 0; i < A.cols; ++i)
        for (int j = 0; j < n; ++j) GA(0, i) += G(0, i * n + j) * B(0, j);
    }
    if (t.needs_grad(b)) {
      Matrix& GB = t.grad(b.id);
      for (int i = 0; i < A.cols; ++i)
        for (int j = 0; j < n; ++j) GB(0, j) += G(0, i * n + j) * A(0, i);
    }
  });
}

// Rows of a parameter table selected by index (embedding lookup).
inline Var gather_rows(Tape& t, Parameter& table, const std::vector<int>& idx) {
  const Matrix& E = table.value;
  Matrix Y(static_cast<int>(idx.size()), E.cols);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    require(idx[r] >= 0 && idx[r] < E.rows, "gather_rows");
    std::copy(E.data.begin() + static_cast<long>(idx[r]) * E.cols,
              E.data.begin() + static_cast<long>(idx[r] + 1) * E.cols,
              Y.data.begin() + static_cast<long>(r) * E.cols);
  }
  Var table_var = t.param(table);
  return t.record(std::move(Y), {table_var}, [table_var, idx](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    Matrix& GT = t.grad(table_var.id);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (int j = 0; j < G.cols; ++j) GT(idx[r], j) += G(static_cast<int>(r), j);
  });
}

}  // namespace ops

// Central finite differences of a scalar function over every entry of the
// given parameters, compared with the analytic gradient. Returns the largest
// relative error |a - n| / max(|a|, |n|, floor).
struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst;
  std::size_t checked = 0;
};

inline GradCheckResult grad_check(const std::function<Var(Tape&)>& loss,
                                  std::vector<std::pair<std::string, Parameter*>> params,
                                  double h = 1e-5, double floor = 1e-6,
                                  std::size_t max_entries_per_param = 0) {
  for (auto& [n, p] : params) p->zero_grad();
  {
    Tape t;
    t.backward(loss(t));
  }
  GradCheckResult r;
  for (auto& [name, p] : params) {
    const std::size_t n = p->value.size();
    std::size_t stride = 1;
    if (max_entries_per_param && n > max_entries_per_param) stride = n / max_entries_per_param;
    for (std::size_t k = 0; k < n; k += stride) {
      const double orig = p->value.data[k];
      p->value.data[k] = orig + h;
      Tape tp(false);
      const double fp = tp.scalar(loss(tp));
      p->value.data[k] = orig - h;
      Tape tm(false);
      const double fm = tm.scalar(loss(tm));
      p->value.data[k] = orig;
      const double numeric = (fp - fm) / (2 * h);
      const double analytic = p->grad.data[k];
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      ++r.checked;
      if (rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst = name + "[" + std::to_string(k) + "] analytic=" + std::to_string(analytic) +
                  " numeric=" + std::to_string(numeric);
      }
    }
  }
  return r;
}

}  // namespace unirst
