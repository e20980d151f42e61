// SPDX-License-Identifier: Apache-2.0
#include "hetgat/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "hetgat/kernels.hpp"

namespace hetgat {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Standard softmax VJP per row: dx_j = y_j * (g_j - sum_k g_k y_k). Works
// unchanged for the masked variants because inadmissible entries carry
// y_j = 0 in hard mode and the soft-mode shift is constant in the logits.
void softmax_backward_rows(const Matrix& y, const Matrix& g, Matrix& dx) {
  for (int i = 0; i < y.rows(); ++i) {
    double dot = 0.0;
    for (int j = 0; j < y.cols(); ++j) dot += g.at(i, j) * y.at(i, j);
    for (int j = 0; j < y.cols(); ++j) {
      dx.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
    }
  }
}

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  check(v >= 0 && v < size(), "tape: bad var");
  return nodes_[static_cast<size_t>(v)];
}

Tape::Node& Tape::node(Var v) {
  check(v >= 0 && v < size(), "tape: bad var");
  return nodes_[static_cast<size_t>(v)];
}

Var Tape::push(Matrix value, bool requires_grad, const char* name,
               std::function<void(Tape&)> back) {
  ensure_finite(value, name);
  Node n;
  n.value = std::move(value);
  n.name = name;
  if (record_ && requires_grad) {
    n.requires_grad = true;
    n.adjoint = Matrix(n.value.rows(), n.value.cols());
    n.back = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return size() - 1;
}

void Tape::acc_adjoint(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  check(n.adjoint.same_shape(g), "tape: adjoint shape mismatch");
  double* dst = n.adjoint.data();
  const double* src = g.data();
  for (long k = 0; k < g.size(); ++k) dst[k] += src[k];
}

void Tape::acc_adjoint_scaled(Var v, const Matrix& g, double s) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  check(n.adjoint.same_shape(g), "tape: adjoint shape mismatch");
  double* dst = n.adjoint.data();
  const double* src = g.data();
  for (long k = 0; k < g.size(); ++k) dst[k] += s * src[k];
}

Var Tape::leaf(Matrix value, bool requires_grad, const char* name) {
  return push(std::move(value), requires_grad, name, nullptr);
}

Var Tape::constant(Matrix value, const char* name) {
  return push(std::move(value), false, name, nullptr);
}

void Tape::backward(Var objective) {
  check(record_, "tape: backward on a non-recording tape");
  const Node& obj = node(objective);
  check(obj.value.rows() == 1 && obj.value.cols() == 1,
        "tape: objective must be 1x1");
  check(obj.requires_grad, "tape: objective does not require grad");
  for (Node& n : nodes_) {
    if (n.requires_grad) {
      std::memset(n.adjoint.data(), 0, sizeof(double) * static_cast<size_t>(n.adjoint.size()));
    }
  }
  node(objective).adjoint.at(0, 0) = 1.0;
  for (int v = size() - 1; v >= 0; --v) {
    Node& n = nodes_[static_cast<size_t>(v)];
    if (n.requires_grad && n.back) {
      ++n.visits;
      n.back(*this);
    }
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& ma = value(a);
  const Matrix& mb = value(b);
  check(ma.cols() == mb.rows(), "matmul: inner dims differ");
  int m = ma.rows(), k = ma.cols(), n = mb.cols();
  Matrix out(m, n);
  kern::mm_nn(ma.data(), mb.data(), out.data(), m, k, n);
  bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg, "matmul", nullptr);
  if (rg) {
    node(v).back = [a, b, v, m, k, n](Tape& t) {
      const Matrix& g = t.adjoint(v);
      if (t.requires_grad(a)) {
        Matrix da(m, k);
        kern::mm_nt(g.data(), t.value(b).data(), da.data(), m, n, k);
        t.acc_adjoint(a, da);
      }
      if (t.requires_grad(b)) {
        Matrix db(k, n);
        kern::mm_tn(t.value(a).data(), g.data(), db.data(), k, m, n);
        t.acc_adjoint(b, db);
      }
    };
  }
  return v;
}

Var Tape::matmul_nt(Var a, Var b) {
  const Matrix& ma = value(a);
  const Matrix& mb = value(b);
  check(ma.cols() == mb.cols(), "matmul_nt: inner dims differ");
  int m = ma.rows(), k = ma.cols(), n = mb.rows();
  Matrix out(m, n);
  kern::mm_nt(ma.data(), mb.data(), out.data(), m, k, n);
  bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg, "matmul_nt", nullptr);
  if (rg) {
    node(v).back = [a, b, v, m, k, n](Tape& t) {
      const Matrix& g = t.adjoint(v);
      if (t.requires_grad(a)) {
        Matrix da(m, k);
        kern::mm_nn(g.data(), t.value(b).data(), da.data(), m, n, k);
        t.acc_adjoint(a, da);
      }
      if (t.requires_grad(b)) {
        Matrix db(n, k);
        kern::mm_tn(g.data(), t.value(a).data(), db.data(), n, m, k);
        t.acc_adjoint(b, db);
      }
    };
  }
  return v;
}

Var Tape::add(Var a, Var b) {
  const Matrix& ma = value(a);
  const Matrix& mb = value(b);
  check(ma.same_shape(mb), "add: shape mismatch");
  Matrix out = ma;
  const double* src = mb.data();
  double* dst = out.data();
  for (long i = 0; i < out.size(); ++i) dst[i] += src[i];
  bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg, "add", nullptr);
  if (rg) {
    node(v).back = [a, b, v](Tape& t) {
      t.acc_adjoint(a, t.adjoint(v));
      t.acc_adjoint(b, t.adjoint(v));
    };
  }
  return v;
}

Var Tape::add_const(Var a, double c) {
  Matrix out = value(a);
  double* dst = out.data();
  for (long i = 0; i < out.size(); ++i) dst[i] += c;
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "add_const", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) { t.acc_adjoint(a, t.adjoint(v)); };
  }
  return v;
}

Var Tape::scale(Var a, double c) {
  Matrix out = value(a);
  double* dst = out.data();
  for (long i = 0; i < out.size(); ++i) dst[i] *= c;
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "scale", nullptr);
  if (rg) {
    node(v).back = [a, v, c](Tape& t) { t.acc_adjoint_scaled(a, t.adjoint(v), c); };
  }
  return v;
}

Var Tape::mul_elem(Var a, Var b) {
  const Matrix& ma = value(a);
  const Matrix& mb = value(b);
  check(ma.same_shape(mb), "mul_elem: shape mismatch");
  Matrix out = ma;
  double* dst = out.data();
  const double* src = mb.data();
  for (long i = 0; i < out.size(); ++i) dst[i] *= src[i];
  bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg, "mul_elem", nullptr);
  if (rg) {
    node(v).back = [a, b, v](Tape& t) {
      const Matrix& g = t.adjoint(v);
      if (t.requires_grad(a)) {
        Matrix da = g;
        const double* s = t.value(b).data();
        double* d = da.data();
        for (long i = 0; i < da.size(); ++i) d[i] *= s[i];
        t.acc_adjoint(a, da);
      }
      if (t.requires_grad(b)) {
        Matrix db = g;
        const double* s = t.value(a).data();
        double* d = db.data();
        for (long i = 0; i < db.size(); ++i) d[i] *= s[i];
        t.acc_adjoint(b, db);
      }
    };
  }
  return v;
}

Var Tape::div_elem(Var a, Var b) {
  const Matrix& ma = value(a);
  const Matrix& mb = value(b);
  check(ma.same_shape(mb), "div_elem: shape mismatch");
  Matrix out = ma;
  double* dst = out.data();
  const double* src = mb.data();
  for (long i = 0; i < out.size(); ++i) dst[i] /= src[i];
  bool rg = requires_grad(a) || requires_grad(b);
  Var v = push(std::move(out), rg, "div_elem", nullptr);
  if (rg) {
    node(v).back = [a, b, v](Tape& t) {
      const Matrix& g = t.adjoint(v);
      const Matrix& vb = t.value(b);
      if (t.requires_grad(a)) {
        Matrix da = g;
        double* d = da.data();
        const double* bb = vb.data();
        for (long i = 0; i < da.size(); ++i) d[i] /= bb[i];
        t.acc_adjoint(a, da);
      }
      if (t.requires_grad(b)) {
        Matrix db = g;
        double* d = db.data();
        const double* aa = t.value(a).data();
        const double* bb = vb.data();
        for (long i = 0; i < db.size(); ++i) d[i] *= -aa[i] / (bb[i] * bb[i]);
        t.acc_adjoint(b, db);
      }
    };
  }
  return v;
}

Var Tape::leaky_relu(Var a, double slope) {
  const Matrix& ma = value(a);
  Matrix out = ma;
  double* dst = out.data();
  for (long i = 0; i < out.size(); ++i) {
    if (dst[i] <= 0.0) dst[i] *= slope;
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "leaky_relu", nullptr);
  if (rg) {
    node(v).back = [a, v, slope](Tape& t) {
      Matrix da = t.adjoint(v);
      const double* x = t.value(a).data();
      double* d = da.data();
      for (long i = 0; i < da.size(); ++i) {
        if (x[i] <= 0.0) d[i] *= slope;
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::elu(Var a) {
  const Matrix& ma = value(a);
  Matrix out = ma;
  double* dst = out.data();
  for (long i = 0; i < out.size(); ++i) {
    if (dst[i] <= 0.0) dst[i] = std::expm1(dst[i]);
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "elu", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      Matrix da = t.adjoint(v);
      const double* x = t.value(a).data();
      const double* y = t.value(v).data();
      double* d = da.data();
      for (long i = 0; i < da.size(); ++i) {
        if (x[i] <= 0.0) d[i] *= y[i] + 1.0;
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::sigmoid(Var a) {
  const Matrix& ma = value(a);
  Matrix out = ma;
  double* dst = out.data();
  for (long i = 0; i < out.size(); ++i) dst[i] = 1.0 / (1.0 + std::exp(-dst[i]));
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "sigmoid", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      Matrix da = t.adjoint(v);
      const double* y = t.value(v).data();
      double* d = da.data();
      for (long i = 0; i < da.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::activation(Var a, Activation act) {
  switch (act) {
    case Activation::Elu:
      return elu(a);
    case Activation::Sigmoid:
      return sigmoid(a);
    case Activation::Identity:
      return a;
  }
  throw std::invalid_argument("activation: bad enum");
}

Var Tape::row_softmax(Var a) {
  const Matrix& ma = value(a);
  Matrix out(ma.rows(), ma.cols());
  kern::softmax_rows(ma.data(), out.data(), ma.rows(), ma.cols());
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "row_softmax", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      const Matrix& y = t.value(v);
      Matrix da(y.rows(), y.cols());
      softmax_backward_rows(y, t.adjoint(v), da);
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::masked_softmax_rows(Var logits, const AdjacencyMatrix& adj, MaskMode mode,
                              double soft_logit, bool zero_empty_rows) {
  const Matrix& ml = value(logits);
  check(ml.rows() == adj.size() && ml.cols() == adj.size(),
        "masked_softmax_rows: logits shape must match adjacency");
  Matrix out(ml.rows(), ml.cols());
  bool ok = kern::softmax_rows_masked(ml.data(), adj.data(), out.data(), ml.rows(),
                                      ml.cols(), mode, soft_logit, zero_empty_rows);
  if (!ok) {
    throw NumericalError("masked softmax: row with no admissible entries");
  }
  bool rg = requires_grad(logits);
  Var v = push(std::move(out), rg, "masked_softmax_rows", nullptr);
  if (rg) {
    node(v).back = [logits, v](Tape& t) {
      const Matrix& y = t.value(v);
      Matrix da(y.rows(), y.cols());
      softmax_backward_rows(y, t.adjoint(v), da);
      t.acc_adjoint(logits, da);
    };
  }
  return v;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  check(!parts.empty(), "concat_rows: empty");
  int cols = value(parts[0]).cols();
  int rows = 0;
  bool rg = false;
  for (Var p : parts) {
    check(value(p).cols() == cols, "concat_rows: column mismatch");
    rows += value(p).rows();
    rg = rg || requires_grad(p);
  }
  Matrix out(rows, cols);
  int r = 0;
  for (Var p : parts) {
    const Matrix& mp = value(p);
    std::memcpy(out.data() + static_cast<size_t>(r) * cols, mp.data(),
                sizeof(double) * static_cast<size_t>(mp.size()));
    r += mp.rows();
  }
  Var v = push(std::move(out), rg, "concat_rows", nullptr);
  if (rg) {
    std::vector<Var> ps = parts;
    node(v).back = [ps, v, cols](Tape& t) {
      const Matrix& g = t.adjoint(v);
      int r0 = 0;
      for (Var p : ps) {
        int nr = t.value(p).rows();
        if (t.requires_grad(p)) {
          Matrix gp(nr, cols);
          std::memcpy(gp.data(), g.data() + static_cast<size_t>(r0) * cols,
                      sizeof(double) * static_cast<size_t>(gp.size()));
          t.acc_adjoint(p, gp);
        }
        r0 += nr;
      }
    };
  }
  return v;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  check(!parts.empty(), "concat_cols: empty");
  int rows = value(parts[0]).rows();
  int cols = 0;
  bool rg = false;
  for (Var p : parts) {
    check(value(p).rows() == rows, "concat_cols: row mismatch");
    cols += value(p).cols();
    rg = rg || requires_grad(p);
  }
  Matrix out(rows, cols);
  int c = 0;
  for (Var p : parts) {
    const Matrix& mp = value(p);
    for (int i = 0; i < rows; ++i) {
      std::memcpy(out.data() + static_cast<size_t>(i) * cols + c,
                  mp.data() + static_cast<size_t>(i) * mp.cols(),
                  sizeof(double) * static_cast<size_t>(mp.cols()));
    }
    c += mp.cols();
  }
  Var v = push(std::move(out), rg, "concat_cols", nullptr);
  if (rg) {
    std::vector<Var> ps = parts;
    node(v).back = [ps, v, rows, cols](Tape& t) {
      const Matrix& g = t.adjoint(v);
      int c0 = 0;
      for (Var p : ps) {
        int nc = t.value(p).cols();
        if (t.requires_grad(p)) {
          Matrix gp(rows, nc);
          for (int i = 0; i < rows; ++i) {
            std::memcpy(gp.data() + static_cast<size_t>(i) * nc,
                        g.data() + static_cast<size_t>(i) * cols + c0,
                        sizeof(double) * static_cast<size_t>(nc));
          }
          t.acc_adjoint(p, gp);
        }
        c0 += nc;
      }
    };
  }
  return v;
}

Var Tape::slice_rows(Var a, int row0, int nrows) {
  const Matrix& ma = value(a);
  check(row0 >= 0 && nrows >= 0 && row0 + nrows <= ma.rows(), "slice_rows: range");
  int cols = ma.cols();
  Matrix out(nrows, cols);
  std::memcpy(out.data(), ma.data() + static_cast<size_t>(row0) * cols,
              sizeof(double) * static_cast<size_t>(out.size()));
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "slice_rows", nullptr);
  if (rg) {
    node(v).back = [a, v, row0, nrows, cols](Tape& t) {
      const Matrix& src = t.value(a);
      Matrix da(src.rows(), src.cols());
      std::memcpy(da.data() + static_cast<size_t>(row0) * cols, t.adjoint(v).data(),
                  sizeof(double) * static_cast<size_t>(nrows) * cols);
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::slice_cols(Var a, int col0, int ncols) {
  const Matrix& ma = value(a);
  check(col0 >= 0 && ncols >= 0 && col0 + ncols <= ma.cols(), "slice_cols: range");
  int rows = ma.rows();
  Matrix out(rows, ncols);
  for (int i = 0; i < rows; ++i) {
    std::memcpy(out.data() + static_cast<size_t>(i) * ncols,
                ma.data() + static_cast<size_t>(i) * ma.cols() + col0,
                sizeof(double) * static_cast<size_t>(ncols));
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "slice_cols", nullptr);
  if (rg) {
    node(v).back = [a, v, col0, ncols, rows](Tape& t) {
      const Matrix& src = t.value(a);
      const Matrix& g = t.adjoint(v);
      Matrix da(src.rows(), src.cols());
      for (int i = 0; i < rows; ++i) {
        std::memcpy(da.data() + static_cast<size_t>(i) * src.cols() + col0,
                    g.data() + static_cast<size_t>(i) * ncols,
                    sizeof(double) * static_cast<size_t>(ncols));
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::reshape(Var a, int rows, int cols) {
  const Matrix& ma = value(a);
  check(static_cast<long>(rows) * cols == ma.size(), "reshape: element count");
  Matrix out(rows, cols);
  std::memcpy(out.data(), ma.data(), sizeof(double) * static_cast<size_t>(ma.size()));
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "reshape", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      const Matrix& src = t.value(a);
      const Matrix& g = t.adjoint(v);
      Matrix da(src.rows(), src.cols());
      std::memcpy(da.data(), g.data(), sizeof(double) * static_cast<size_t>(g.size()));
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::row_scale_const(Var a, std::vector<double> factors) {
  const Matrix& ma = value(a);
  check(static_cast<int>(factors.size()) == ma.rows(), "row_scale_const: factor count");
  Matrix out = ma;
  for (int i = 0; i < out.rows(); ++i) {
    double f = factors[static_cast<size_t>(i)];
    for (int j = 0; j < out.cols(); ++j) out.at(i, j) *= f;
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "row_scale_const", nullptr);
  if (rg) {
    node(v).back = [a, v, fs = std::move(factors)](Tape& t) {
      Matrix da = t.adjoint(v);
      for (int i = 0; i < da.rows(); ++i) {
        double f = fs[static_cast<size_t>(i)];
        for (int j = 0; j < da.cols(); ++j) da.at(i, j) *= f;
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::broadcast_col(Var a, int ncols) {
  const Matrix& ma = value(a);
  check(ma.cols() == 1, "broadcast_col: input must be a column");
  Matrix out(ma.rows(), ncols);
  for (int i = 0; i < ma.rows(); ++i) {
    double x = ma.at(i, 0);
    for (int j = 0; j < ncols; ++j) out.at(i, j) = x;
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "broadcast_col", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      const Matrix& g = t.adjoint(v);
      Matrix da(g.rows(), 1);
      for (int i = 0; i < g.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < g.cols(); ++j) s += g.at(i, j);
        da.at(i, 0) = s;
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::broadcast_rows(Var a, int nrows) {
  const Matrix& ma = value(a);
  check(ma.rows() == 1, "broadcast_rows: input must be a row");
  Matrix out(nrows, ma.cols());
  for (int i = 0; i < nrows; ++i) {
    std::memcpy(out.data() + static_cast<size_t>(i) * ma.cols(), ma.data(),
                sizeof(double) * static_cast<size_t>(ma.cols()));
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "broadcast_rows", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      const Matrix& g = t.adjoint(v);
      Matrix da(1, g.cols());
      for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) da.at(0, j) += g.at(i, j);
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::col_sums(Var a) {
  const Matrix& ma = value(a);
  Matrix out(1, ma.cols());
  for (int i = 0; i < ma.rows(); ++i) {
    for (int j = 0; j < ma.cols(); ++j) out.at(0, j) += ma.at(i, j);
  }
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "col_sums", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      const Matrix& src = t.value(a);
      const Matrix& g = t.adjoint(v);
      Matrix da(src.rows(), src.cols());
      for (int i = 0; i < da.rows(); ++i) {
        for (int j = 0; j < da.cols(); ++j) da.at(i, j) = g.at(0, j);
      }
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::sum_all(Var a) {
  const Matrix& ma = value(a);
  double s = 0.0;
  const double* p = ma.data();
  for (long i = 0; i < ma.size(); ++i) s += p[i];
  Matrix out(1, 1);
  out.at(0, 0) = s;
  bool rg = requires_grad(a);
  Var v = push(std::move(out), rg, "sum_all", nullptr);
  if (rg) {
    node(v).back = [a, v](Tape& t) {
      const Matrix& src = t.value(a);
      double g = t.adjoint(v).at(0, 0);
      Matrix da = Matrix::filled(src.rows(), src.cols(), g);
      t.acc_adjoint(a, da);
    };
  }
  return v;
}

Var Tape::mean_all(Var a) {
  const Matrix& ma = value(a);
  long n = ma.size();
  check(n > 0, "mean_all: empty");
  Var s = sum_all(a);
  return scale(s, 1.0 / static_cast<double>(n));
}

}  // namespace hetgat
