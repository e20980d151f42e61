// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hetgat/common.hpp"
#include "hetgat/graph.hpp"
#include "hetgat/matrix.hpp"

namespace hetgat {

// Handle into a Tape. Plain index, cheap to copy, valid for the lifetime of
// the tape that produced it.
using Var = int;

// Reverse-mode autodiff over matrix-valued expressions. Every operation
// appends one node holding its result; backward() walks the node list in
// reverse and applies each node's vector-Jacobian closure exactly once, so
// shared subexpressions accumulate correctly without any graph bookkeeping.
//
// Constructed with record_grads = false the tape skips closure and adjoint
// allocation entirely, which keeps repeated forward evaluations (finite
// differences, inference) cheap. backward() is unavailable in that mode.
class Tape {
 public:
  explicit Tape(bool record_grads = true) : record_(record_grads) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  Var leaf(Matrix value, bool requires_grad = true, const char* name = "leaf");
  Var constant(Matrix value, const char* name = "const");

  const Matrix& value(Var v) const { return node(v).value; }
  // Zero-shaped for nodes that do not require grad.
  const Matrix& adjoint(Var v) const { return node(v).adjoint; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  long backward_visits(Var v) const { return node(v).visits; }

  // Seeds the scalar objective with adjoint 1 and propagates. All adjoints
  // are cleared first, so calling it again recomputes rather than doubles.
  void backward(Var objective);

  Var matmul(Var a, Var b);     // [m,k]x[k,n]
  Var matmul_nt(Var a, Var b);  // [m,k]x[n,k]^T
  Var add(Var a, Var b);
  Var add_const(Var a, double c);
  Var scale(Var a, double c);
  Var mul_elem(Var a, Var b);
  Var div_elem(Var a, Var b);
  Var leaky_relu(Var a, double slope);
  Var elu(Var a);
  Var sigmoid(Var a);
  Var activation(Var a, Activation act);
  Var row_softmax(Var a);
  // Row-wise softmax restricted by an adjacency matrix: entry (i, j) of the
  // output is the weight of source j in row i. Hard mode renormalizes over
  // admissible entries only; soft mode adds soft_logit to inadmissible
  // logits before a full softmax. A row with no admissible entry is emitted
  // as all zeros when zero_empty_rows is set and raises otherwise.
  Var masked_softmax_rows(Var logits, const AdjacencyMatrix& adj, MaskMode mode,
                          double soft_logit, bool zero_empty_rows);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var slice_rows(Var a, int row0, int nrows);
  Var slice_cols(Var a, int col0, int ncols);
  Var reshape(Var a, int rows, int cols);
  // Multiplies row i by factors[i]. Zero entries drop rows from the forward
  // pass and block their gradient, which is how missing inputs are blanked.
  Var row_scale_const(Var a, std::vector<double> factors);
  Var broadcast_col(Var a, int ncols);   // [n,1] -> [n,ncols]
  Var broadcast_rows(Var a, int nrows);  // [1,c] -> [nrows,c]
  Var col_sums(Var a);                   // [r,c] -> [1,c]
  Var sum_all(Var a);                    // [r,c] -> [1,1]
  Var mean_all(Var a);                   // [r,c] -> [1,1]

 private:
  struct Node {
    Matrix value;
    Matrix adjoint;
    bool requires_grad = false;
    long visits = 0;
    const char* name = "";
    std::function<void(Tape&)> back;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  Var push(Matrix value, bool requires_grad, const char* name,
           std::function<void(Tape&)> back);
  // Accumulates into v's adjoint when v requires grad, otherwise no-op.
  void acc_adjoint(Var v, const Matrix& g);
  void acc_adjoint_scaled(Var v, const Matrix& g, double s);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace hetgat
