// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "doctest.h"
#include "hetgat/gradcheck.hpp"
#include "hetgat/graph.hpp"
#include "hetgat/matrix.hpp"
#include "hetgat/rng.hpp"
#include "hetgat/tape.hpp"

using namespace hetgat;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m.at(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

// Weighted-sum objective makes every output entry visible to the scalar
// without the weights collapsing symmetric errors.
Var weighted_sum(Tape& t, Var out, Rng& rng) {
  const Matrix& v = t.value(out);
  Var w = t.constant(random_matrix(rng, v.rows(), v.cols(), 2.0));
  return t.sum_all(t.mul_elem(out, w));
}

void check_unary_op(const std::function<Var(Tape&, Var)>& op, int rows, int cols,
                    unsigned long seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix x = random_matrix(rng, rows, cols, scale);
  GradCheckReport report = finite_difference_check(
      {x}, {"x"},
      [&](Tape& t, const std::vector<Var>& params) {
        // Reseeded per call so every forward evaluation sees identical weights.
        Rng wrng(seed + 1000);
        return weighted_sum(t, op(t, params[0]), wrng);
      });
  CHECK(report.max_rel_err < 1e-6);
}

}  // namespace

TEST_SUITE("tape") {

TEST_CASE("matmul forward and gradient of sum equals ones times transpose") {
  Rng rng(21);
  Matrix a = random_matrix(rng, 3, 4);
  Matrix b = random_matrix(rng, 4, 2);

  Tape t;
  Var va = t.leaf(a);
  Var vb = t.leaf(b, false);
  Var prod = t.matmul(va, vb);
  Var obj = t.sum_all(prod);
  t.backward(obj);

  // d(sum(A B))/dA = ones(3,2) . B^T
  Matrix want(3, 4);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 4; ++k) {
      double s = 0.0;
      for (int j = 0; j < 2; ++j) s += b.at(k, j);
      want.at(i, k) = s;
    }
  }
  CHECK(max_abs_diff(t.adjoint(va), want) < 1e-12);

  GradCheckReport report = finite_difference_check(
      {a}, {"a"}, [&](Tape& tt, const std::vector<Var>& params) {
        return tt.sum_all(tt.matmul(params[0], tt.constant(b)));
      });
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("leaky relu maps a hand case and keeps the negative slope at zero") {
  Matrix x(1, 3);
  x.at(0, 0) = -1.0;
  x.at(0, 1) = 2.0;
  x.at(0, 2) = 0.0;
  Tape t;
  Var v = t.leaf(x);
  Var y = t.leaky_relu(v, 0.2);
  CHECK(t.value(y).at(0, 0) == doctest::Approx(-0.2));
  CHECK(t.value(y).at(0, 1) == doctest::Approx(2.0));
  CHECK(t.value(y).at(0, 2) == 0.0);

  t.backward(t.sum_all(y));
  CHECK(t.adjoint(v).at(0, 0) == doctest::Approx(0.2));
  CHECK(t.adjoint(v).at(0, 1) == doctest::Approx(1.0));
  // Subgradient at exactly zero takes the negative branch.
  CHECK(t.adjoint(v).at(0, 2) == doctest::Approx(0.2));
}

TEST_CASE("elementwise and structural ops pass finite differences") {
  check_unary_op([](Tape& t, Var v) { return t.scale(t.add_const(v, 0.7), -1.3); }, 3, 5, 31);
  check_unary_op([](Tape& t, Var v) { return t.elu(v); }, 4, 4, 32, 2.0);
  check_unary_op([](Tape& t, Var v) { return t.sigmoid(v); }, 4, 4, 33, 3.0);
  check_unary_op([](Tape& t, Var v) { return t.row_softmax(v); }, 3, 6, 34, 4.0);
  check_unary_op([](Tape& t, Var v) { return t.reshape(v, 2, 10); }, 4, 5, 35);
  check_unary_op([](Tape& t, Var v) { return t.slice_rows(v, 1, 2); }, 5, 3, 36);
  check_unary_op([](Tape& t, Var v) { return t.slice_cols(v, 2, 3); }, 4, 6, 37);
  check_unary_op([](Tape& t, Var v) { return t.broadcast_col(v, 7); }, 5, 1, 38);
  check_unary_op([](Tape& t, Var v) { return t.broadcast_rows(v, 6); }, 1, 4, 39);
  check_unary_op([](Tape& t, Var v) { return t.col_sums(v); }, 5, 4, 40);
  check_unary_op([](Tape& t, Var v) { return t.mean_all(v); }, 3, 3, 41);
  check_unary_op(
      [](Tape& t, Var v) { return t.row_scale_const(v, {0.0, 1.0, 0.0, 2.5}); }, 4, 3, 42);
  check_unary_op(
      [](Tape& t, Var v) {
        return t.concat_cols({t.slice_cols(v, 0, 2), t.slice_cols(v, 2, 2)});
      },
      3, 4, 43);
  // Away from the kink so central differences stay clean.
  Rng rng(44);
  Matrix x = random_matrix(rng, 4, 4, 1.0);
  for (long i = 0; i < x.size(); ++i) {
    if (std::fabs(x.data()[i]) < 0.05) x.data()[i] = 0.1;
  }
  GradCheckReport report = finite_difference_check(
      {x}, {"x"}, [](Tape& t, const std::vector<Var>& params) {
        return t.sum_all(t.leaky_relu(params[0], 0.2));
      });
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("binary ops pass finite differences") {
  Rng rng(45);
  Matrix a = random_matrix(rng, 3, 4);
  Matrix b = random_matrix(rng, 3, 4);
  for (long i = 0; i < b.size(); ++i) {
    if (std::fabs(b.data()[i]) < 0.2) b.data()[i] = 0.5;
  }
  Matrix c = random_matrix(rng, 4, 5);
  Matrix d = random_matrix(rng, 5, 4);

  GradCheckReport r1 = finite_difference_check(
      {a, b}, {"a", "b"}, [](Tape& t, const std::vector<Var>& p) {
        return t.sum_all(t.add(t.mul_elem(p[0], p[1]), t.div_elem(p[0], p[1])));
      });
  CHECK(r1.max_rel_err < 1e-6);

  GradCheckReport r2 = finite_difference_check(
      {a, c, d}, {"a", "c", "d"}, [](Tape& t, const std::vector<Var>& p) {
        return t.sum_all(t.add(t.matmul(p[0], p[1]), t.matmul_nt(p[0], p[2])));
      });
  CHECK(r2.max_rel_err < 1e-6);
}

TEST_CASE("concat rows routes gradients back to the right parts") {
  Rng rng(46);
  Matrix a = random_matrix(rng, 2, 3);
  Matrix b = random_matrix(rng, 4, 3);
  Matrix w(8, 3);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 3; ++j) w.at(i, j) = 0.1 * (i + 1) + 0.01 * j;
  }
  GradCheckReport report = finite_difference_check(
      {a, b}, {"a", "b"}, [&](Tape& t, const std::vector<Var>& p) {
        Var cat = t.concat_rows({p[0], p[1], p[0]});
        return t.sum_all(t.mul_elem(cat, t.constant(w)));
      });
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("masked softmax gradients pass in both modes") {
  GraphSpec spec;
  spec.num_modalities = 2;
  spec.basic_per_modality = 2;
  spec.virtual_per_modality = 1;
  AdjacencyMatrix adj = apply_modality_mask(
      build_full_adjacency(spec), ModalityMask::from_indices(2, {0}), spec);

  Rng rng(47);
  Matrix logits = random_matrix(rng, adj.size(), adj.size(), 2.0);
  for (MaskMode mode : {MaskMode::Hard, MaskMode::Soft}) {
    Rng wrng(48);
    Matrix w = random_matrix(wrng, adj.size(), adj.size(), 1.0);
    GradCheckReport report = finite_difference_check(
        {logits}, {"logits"}, [&](Tape& t, const std::vector<Var>& p) {
          Var y = t.masked_softmax_rows(p[0], adj, mode, -1e4, true);
          return t.sum_all(t.mul_elem(y, t.constant(w)));
        });
    CHECK(report.max_rel_err < 1e-6);
  }
}

TEST_CASE("soft and hard masked softmax agree on admissible rows") {
  GraphSpec spec;
  spec.num_modalities = 3;
  spec.basic_per_modality = 2;
  spec.virtual_per_modality = 1;
  AdjacencyMatrix adj = apply_modality_mask(
      build_full_adjacency(spec), ModalityMask::from_indices(3, {0, 2}), spec);

  Rng rng(49);
  Matrix logits = random_matrix(rng, adj.size(), adj.size(), 3.0);
  Tape t;
  Var l = t.leaf(logits, false);
  Var hard = t.masked_softmax_rows(l, adj, MaskMode::Hard, -1e4, true);
  Var soft = t.masked_softmax_rows(l, adj, MaskMode::Soft, -1e4, true);
  const Matrix& h = t.value(hard);
  const Matrix& s = t.value(soft);
  for (int i = 0; i < adj.size(); ++i) {
    bool any = false;
    for (int j = 0; j < adj.size(); ++j) any = any || adj.at(i, j);
    if (!any) continue;
    for (int j = 0; j < adj.size(); ++j) {
      CHECK(std::fabs(h.at(i, j) - s.at(i, j)) < 1e-12);
      if (!adj.at(i, j)) CHECK(s.at(i, j) < 1e-40);
    }
  }
}

TEST_CASE("backward touches each recorded op exactly once") {
  Rng rng(50);
  Matrix a = random_matrix(rng, 3, 3);
  Tape t;
  Var v = t.leaf(a);
  Var shared = t.elu(v);
  Var left = t.matmul(shared, shared);
  Var right = t.add(shared, shared);
  Var obj = t.sum_all(t.add(left, right));
  t.backward(obj);
  for (Var i = 0; i < t.size(); ++i) {
    if (t.requires_grad(i) && i != v) {
      CHECK(t.backward_visits(i) == 1);
    }
  }
  // A second backward recomputes the same adjoints rather than doubling.
  Matrix first = t.adjoint(v);
  t.backward(obj);
  CHECK(max_abs_diff(first, t.adjoint(v)) == 0.0);
}

TEST_CASE("non-finite results are rejected at the producing op") {
  Tape t;
  Var a = t.leaf(Matrix::filled(1, 1, 1.0));
  Var b = t.leaf(Matrix::filled(1, 1, 0.0));
  CHECK_THROWS_AS(t.div_elem(a, b), NumericalError);
}

TEST_CASE("non-recording tape evaluates forward but refuses backward") {
  Tape t(false);
  Var a = t.leaf(Matrix::filled(2, 2, 1.5));
  Var y = t.sum_all(t.elu(a));
  CHECK(t.value(y).at(0, 0) == doctest::Approx(6.0));
  CHECK_FALSE(t.requires_grad(y));
  CHECK_THROWS(t.backward(y));
}

TEST_CASE("norm ratio stays meaningful where the entrywise quotient is roundoff") {
  // f(x) = x0^2 + 1e-7 x1^2 at (300, 1). The second component's true central
  // difference, 4e-13, sits far below the rounding granularity of f ~ 9e4,
  // so its quotient is pure noise of a few 1e-6 against an adjoint of 2e-7:
  // the entrywise relative error reads O(1) even though the adjoint is
  // exact, and the gradient is too large for the absolute-terms floor to
  // excuse. The norm ratio compares the tensor at its own scale and stays
  // tiny.
  Matrix x(1, 2);
  x.at(0, 0) = 300.0;
  x.at(0, 1) = 1.0;
  Matrix w(1, 2);
  w.at(0, 0) = 1.0;
  w.at(0, 1) = 1e-7;
  GradCheckReport report = finite_difference_check(
      {x}, {"x"}, [&](Tape& t, const std::vector<Var>& pvars) {
        Var sq = t.mul_elem(pvars[0], pvars[0]);
        return t.matmul_nt(sq, t.constant(w));
      });
  CHECK(report.max_rel_err > 0.1);
  CHECK(report.max_norm_rel_err < 1e-6);
  REQUIRE(report.per_param.size() == 1);
  CHECK(report.per_param[0].analytic_sq == doctest::Approx(360000.0));
}

}  // TEST_SUITE
