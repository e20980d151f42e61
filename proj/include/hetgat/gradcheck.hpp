// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hetgat/matrix.hpp"
#include "hetgat/tape.hpp"

namespace hetgat {

// Builds a fresh scalar objective on the given tape; params[i] is the leaf
// bound to the i-th parameter matrix, in the same order they were passed in.
using GradCheckBuild = std::function<Var(Tape&, const std::vector<Var>& params)>;

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int worst_row = -1;
  int worst_col = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  // Sums of squares over the tensor, for norm-ratio aggregation across any
  // grouping of tensors.
  double err_sq = 0.0;
  double analytic_sq = 0.0;
  double numeric_sq = 0.0;

  double norm_rel_err(double floor = 1e-8) const;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_param;
  double max_rel_err = 0.0;
  std::string worst_param;
  double max_norm_rel_err = 0.0;
  std::string worst_norm_param;

  bool passes(double tol) const { return max_rel_err < tol; }
};

// Combines per-tensor sums of squares into one norm-ratio error,
// ||ad - fd|| / (||ad|| + ||fd||) with the denominator floored.
double combined_norm_rel_err(const std::vector<const GradCheckEntry*>& entries,
                             double floor = 1e-8);

// Compares reverse-mode gradients against central finite differences, one
// perturbed forward pair per parameter entry. Two error views are reported.
// The entrywise relative error (denominator floored so exact-zero gradients
// compare cleanly) is the strict gate for small objectives; on deep models
// it bottoms out at the difference-quotient roundoff, roughly
// eps * |f| / h against each entry's magnitude, so entries that happen to
// sit near zero read as large errors even when every adjoint is right. The
// norm ratio ||ad - fd|| / (||ad|| + ||fd||) compares whole tensors at their
// own scale and is the meaningful gate there; a wrong adjoint still shows up
// in it at O(1).
GradCheckReport finite_difference_check(const std::vector<Matrix>& params,
                                        const std::vector<std::string>& names,
                                        const GradCheckBuild& build, double h = 1e-6,
                                        double denom_floor = 1e-8);

}  // namespace hetgat
