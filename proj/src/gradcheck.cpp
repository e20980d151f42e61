// SPDX-License-Identifier: Apache-2.0
#include "hetgat/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace hetgat {

namespace {

double eval_objective(const std::vector<Matrix>& params, const GradCheckBuild& build) {
  Tape t(false);
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Matrix& p : params) leaves.push_back(t.leaf(p, true, "param"));
  Var obj = build(t, leaves);
  const Matrix& v = t.value(obj);
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::invalid_argument("gradcheck: objective must be 1x1");
  }
  return v.at(0, 0);
}

}  // namespace

double GradCheckEntry::norm_rel_err(double floor) const {
  double denom = std::sqrt(analytic_sq) + std::sqrt(numeric_sq);
  return std::sqrt(err_sq) / std::max(floor, denom);
}

double combined_norm_rel_err(const std::vector<const GradCheckEntry*>& entries,
                             double floor) {
  double err_sq = 0.0;
  double analytic_sq = 0.0;
  double numeric_sq = 0.0;
  for (const GradCheckEntry* e : entries) {
    err_sq += e->err_sq;
    analytic_sq += e->analytic_sq;
    numeric_sq += e->numeric_sq;
  }
  double denom = std::sqrt(analytic_sq) + std::sqrt(numeric_sq);
  return std::sqrt(err_sq) / std::max(floor, denom);
}

GradCheckReport finite_difference_check(const std::vector<Matrix>& params,
                                        const std::vector<std::string>& names,
                                        const GradCheckBuild& build, double h,
                                        double denom_floor) {
  if (params.size() != names.size()) {
    throw std::invalid_argument("gradcheck: params and names differ in length");
  }

  Tape t(true);
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Matrix& p : params) leaves.push_back(t.leaf(p, true, "param"));
  Var obj = build(t, leaves);
  t.backward(obj);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (Var l : leaves) analytic.push_back(t.adjoint(l));

  GradCheckReport report;
  std::vector<Matrix> work = params;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    GradCheckEntry entry;
    entry.name = names[pi];
    Matrix& p = work[pi];
    for (int r = 0; r < p.rows(); ++r) {
      for (int c = 0; c < p.cols(); ++c) {
        double orig = p.at(r, c);
        p.at(r, c) = orig + h;
        double fp = eval_objective(work, build);
        p.at(r, c) = orig - h;
        double fm = eval_objective(work, build);
        p.at(r, c) = orig;
        double fd = (fp - fm) / (2.0 * h);
        double ad = analytic[pi].at(r, c);
        double abs_err = std::fabs(ad - fd);
        entry.err_sq += abs_err * abs_err;
        entry.analytic_sq += ad * ad;
        entry.numeric_sq += fd * fd;
        double rel = abs_err / std::max(denom_floor, std::fabs(ad) + std::fabs(fd));
        if (rel > entry.max_rel_err) {
          entry.max_rel_err = rel;
          entry.max_abs_err = abs_err;
          entry.worst_row = r;
          entry.worst_col = c;
          entry.analytic_at_worst = ad;
          entry.numeric_at_worst = fd;
        }
      }
    }
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst_param = entry.name;
    }
    double nrm = entry.norm_rel_err(denom_floor);
    if (nrm > report.max_norm_rel_err) {
      report.max_norm_rel_err = nrm;
      report.worst_norm_param = entry.name;
    }
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace hetgat
