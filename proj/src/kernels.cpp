// SPDX-License-Identifier: Apache-2.0
#include "hetgat/kernels.hpp"

#include <atomic>
#include <cmath>

namespace hetgat::kern {

namespace {

Exec g_exec = Exec::Parallel;

inline void mm_nn_row(const double* a, const double* b, double* c, int i, int k, int n) {
  double* crow = c + static_cast<long>(i) * n;
  for (int j = 0; j < n; ++j) crow[j] = 0.0;
  const double* arow = a + static_cast<long>(i) * k;
  for (int kk = 0; kk < k; ++kk) {
    const double av = arow[kk];
    const double* brow = b + static_cast<long>(kk) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void mm_nt_row(const double* a, const double* b, double* c, int i, int k, int n) {
  const double* arow = a + static_cast<long>(i) * k;
  double* crow = c + static_cast<long>(i) * n;
  for (int j = 0; j < n; ++j) {
    const double* brow = b + static_cast<long>(j) * k;
    double acc = 0.0;
    for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
    crow[j] = acc;
  }
}

inline void mm_tn_row(const double* a, const double* b, double* c, int i, int m, int k, int n) {
  double* crow = c + static_cast<long>(i) * n;
  for (int j = 0; j < n; ++j) crow[j] = 0.0;
  for (int kk = 0; kk < k; ++kk) {
    const double av = a[static_cast<long>(kk) * m + i];
    const double* brow = b + static_cast<long>(kk) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void softmax_row(const double* in, double* out, int n) {
  double mx = in[0];
  for (int j = 1; j < n; ++j)
    if (in[j] > mx) mx = in[j];
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    out[j] = std::exp(in[j] - mx);
    sum += out[j];
  }
  for (int j = 0; j < n; ++j) out[j] /= sum;
}

// Returns false when the row is fully masked in hard mode and empty rows are
// not allowed.
inline bool masked_softmax_row(const double* in, const std::uint8_t* mask, double* out, int n,
                               MaskMode mode, double soft_logit, bool zero_empty_rows) {
  if (mode == MaskMode::Soft) {
    bool any = false;
    double mx = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = mask[j] ? in[j] : in[j] + soft_logit;
      if (!any || v > mx) mx = v;
      any = true;
      out[j] = v;
    }
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      out[j] = std::exp(out[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < n; ++j) out[j] /= sum;
    return true;
  }
  // Hard mode: normalize over admissible entries only.
  bool any = false;
  double mx = 0.0;
  for (int j = 0; j < n; ++j) {
    if (mask[j] && (!any || in[j] > mx)) {
      mx = in[j];
      any = true;
    }
  }
  if (!any) {
    if (!zero_empty_rows) return false;
    for (int j = 0; j < n; ++j) out[j] = 0.0;
    return true;
  }
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    out[j] = mask[j] ? std::exp(in[j] - mx) : 0.0;
    sum += out[j];
  }
  for (int j = 0; j < n; ++j)
    if (mask[j]) out[j] /= sum;
  return true;
}

inline bool big_enough(long work) { return work >= kParallelThreshold; }

}  // namespace

void set_exec(Exec e) { g_exec = e; }
Exec exec() { return g_exec; }

namespace serial {

void mm_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) mm_nn_row(a, b, c, i, k, n);
}

void mm_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) mm_nt_row(a, b, c, i, k, n);
}

void mm_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) mm_tn_row(a, b, c, i, m, k, n);
}

void softmax_rows(const double* logits, double* out, int n_rows, int n_cols) {
  for (int i = 0; i < n_rows; ++i)
    softmax_row(logits + static_cast<long>(i) * n_cols, out + static_cast<long>(i) * n_cols, n_cols);
}

bool softmax_rows_masked(const double* logits, const std::uint8_t* mask, double* out, int n_rows,
                         int n_cols, MaskMode mode, double soft_logit, bool zero_empty_rows) {
  for (int i = 0; i < n_rows; ++i) {
    const long off = static_cast<long>(i) * n_cols;
    if (!masked_softmax_row(logits + off, mask + off, out + off, n_cols, mode, soft_logit,
                            zero_empty_rows))
      return false;
  }
  return true;
}

}  // namespace serial

namespace par {

void mm_nn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) mm_nn_row(a, b, c, i, k, n);
}

void mm_nt(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) mm_nt_row(a, b, c, i, k, n);
}

void mm_tn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) mm_tn_row(a, b, c, i, m, k, n);
}

void softmax_rows(const double* logits, double* out, int n_rows, int n_cols) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_rows; ++i)
    softmax_row(logits + static_cast<long>(i) * n_cols, out + static_cast<long>(i) * n_cols, n_cols);
}

bool softmax_rows_masked(const double* logits, const std::uint8_t* mask, double* out, int n_rows,
                         int n_cols, MaskMode mode, double soft_logit, bool zero_empty_rows) {
  std::atomic<bool> ok{true};
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_rows; ++i) {
    const long off = static_cast<long>(i) * n_cols;
    if (!masked_softmax_row(logits + off, mask + off, out + off, n_cols, mode, soft_logit,
                            zero_empty_rows))
      ok.store(false, std::memory_order_relaxed);
  }
  return ok.load();
}

}  // namespace par

void mm_nn(const double* a, const double* b, double* c, int m, int k, int n) {
  const long work = static_cast<long>(m) * k * n;
  if (g_exec == Exec::Parallel && big_enough(work))
    par::mm_nn(a, b, c, m, k, n);
  else
    serial::mm_nn(a, b, c, m, k, n);
}

void mm_nt(const double* a, const double* b, double* c, int m, int k, int n) {
  const long work = static_cast<long>(m) * k * n;
  if (g_exec == Exec::Parallel && big_enough(work))
    par::mm_nt(a, b, c, m, k, n);
  else
    serial::mm_nt(a, b, c, m, k, n);
}

void mm_tn(const double* a, const double* b, double* c, int m, int k, int n) {
  const long work = static_cast<long>(m) * k * n;
  if (g_exec == Exec::Parallel && big_enough(work))
    par::mm_tn(a, b, c, m, k, n);
  else
    serial::mm_tn(a, b, c, m, k, n);
}

void softmax_rows(const double* logits, double* out, int n_rows, int n_cols) {
  const long work = static_cast<long>(n_rows) * n_cols * 4;
  if (g_exec == Exec::Parallel && big_enough(work))
    par::softmax_rows(logits, out, n_rows, n_cols);
  else
    serial::softmax_rows(logits, out, n_rows, n_cols);
}

bool softmax_rows_masked(const double* logits, const std::uint8_t* mask, double* out, int n_rows,
                         int n_cols, MaskMode mode, double soft_logit, bool zero_empty_rows) {
  const long work = static_cast<long>(n_rows) * n_cols * 4;
  if (g_exec == Exec::Parallel && big_enough(work))
    return par::softmax_rows_masked(logits, mask, out, n_rows, n_cols, mode, soft_logit,
                                    zero_empty_rows);
  return serial::softmax_rows_masked(logits, mask, out, n_rows, n_cols, mode, soft_logit,
                                     zero_empty_rows);
}

}  // namespace hetgat::kern
