// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "hetgat/common.hpp"

namespace hetgat::kern {

// Execution mode for the dense kernels. Parallel kernels split work over
// output rows only, with a fixed per-element accumulation order, so serial
// and parallel results are bitwise identical.
enum class Exec { Serial, Parallel };

void set_exec(Exec e);
Exec exec();

// Work sizes below this many multiply-adds always run serially; OpenMP
// spawn overhead dominates for the small matrices the layers produce.
inline constexpr long kParallelThreshold = 1 << 15;

// c[m x n] = a[m x k] * b[k x n]
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n);
// c[m x n] = a[m x k] * b[n x k]^T
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n);
// c[m x n] = a[k x m]^T * b[k x n]
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n);

// Row-wise softmax of logits[n_rows x n_cols] into out. Max-shifted for
// stability. Used for per-pixel class probabilities.
void softmax_rows(const double* logits, double* out, int n_rows, int n_cols);

// Row-wise masked softmax used for attention weights. mask[r*n_cols + c] != 0
// marks entry c as admissible for row r.
//   Hard: masked-out entries are excluded from the normalization and get 0.
//   Soft: masked-out logits get soft_logit added, then a full softmax runs.
// Returns false (without writing the row) if a row has no admissible entry in
// hard mode and zero_empty_rows is false; with zero_empty_rows the row is
// written as all zeros instead.
bool softmax_rows_masked(const double* logits, const std::uint8_t* mask, double* out,
                         int n_rows, int n_cols, MaskMode mode, double soft_logit,
                         bool zero_empty_rows);

namespace serial {
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n);
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n);
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n);
void softmax_rows(const double* logits, double* out, int n_rows, int n_cols);
bool softmax_rows_masked(const double* logits, const std::uint8_t* mask, double* out,
                         int n_rows, int n_cols, MaskMode mode, double soft_logit,
                         bool zero_empty_rows);
}  // namespace serial

namespace par {
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n);
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n);
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n);
void softmax_rows(const double* logits, double* out, int n_rows, int n_cols);
bool softmax_rows_masked(const double* logits, const std::uint8_t* mask, double* out,
                         int n_rows, int n_cols, MaskMode mode, double soft_logit,
                         bool zero_empty_rows);
}  // namespace par

}  // namespace hetgat::kern
