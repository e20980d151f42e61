// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "hetgat/common.hpp"
#include "hetgat/graph.hpp"
#include "hetgat/matrix.hpp"

namespace hetgat::testing {

// Plain single-graph attention network with shared weights, written with
// direct loops and its own softmax so it shares no code with the library.
// Serves as the oracle for the tied-parameter reduction: the heterogeneous
// layer with identical per-modality weights must reproduce it.
struct ReferenceGatHead {
  Matrix w;  // [F_out x F_in]
  Matrix a;  // [1 x 2*F_out]
};

Matrix reference_gat_forward(const Matrix& nodes, const AdjacencyMatrix& adj,
                             const std::vector<ReferenceGatHead>& heads,
                             double leaky_slope, Activation out_activation);

}  // namespace hetgat::testing
