// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hetgat/graph.hpp"

namespace hetgat::verify {

// Brute-force edge-rule evaluator used as an independent oracle against the
// library's adjacency builder. Written as a single per-pair predicate rather
// than matrix assembly so the two can only agree by computing the same rules.
bool oracle_edge(const GraphSpec& spec, const ModalityMask& mask, int flat_i, int flat_j);

AdjacencyMatrix oracle_adjacency(const GraphSpec& spec, const ModalityMask& mask);

}  // namespace hetgat::verify
