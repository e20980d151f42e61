// SPDX-License-Identifier: Apache-2.0
#include "hetgat/adjacency_oracle.hpp"

namespace hetgat::verify {

bool oracle_edge(const GraphSpec& spec, const ModalityMask& mask, int flat_i, int flat_j) {
  int p = spec.basic_per_modality + spec.virtual_per_modality;
  int mi = flat_i / p;
  int mj = flat_j / p;
  int oi = flat_i % p;
  int oj = flat_j % p;
  bool i_basic = oi < spec.basic_per_modality;
  bool j_basic = oj < spec.basic_per_modality;

  // Source side first: a basic node of an unavailable modality feeds nobody.
  if (j_basic && !mask.available(mj)) return false;

  if (mi == mj) return true;
  if (i_basic && j_basic) return oi == oj;
  if (i_basic && !j_basic) return true;
  return false;
}

AdjacencyMatrix oracle_adjacency(const GraphSpec& spec, const ModalityMask& mask) {
  int n = spec.total_nodes();
  AdjacencyMatrix adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) adj.set(i, j, oracle_edge(spec, mask, i, j));
  }
  return adj;
}

}  // namespace hetgat::verify
