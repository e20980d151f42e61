// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hetgat/graph.hpp"
#include "hetgat/params.hpp"
#include "hetgat/rng.hpp"
#include "hetgat/tape.hpp"

namespace hetgat {

// One graph-attention layer over the multimodal node set. Projection
// matrices and attention vectors are per modality (and per head); the
// attention vector is taken from the query node's modality while every node
// is projected by its own modality's matrix.
struct GatConfig {
  int num_modalities = 4;
  int basic_per_modality = 2;
  int virtual_per_modality = 1;
  int feature_in = 8;
  int feature_out = 8;
  int heads = 2;
  double leaky_slope = 0.2;
  MaskMode mask_mode = MaskMode::Soft;
  double soft_logit = -1e4;
  Activation out_activation = Activation::Elu;
  // Collapses the per-modality parameter tables to a single shared slot,
  // which reduces the layer to a standard graph attention network.
  bool tied_weights = false;
  // Keeps the full adjacency regardless of the availability mask; dropped
  // inputs are still zero-filled.
  bool static_full_graph = false;
  // Distinguishes parameter names when layers are stacked ("" for the first).
  std::string name_prefix;

  GraphSpec graph() const;
  void validate() const;

  int modality_slot(int m) const { return tied_weights ? 0 : m; }
  std::string w_name(int head, int m) const;
  std::string a_name(int head, int m) const;
  std::string p_name(int m) const;
};

// Adds W (Glorot normal), a (Glorot normal) and all-zero virtual rows p to
// the bundle, in a fixed draw order: per head, per modality slot, W then a;
// then p per modality.
void init_gat_params(const GatConfig& cfg, Rng& rng, ParamBundle& params);

// Stacks [basic ; p[m]] per modality into the flat node matrix.
Var attach_virtual_nodes(Tape& t, const std::vector<Var>& basic_blocks, Binder& bind,
                         const GatConfig& cfg);

// 1.0 per row, except 0.0 on basic rows of unavailable modalities.
std::vector<double> dropped_row_factors(const GraphSpec& spec, const ModalityMask& mask);

// Pairwise pre-softmax scores for one head, LeakyReLU applied, masking not.
Var attention_logits(Tape& t, Var nodes, Binder& bind, const GatConfig& cfg, int head);

// Row-normalized attention; rows without admissible sources come out zero.
Var attention_weights(Tape& t, Var logits, const AdjacencyMatrix& adj, MaskMode mode,
                      double soft_logit);

// Full per-head attention contraction, head averaging, output activation.
Var multi_head_update(Tape& t, Var nodes, const AdjacencyMatrix& adj, Binder& bind,
                      const GatConfig& cfg);

// attach_virtual_nodes -> zero-fill dropped basic rows -> masked adjacency
// -> multi_head_update. The availability mask drives both the zero-fill and
// (unless static_full_graph) the adjacency.
Var gat_forward(Tape& t, const std::vector<Var>& basic_blocks, const ModalityMask& mask,
                Binder& bind, const GatConfig& cfg);

}  // namespace hetgat
