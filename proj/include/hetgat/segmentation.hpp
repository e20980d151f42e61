// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hetgat/data.hpp"
#include "hetgat/gat_layer.hpp"
#include "hetgat/params.hpp"

namespace hetgat {

inline constexpr double kDiceEps = 1e-5;

// Whole segmentation model: per-modality dense encoders feeding the graph
// layer plus two softmax decoders. The specific decoder reads one modality's
// extended node block (shared weights across modalities, training only); the
// multimodal decoder reads every node after graph attention and is the sole
// inference path.
struct ModelConfig {
  GatConfig gat;
  int grid_size = 16;
  int num_classes = 5;
  int enc_hidden = 64;
  int dec_hidden = 64;
  int gat_layers = 1;

  int pixels() const { return grid_size * grid_size; }
  int nodes_per_modality() const {
    return gat.basic_per_modality + gat.virtual_per_modality;
  }
  int total_nodes() const { return gat.num_modalities * nodes_per_modality(); }
  GatConfig layer_config(int layer) const;
  void validate() const;
};

// Draw order: graph layers (stack order), then encoders by modality, then the
// specific decoder, then the multimodal decoder. Weights are Glorot normal,
// biases and virtual rows zero.
void init_model_params(const ModelConfig& cfg, Rng& rng, ParamBundle& params);

// Dense two-layer map from one modality grid to that modality's basic rows.
Var encode(Tape& t, const Matrix& grid, Binder& bind, const ModelConfig& cfg,
           int modality);

// Decodes a stack of node rows to per-pixel class probabilities [S*S x L].
// decoder is "spec" (expects one modality block) or "multi" (all nodes).
Var decode_nodes(Tape& t, Var rows, Binder& bind, const ModelConfig& cfg,
                 const std::string& decoder);

Matrix one_hot_labels(const Matrix& labels, int num_classes);

// Soft Dice: mean over classes of 1 - (2*overlap + eps) / (mass sum + eps).
Var dice_loss(Tape& t, Var probs, const Matrix& onehot);

// Runs the masked graph pathway under the layer stack.
Var graph_nodes_forward(Tape& t, const std::vector<Var>& basic_blocks,
                        const ModalityMask& mask, Binder& bind, const ModelConfig& cfg);

struct LossParts {
  Var total = -1;
  std::vector<Var> specific;  // one per modality, always from full inputs
  Var multimodal = -1;        // masked graph pathway
};

LossParts total_loss(Tape& t, const Sample& sample, const ModalityMask& mask,
                     Binder& bind, const ModelConfig& cfg);

// Inference: encoders of unavailable modalities never run; their basic rows
// enter as zeros. Returns multimodal class probabilities [S*S x L].
Matrix predict_probs(const ParamBundle& params, const ModelConfig& cfg,
                     const Sample& sample, const ModalityMask& mask);

}  // namespace hetgat
