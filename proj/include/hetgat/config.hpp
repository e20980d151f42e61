// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hetgat/data.hpp"
#include "hetgat/trainer.hpp"

namespace hetgat {

// One flat bag of experiment settings, readable from "key value" text lines
// (one pair per line, # starts a comment). The same keys come back out of
// echo() so a run's resolved configuration can be re-read verbatim.
struct RunConfig {
  // Graph and model shape.
  int num_modalities = 4;
  int basic_per_modality = 2;
  int virtual_per_modality = 1;
  int feature_len = 8;
  int heads = 2;
  std::string mask_mode = "soft";  // "hard" or "soft"
  double soft_logit = -1e4;
  std::string activation = "elu";  // "elu", "sigmoid", "identity"
  double leaky_slope = 0.2;
  int grid_size = 16;
  int num_classes = 5;
  int enc_hidden = 64;
  int dec_hidden = 64;
  int gat_layers = 1;

  // Ablation switches.
  bool no_virtual = false;
  bool static_full_graph = false;
  bool homogeneous_weights = false;

  // Optimization.
  long total_steps = 500;
  double lr0 = 2e-4;
  double lr_min = 0.0;
  long checkpoint_every = 0;
  unsigned long seed = 1;

  // Dataset.
  int sample_count = 16;
  unsigned long data_seed = 1;
  double noise_level = 0.0;
  double off_contrast = 0.1;
  int region_min = 3;
  int region_max = 6;

  void validate() const;
  ModelConfig model_config() const;  // ablation flags applied here
  DataConfig data_config() const;
  TrainConfig train_config() const;  // out_dir left empty
};

RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

// Writes every key with its resolved value, full precision.
void echo_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace hetgat
