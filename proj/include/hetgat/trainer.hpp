// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hetgat/data.hpp"
#include "hetgat/optimizer.hpp"
#include "hetgat/segmentation.hpp"

namespace hetgat {

struct TrainConfig {
  ModelConfig model;
  long total_steps = 500;
  double lr0 = 2e-4;
  double lr_min = 0.0;
  unsigned long seed = 1;
  long checkpoint_every = 0;  // 0 keeps only the final checkpoint
  std::string out_dir;        // empty trains in memory only
  AdamConfig adam;

  void validate() const;
};

struct TrainResult {
  ParamBundle params;
  AdamState optimizer;
  std::vector<double> loss_curve;  // pre-update total loss per step
};

// Batch-size-1 loop over the dataset in cyclic order. One RNG stream drawn
// in a fixed order: every parameter initialization first, then one dropout
// mask per step. Metrics lines and checkpoints land under out_dir when set.
// Throws NumericalError if the loss or a gradient goes non-finite.
TrainResult train(const TrainConfig& cfg, const Dataset& data);

}  // namespace hetgat
