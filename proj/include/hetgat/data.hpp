// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hetgat/matrix.hpp"

namespace hetgat {

// Synthetic multimodal segmentation task. Every non-background class c gets
// one rectangular region and an assigned modality m = c - 1; that modality
// shows the region at intensity 1.0, every other modality at off_contrast,
// background stays 0, and i.i.d. Gaussian noise is added on top. With zero
// noise each class is threshold-separable from its assigned modality alone.
struct DataConfig {
  int grid_size = 16;
  int num_modalities = 4;
  int num_classes = 5;  // includes background class 0
  int sample_count = 16;
  unsigned long seed = 1;
  double noise_level = 0.0;
  double off_contrast = 0.1;
  int region_min = 3;
  int region_max = 6;

  void validate() const;
};

struct Sample {
  std::vector<Matrix> inputs;  // one grid per modality
  Matrix labels;               // integer-valued class ids
};

struct Dataset {
  DataConfig config;
  std::vector<Sample> samples;
};

// Deterministic in the seed: every sample derives its own stream from
// (seed, index), so samples are independent of sample_count and order.
Dataset generate_synthetic(const DataConfig& cfg);

// Directory layout: manifest.txt (key value lines) + samples.bin holding,
// per sample, the modality grids then the label grid, each row-major
// little-endian 64-bit reals.
void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& dir);

}  // namespace hetgat
