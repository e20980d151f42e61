// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hetgat/graph.hpp"
#include "hetgat/params.hpp"
#include "hetgat/rng.hpp"

namespace hetgat {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment tensors mirror the parameter bundle and are
// saved alongside checkpoints so training resumes on the exact trajectory.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParamBundle& params, AdamConfig cfg = {});

  // One update with the given learning rate. Tensors without a gradient in
  // the list keep their value and moments. Throws NumericalError on a
  // non-finite gradient, ConfigError on an unknown name.
  void apply(ParamBundle& params,
             const std::vector<std::pair<std::string, Matrix>>& grads, double lr);

  long steps_taken() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }

  void save(const std::string& dir, const std::string& basename) const;
  static AdamState load(const std::string& dir, const std::string& basename,
                        AdamConfig cfg = {});

 private:
  AdamConfig cfg_;
  ParamBundle moments_;  // "m/<name>" and "v/<name>" per parameter tensor
  long steps_ = 0;
};

// lr_min + 0.5 (lr0 - lr_min) (1 + cos(pi step / total)). The cosine factor
// is exact at the start, midpoint, and end of the schedule.
double cosine_lr(long step, long total_steps, double lr0, double lr_min);

struct DropoutPolicy {
  int num_modalities = 4;
  unsigned long seed = 0;
};

// Draws how many modalities to drop, uniform over {0, ..., N-1}, then a
// uniform subset of that size. The returned mask is never empty.
ModalityMask sample_dropout(const DropoutPolicy& policy, Rng& rng);

}  // namespace hetgat
