// SPDX-License-Identifier: Apache-2.0
#include "hetgat/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace hetgat {

void TrainConfig::validate() const {
  model.validate();
  if (total_steps < 1) throw ConfigError("total_steps must be positive");
  if (lr0 < 0.0 || lr_min < 0.0 || lr_min > lr0) {
    throw ConfigError("learning rates must satisfy 0 <= lr_min <= lr0");
  }
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

namespace {

void check_dataset(const TrainConfig& cfg, const Dataset& data) {
  if (data.samples.empty()) throw ConfigError("train: dataset is empty");
  if (data.config.grid_size != cfg.model.grid_size ||
      data.config.num_modalities != cfg.model.gat.num_modalities ||
      data.config.num_classes != cfg.model.num_classes) {
    throw ConfigError("train: dataset geometry does not match the model");
  }
}

void write_checkpoint(const TrainConfig& cfg, const ParamBundle& params,
                      const AdamState& adam, long step) {
  save_bundle(cfg.out_dir, "model", params, step);
  adam.save(cfg.out_dir, "opt");
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& data) {
  cfg.validate();
  check_dataset(cfg, data);

  TrainResult result;
  Rng rng(cfg.seed);
  init_model_params(cfg.model, rng, result.params);
  result.optimizer = AdamState(result.params, cfg.adam);

  std::ofstream metrics;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    metrics.open(cfg.out_dir + "/metrics.txt");
    if (!metrics) throw ConfigError("train: cannot write metrics under " + cfg.out_dir);
    metrics.precision(std::numeric_limits<double>::max_digits10);
  }

  DropoutPolicy policy;
  policy.num_modalities = cfg.model.gat.num_modalities;
  policy.seed = cfg.seed;

  for (long step = 0; step < cfg.total_steps; ++step) {
    const Sample& sample =
        data.samples[static_cast<size_t>(step) % data.samples.size()];
    ModalityMask mask = sample_dropout(policy, rng);
    double lr = cosine_lr(step, cfg.total_steps, cfg.lr0, cfg.lr_min);

    Tape t;
    Binder bind(t, result.params);
    LossParts parts = total_loss(t, sample, mask, bind, cfg.model);
    double total = t.value(parts.total).at(0, 0);
    if (!std::isfinite(total)) {
      throw NumericalError("train: non-finite loss at step " + std::to_string(step));
    }
    result.loss_curve.push_back(total);

    if (metrics.is_open()) {
      metrics << "step " << step << " lr " << lr << " mask " << mask.to_string()
              << " total " << total << " multi "
              << t.value(parts.multimodal).at(0, 0);
      for (size_t m = 0; m < parts.specific.size(); ++m) {
        metrics << " spec" << m << " " << t.value(parts.specific[m]).at(0, 0);
      }
      metrics << "\n";
    }

    t.backward(parts.total);
    result.optimizer.apply(result.params, bind.gradients(), lr);

    if (!cfg.out_dir.empty() && cfg.checkpoint_every > 0 &&
        (step + 1) % cfg.checkpoint_every == 0) {
      write_checkpoint(cfg, result.params, result.optimizer, step + 1);
    }
  }

  if (!cfg.out_dir.empty()) {
    write_checkpoint(cfg, result.params, result.optimizer, cfg.total_steps);
  }
  return result;
}

}  // namespace hetgat
