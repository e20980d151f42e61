// SPDX-License-Identifier: Apache-2.0
#include "hetgat/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "hetgat/common.hpp"

namespace hetgat {

AdamState::AdamState(const ParamBundle& params, AdamConfig cfg) : cfg_(cfg) {
  for (const NamedTensor& nt : params.tensors()) {
    moments_.add("m/" + nt.name, Matrix(nt.value.rows(), nt.value.cols()));
    moments_.add("v/" + nt.name, Matrix(nt.value.rows(), nt.value.cols()));
  }
}

void AdamState::apply(ParamBundle& params,
                      const std::vector<std::pair<std::string, Matrix>>& grads,
                      double lr) {
  ++steps_;
  double mc = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  double vc = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (const auto& [name, grad] : grads) {
    if (!moments_.has("m/" + name)) {
      throw ConfigError("adam: unknown parameter " + name);
    }
    for (long i = 0; i < grad.size(); ++i) {
      if (!std::isfinite(grad.data()[i])) {
        throw NumericalError("adam: non-finite gradient for " + name);
      }
    }
    Matrix& p = params.get(name);
    if (p.rows() != grad.rows() || p.cols() != grad.cols()) {
      throw ConfigError("adam: gradient shape mismatch for " + name);
    }
    Matrix& m = moments_.get("m/" + name);
    Matrix& v = moments_.get("v/" + name);
    for (long i = 0; i < grad.size(); ++i) {
      double g = grad.data()[i];
      double mi = cfg_.beta1 * m.data()[i] + (1.0 - cfg_.beta1) * g;
      double vi = cfg_.beta2 * v.data()[i] + (1.0 - cfg_.beta2) * g * g;
      m.data()[i] = mi;
      v.data()[i] = vi;
      p.data()[i] -= lr * (mi / mc) / (std::sqrt(vi / vc) + cfg_.eps);
    }
  }
}

void AdamState::save(const std::string& dir, const std::string& basename) const {
  save_bundle(dir, basename, moments_, steps_);
}

AdamState AdamState::load(const std::string& dir, const std::string& basename,
                          AdamConfig cfg) {
  LoadedBundle loaded = load_bundle(dir, basename);
  AdamState state;
  state.cfg_ = cfg;
  state.moments_ = std::move(loaded.params);
  state.steps_ = loaded.step;
  return state;
}

double cosine_lr(long step, long total_steps, double lr0, double lr_min) {
  if (total_steps < 1) throw ConfigError("cosine_lr: total_steps must be positive");
  if (step < 0 || step > total_steps) {
    throw ConfigError("cosine_lr: step outside [0, total_steps]");
  }
  double x = static_cast<double>(step) / static_cast<double>(total_steps);
  double c;
  if (x == 0.0) {
    c = 1.0;
  } else if (x == 0.5) {
    c = 0.0;
  } else if (x == 1.0) {
    c = -1.0;
  } else {
    c = std::cos(std::numbers::pi * x);
  }
  return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + c);
}

ModalityMask sample_dropout(const DropoutPolicy& policy, Rng& rng) {
  int n = policy.num_modalities;
  if (n < 1) throw ConfigError("sample_dropout: need at least one modality");
  int drop = rng.uniform_int(n);
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  ModalityMask mask = ModalityMask::all_available(n);
  for (int i = 0; i < drop; ++i) {
    int j = i + rng.uniform_int(n - i);
    std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    mask.bits &= ~(1u << order[static_cast<size_t>(i)]);
  }
  return mask;
}

}  // namespace hetgat
