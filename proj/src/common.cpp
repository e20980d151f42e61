// SPDX-License-Identifier: Apache-2.0
#include "hetgat/common.hpp"

namespace hetgat {

MaskMode mask_mode_from_string(const std::string& s) {
  if (s == "hard") return MaskMode::Hard;
  if (s == "soft") return MaskMode::Soft;
  throw ConfigError("unknown mask mode '" + s + "' (expected hard|soft)");
}

Activation activation_from_string(const std::string& s) {
  if (s == "elu") return Activation::Elu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + s + "' (expected elu|sigmoid|identity)");
}

}  // namespace hetgat
