// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hetgat {

// How disconnected edges are treated inside the attention softmax.
// Hard: excluded entries drop out of the normalization entirely and get
//       weight exactly 0.
// Soft: excluded entries stay in the softmax with a large negative offset
//       added to their logits, so their weight is ~0 but gradients still flow.
enum class MaskMode { Hard, Soft };

// Output nonlinearity of the attention layer.
enum class Activation { Elu, Sigmoid, Identity };

// Thrown when a computation produces NaN/Inf. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on invalid user-facing configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline const char* to_string(MaskMode m) {
  return m == MaskMode::Hard ? "hard" : "soft";
}

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::Elu: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    default: return "identity";
  }
}

MaskMode mask_mode_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

}  // namespace hetgat
