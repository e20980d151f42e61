// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetgat/matrix.hpp"
#include "hetgat/tape.hpp"

namespace hetgat {

struct NamedTensor {
  std::string name;
  Matrix value;
};

// Ordered collection of named parameter matrices. Insertion order is part of
// the contract: initialization draws and checkpoint layout both follow it.
class ParamBundle {
 public:
  Matrix& add(const std::string& name, Matrix value);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Matrix& get(const std::string& name);
  const Matrix& get(const std::string& name) const;
  int count() const { return static_cast<int>(tensors_.size()); }
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  std::vector<NamedTensor>& tensors() { return tensors_; }

 private:
  std::vector<NamedTensor> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

// Writes <dir>/<basename>.manifest (text: magic, step, one tensor line each)
// and <dir>/<basename>.bin (raw little-endian 64-bit reals, concatenated in
// manifest order). Creates the directory if needed.
void save_bundle(const std::string& dir, const std::string& basename,
                 const ParamBundle& params, long step);

struct LoadedBundle {
  ParamBundle params;
  long step = 0;
};

LoadedBundle load_bundle(const std::string& dir, const std::string& basename);

// Lazily binds bundle tensors onto a tape as gradient-tracked leaves, one
// leaf per name no matter how often it is requested, so a shared tensor
// accumulates gradient from every use.
class Binder {
 public:
  Binder(Tape& tape, const ParamBundle& params, bool trainable = true)
      : tape_(tape), params_(params), trainable_(trainable) {}

  Var operator()(const std::string& name);

  // Routes a name to an already created leaf instead of the bundle value;
  // lets a caller that owns the leaves (gradient checking) reuse this
  // binder-based model code unchanged.
  void bind_existing(const std::string& name, Var v);

  // Adjoints of every bound tensor, keyed by name. Valid after backward().
  std::vector<std::pair<std::string, Matrix>> gradients() const;

 private:
  Tape& tape_;
  const ParamBundle& params_;
  bool trainable_;
  std::vector<std::pair<std::string, Var>> bound_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace hetgat
