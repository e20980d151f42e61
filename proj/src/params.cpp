// SPDX-License-Identifier: Apache-2.0
#include "hetgat/params.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hetgat {

namespace {

static_assert(sizeof(double) == 8);

void write_doubles_le(std::ofstream& os, const double* p, long n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(p), n * 8);
  } else {
    for (long i = 0; i < n; ++i) {
      std::uint64_t u;
      std::memcpy(&u, p + i, 8);
      char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((u >> (8 * k)) & 0xff);
      os.write(b, 8);
    }
  }
}

void read_doubles_le(std::ifstream& is, double* p, long n) {
  if constexpr (std::endian::native == std::endian::little) {
    is.read(reinterpret_cast<char*>(p), n * 8);
  } else {
    for (long i = 0; i < n; ++i) {
      char b[8];
      is.read(b, 8);
      std::uint64_t u = 0;
      for (int k = 0; k < 8; ++k) {
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[k])) << (8 * k);
      }
      std::memcpy(p + i, &u, 8);
    }
  }
}

}  // namespace

Matrix& ParamBundle::add(const std::string& name, Matrix value) {
  if (has(name)) throw ConfigError("duplicate tensor name: " + name);
  index_[name] = tensors_.size();
  tensors_.push_back({name, std::move(value)});
  return tensors_.back().value;
}

Matrix& ParamBundle::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown tensor: " + name);
  return tensors_[it->second].value;
}

const Matrix& ParamBundle::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown tensor: " + name);
  return tensors_[it->second].value;
}

void save_bundle(const std::string& dir, const std::string& basename,
                 const ParamBundle& params, long step) {
  std::filesystem::create_directories(dir);
  std::string mpath = dir + "/" + basename + ".manifest";
  std::string bpath = dir + "/" + basename + ".bin";

  std::ofstream manifest(mpath);
  if (!manifest) throw ConfigError("cannot write " + mpath);
  manifest << "hetgat-bundle 1\n";
  manifest << "step " << step << "\n";
  long offset = 0;
  for (const NamedTensor& t : params.tensors()) {
    manifest << "tensor " << t.name << " " << t.value.rows() << " " << t.value.cols()
             << " " << offset << "\n";
    offset += t.value.size();
  }
  manifest.close();

  std::ofstream bin(bpath, std::ios::binary);
  if (!bin) throw ConfigError("cannot write " + bpath);
  for (const NamedTensor& t : params.tensors()) {
    write_doubles_le(bin, t.value.data(), t.value.size());
  }
  if (!bin) throw ConfigError("short write to " + bpath);
}

LoadedBundle load_bundle(const std::string& dir, const std::string& basename) {
  std::string mpath = dir + "/" + basename + ".manifest";
  std::string bpath = dir + "/" + basename + ".bin";

  std::ifstream manifest(mpath);
  if (!manifest) throw ConfigError("cannot read " + mpath);
  std::string magic;
  int version = 0;
  manifest >> magic >> version;
  if (magic != "hetgat-bundle" || version != 1) {
    throw ConfigError("bad bundle manifest: " + mpath);
  }

  LoadedBundle out;
  std::string line;
  std::getline(manifest, line);
  std::ifstream bin(bpath, std::ios::binary);
  if (!bin) throw ConfigError("cannot read " + bpath);
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "step") {
      ss >> out.step;
    } else if (tag == "tensor") {
      std::string name;
      int rows = 0, cols = 0;
      long offset = 0;
      if (!(ss >> name >> rows >> cols >> offset)) {
        throw ConfigError("bad tensor line in " + mpath);
      }
      Matrix m(rows, cols);
      bin.seekg(offset * 8, std::ios::beg);
      read_doubles_le(bin, m.data(), m.size());
      if (!bin) throw ConfigError("short read from " + bpath);
      out.params.add(name, std::move(m));
    } else {
      throw ConfigError("unknown manifest tag '" + tag + "' in " + mpath);
    }
  }
  return out;
}

Var Binder::operator()(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) return bound_[it->second].second;
  Var v = tape_.leaf(params_.get(name), trainable_, "param");
  index_[name] = bound_.size();
  bound_.push_back({name, v});
  return v;
}

void Binder::bind_existing(const std::string& name, Var v) {
  if (index_.count(name)) throw ConfigError("already bound: " + name);
  index_[name] = bound_.size();
  bound_.push_back({name, v});
}

std::vector<std::pair<std::string, Matrix>> Binder::gradients() const {
  std::vector<std::pair<std::string, Matrix>> out;
  out.reserve(bound_.size());
  for (const auto& [name, var] : bound_) {
    out.push_back({name, tape_.adjoint(var)});
  }
  return out;
}

}  // namespace hetgat
