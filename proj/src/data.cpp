// SPDX-License-Identifier: Apache-2.0
#include "hetgat/data.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hetgat/common.hpp"
#include "hetgat/rng.hpp"

namespace hetgat {

namespace {

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

struct Rect {
  int x0 = 0, y0 = 0, w = 0, h = 0;
};

bool overlaps(const Rect& a, const Rect& b) {
  return a.x0 < b.x0 + b.w && b.x0 < a.x0 + a.w && a.y0 < b.y0 + b.h && b.y0 < a.y0 + a.h;
}

bool fits(const Rect& r, const std::vector<Rect>& placed) {
  for (const Rect& p : placed) {
    if (overlaps(r, p)) return false;
  }
  return true;
}

Rect place_region(Rng& rng, int grid, int rmin, int rmax, const std::vector<Rect>& placed) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Rect r;
    r.w = rmin + rng.uniform_int(rmax - rmin + 1);
    r.h = rmin + rng.uniform_int(rmax - rmin + 1);
    r.x0 = rng.uniform_int(grid - r.w + 1);
    r.y0 = rng.uniform_int(grid - r.h + 1);
    if (fits(r, placed)) return r;
  }
  // Deterministic fallback: smallest region at the first free slot.
  Rect r;
  r.w = rmin;
  r.h = rmin;
  for (r.y0 = 0; r.y0 + r.h <= grid; ++r.y0) {
    for (r.x0 = 0; r.x0 + r.w <= grid; ++r.x0) {
      if (fits(r, placed)) return r;
    }
  }
  throw ConfigError("synthetic generator: grid too small for the region count");
}

Sample generate_sample(const DataConfig& cfg, Rng& rng) {
  Sample s;
  s.labels = Matrix(cfg.grid_size, cfg.grid_size);
  std::vector<Rect> placed;
  for (int cls = 1; cls < cfg.num_classes; ++cls) {
    Rect r = place_region(rng, cfg.grid_size, cfg.region_min, cfg.region_max, placed);
    placed.push_back(r);
    for (int y = r.y0; y < r.y0 + r.h; ++y) {
      for (int x = r.x0; x < r.x0 + r.w; ++x) s.labels.at(y, x) = cls;
    }
  }

  for (int m = 0; m < cfg.num_modalities; ++m) {
    Matrix grid(cfg.grid_size, cfg.grid_size);
    for (int y = 0; y < cfg.grid_size; ++y) {
      for (int x = 0; x < cfg.grid_size; ++x) {
        int cls = static_cast<int>(s.labels.at(y, x));
        double v = 0.0;
        if (cls != 0) v = (cls - 1 == m) ? 1.0 : cfg.off_contrast;
        if (cfg.noise_level > 0.0) v += rng.normal(0.0, cfg.noise_level);
        grid.at(y, x) = v;
      }
    }
    s.inputs.push_back(std::move(grid));
  }
  return s;
}

}  // namespace

void DataConfig::validate() const {
  if (grid_size < 2) throw ConfigError("grid_size must be at least 2");
  if (num_modalities < 1 || num_modalities > 32) {
    throw ConfigError("num_modalities must be in [1, 32]");
  }
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (num_classes > num_modalities + 1) {
    throw ConfigError("each non-background class needs an assigned modality");
  }
  if (sample_count < 1) throw ConfigError("sample_count must be positive");
  if (noise_level < 0.0) throw ConfigError("noise_level must be non-negative");
  if (region_min < 1 || region_max < region_min || region_max > grid_size) {
    throw ConfigError("region bounds must satisfy 1 <= min <= max <= grid_size");
  }
}

Dataset generate_synthetic(const DataConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.samples.reserve(static_cast<size_t>(cfg.sample_count));
  for (int i = 0; i < cfg.sample_count; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<unsigned long>(i)));
    ds.samples.push_back(generate_sample(cfg, rng));
  }
  return ds;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  std::string mpath = dir + "/manifest.txt";
  std::ofstream manifest(mpath);
  if (!manifest) throw ConfigError("cannot write " + mpath);
  manifest.precision(std::numeric_limits<double>::max_digits10);
  manifest << "hetgat-dataset 1\n";
  manifest << "grid_size " << ds.config.grid_size << "\n";
  manifest << "num_modalities " << ds.config.num_modalities << "\n";
  manifest << "num_classes " << ds.config.num_classes << "\n";
  manifest << "sample_count " << ds.config.sample_count << "\n";
  manifest << "seed " << ds.config.seed << "\n";
  manifest << "noise_level " << ds.config.noise_level << "\n";
  manifest << "off_contrast " << ds.config.off_contrast << "\n";
  manifest << "region_min " << ds.config.region_min << "\n";
  manifest << "region_max " << ds.config.region_max << "\n";

  std::string bpath = dir + "/samples.bin";
  std::ofstream bin(bpath, std::ios::binary);
  if (!bin) throw ConfigError("cannot write " + bpath);
  for (const Sample& s : ds.samples) {
    for (const Matrix& grid : s.inputs) {
      write_doubles_le(bin, grid.data(), grid.size());
    }
    write_doubles_le(bin, s.labels.data(), s.labels.size());
  }
  if (!bin) throw ConfigError("short write to " + bpath);
}

Dataset load_dataset(const std::string& dir) {
  std::string mpath = dir + "/manifest.txt";
  std::ifstream manifest(mpath);
  if (!manifest) throw ConfigError("cannot read " + mpath);
  std::string magic;
  int version = 0;
  manifest >> magic >> version;
  if (magic != "hetgat-dataset" || version != 1) {
    throw ConfigError("bad dataset manifest: " + mpath);
  }

  Dataset ds;
  std::string key;
  while (manifest >> key) {
    if (key == "grid_size") {
      manifest >> ds.config.grid_size;
    } else if (key == "num_modalities") {
      manifest >> ds.config.num_modalities;
    } else if (key == "num_classes") {
      manifest >> ds.config.num_classes;
    } else if (key == "sample_count") {
      manifest >> ds.config.sample_count;
    } else if (key == "seed") {
      manifest >> ds.config.seed;
    } else if (key == "noise_level") {
      manifest >> ds.config.noise_level;
    } else if (key == "off_contrast") {
      manifest >> ds.config.off_contrast;
    } else if (key == "region_min") {
      manifest >> ds.config.region_min;
    } else if (key == "region_max") {
      manifest >> ds.config.region_max;
    } else {
      throw ConfigError("unknown dataset manifest key: " + key);
    }
    if (!manifest) throw ConfigError("bad value in " + mpath);
  }
  ds.config.validate();

  std::string bpath = dir + "/samples.bin";
  std::ifstream bin(bpath, std::ios::binary);
  if (!bin) throw ConfigError("cannot read " + bpath);
  int s2 = ds.config.grid_size;
  for (int i = 0; i < ds.config.sample_count; ++i) {
    Sample s;
    for (int m = 0; m < ds.config.num_modalities; ++m) {
      Matrix grid(s2, s2);
      read_doubles_le(bin, grid.data(), grid.size());
      s.inputs.push_back(std::move(grid));
    }
    s.labels = Matrix(s2, s2);
    read_doubles_le(bin, s.labels.data(), s.labels.size());
    if (!bin) throw ConfigError("short read from " + bpath);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace hetgat
