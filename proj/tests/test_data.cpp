// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "hetgat/data.hpp"

using namespace hetgat;

namespace {

bool same_sample(const Sample& a, const Sample& b) {
  if (a.inputs.size() != b.inputs.size()) return false;
  for (size_t m = 0; m < a.inputs.size(); ++m) {
    if (max_abs_diff(a.inputs[m], b.inputs[m]) != 0.0) return false;
  }
  return max_abs_diff(a.labels, b.labels) == 0.0;
}

std::string temp_dir(const char* leaf) {
  return (std::filesystem::temp_directory_path() / leaf).string();
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("generation is deterministic in the seed") {
  DataConfig cfg;
  cfg.sample_count = 4;
  cfg.noise_level = 0.3;
  Dataset a = generate_synthetic(cfg);
  Dataset b = generate_synthetic(cfg);
  REQUIRE(a.samples.size() == 4);
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(same_sample(a.samples[i], b.samples[i]));
  }
  cfg.seed = 2;
  Dataset c = generate_synthetic(cfg);
  CHECK_FALSE(same_sample(a.samples[0], c.samples[0]));
}

TEST_CASE("samples do not depend on how many follow them") {
  DataConfig cfg;
  cfg.sample_count = 3;
  cfg.noise_level = 0.2;
  Dataset shorter = generate_synthetic(cfg);
  cfg.sample_count = 8;
  Dataset longer = generate_synthetic(cfg);
  for (size_t i = 0; i < shorter.samples.size(); ++i) {
    CHECK(same_sample(shorter.samples[i], longer.samples[i]));
  }
}

TEST_CASE("noise-free grids are exactly separable per assigned modality") {
  DataConfig cfg;
  cfg.sample_count = 6;
  Dataset ds = generate_synthetic(cfg);
  for (const Sample& s : ds.samples) {
    for (int y = 0; y < cfg.grid_size; ++y) {
      for (int x = 0; x < cfg.grid_size; ++x) {
        int cls = static_cast<int>(s.labels.at(y, x));
        REQUIRE(cls >= 0);
        REQUIRE(cls < cfg.num_classes);
        for (int m = 0; m < cfg.num_modalities; ++m) {
          double v = s.inputs[static_cast<size_t>(m)].at(y, x);
          if (cls == 0) {
            CHECK(v == 0.0);
          } else if (cls - 1 == m) {
            CHECK(v == 1.0);
          } else {
            CHECK(v == cfg.off_contrast);
          }
        }
      }
    }
  }
}

TEST_CASE("every foreground class covers one rectangle worth of pixels") {
  DataConfig cfg;
  cfg.sample_count = 10;
  Dataset ds = generate_synthetic(cfg);
  int lo = cfg.region_min * cfg.region_min;
  int hi = cfg.region_max * cfg.region_max;
  for (const Sample& s : ds.samples) {
    std::vector<int> count(static_cast<size_t>(cfg.num_classes), 0);
    for (long i = 0; i < s.labels.size(); ++i) {
      ++count[static_cast<size_t>(s.labels.data()[i])];
    }
    for (int cls = 1; cls < cfg.num_classes; ++cls) {
      CHECK(count[static_cast<size_t>(cls)] >= lo);
      CHECK(count[static_cast<size_t>(cls)] <= hi);
    }
  }
}

TEST_CASE("noise moves intensities but never labels") {
  DataConfig cfg;
  cfg.sample_count = 2;
  Dataset clean = generate_synthetic(cfg);
  cfg.noise_level = 0.4;
  Dataset noisy = generate_synthetic(cfg);
  for (size_t i = 0; i < clean.samples.size(); ++i) {
    CHECK(max_abs_diff(clean.samples[i].labels, noisy.samples[i].labels) == 0.0);
    CHECK(max_abs_diff(clean.samples[i].inputs[0], noisy.samples[i].inputs[0]) > 0.0);
  }
}

TEST_CASE("save and load round-trip bitwise") {
  DataConfig cfg;
  cfg.sample_count = 3;
  cfg.noise_level = 0.25;
  cfg.seed = 7;
  Dataset ds = generate_synthetic(cfg);
  std::string dir = temp_dir("hetgat_data_roundtrip");
  std::filesystem::remove_all(dir);
  save_dataset(dir, ds);
  Dataset back = load_dataset(dir);
  CHECK(back.config.grid_size == cfg.grid_size);
  CHECK(back.config.sample_count == cfg.sample_count);
  CHECK(back.config.seed == cfg.seed);
  CHECK(back.config.noise_level == cfg.noise_level);
  REQUIRE(back.samples.size() == ds.samples.size());
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(same_sample(ds.samples[i], back.samples[i]));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation rejects impossible class assignments") {
  DataConfig cfg;
  cfg.num_modalities = 2;
  cfg.num_classes = 4;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
  cfg.num_classes = 3;
  CHECK_NOTHROW(generate_synthetic(cfg));
  cfg.region_max = cfg.grid_size + 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

TEST_CASE("tiny grids that cannot host every region are rejected at placement") {
  DataConfig cfg;
  cfg.grid_size = 4;
  cfg.region_min = 3;
  cfg.region_max = 3;
  cfg.num_modalities = 4;
  cfg.num_classes = 5;
  cfg.sample_count = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

}
