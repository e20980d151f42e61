// SPDX-License-Identifier: Apache-2.0
//
// Timing comparison of the serial and OpenMP kernel paths, plus a
// model-level forward and forward+backward measurement under each execution
// mode. The two paths are required to produce bitwise identical results, so
// every row also reports an equality check. On a single hardware thread the
// speedup column sits near 1.0 by construction.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "hetgat/config.hpp"
#include "hetgat/kernels.hpp"
#include "hetgat/rng.hpp"
#include "hetgat/segmentation.hpp"

using namespace hetgat;
using Clock = std::chrono::steady_clock;

namespace {

double time_call(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(Clock::now() - start).count() / reps;
}

std::vector<double> random_block(Rng& rng, long n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void print_row(const std::string& name, const std::string& size, double serial_s,
               double parallel_s, bool identical) {
  std::cout << std::left << std::setw(16) << name << std::setw(14) << size << std::right
            << std::fixed << std::setprecision(3) << std::setw(12) << serial_s * 1e3
            << " ms" << std::setw(12) << parallel_s * 1e3 << " ms" << std::setw(9)
            << std::setprecision(2) << serial_s / parallel_s << "x"
            << std::setw(11) << (identical ? "yes" : "NO") << "\n";
}

void bench_matmul(Rng& rng) {
  struct Variant {
    const char* name;
    void (*serial)(const double*, const double*, double*, int, int, int);
    void (*parallel)(const double*, const double*, double*, int, int, int);
  };
  const Variant variants[] = {
      {"mm_nn", kern::serial::mm_nn, kern::par::mm_nn},
      {"mm_nt", kern::serial::mm_nt, kern::par::mm_nt},
      {"mm_tn", kern::serial::mm_tn, kern::par::mm_tn},
  };
  for (const Variant& v : variants) {
    for (int n : {64, 128, 256, 512}) {
      std::vector<double> a = random_block(rng, static_cast<long>(n) * n);
      std::vector<double> b = random_block(rng, static_cast<long>(n) * n);
      std::vector<double> c1(a.size()), c2(a.size());
      long flops = 2L * n * n * n;
      int reps = static_cast<int>(std::max(3L, std::min(500L, 250000000L / flops)));
      double ts = time_call([&] { v.serial(a.data(), b.data(), c1.data(), n, n, n); }, reps);
      double tp = time_call([&] { v.parallel(a.data(), b.data(), c2.data(), n, n, n); }, reps);
      bool same = std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(double)) == 0;
      print_row(v.name, std::to_string(n) + "^3", ts, tp, same);
    }
  }
}

void bench_softmax(Rng& rng) {
  const int rows = 4096;
  const int cols = 64;
  std::vector<double> logits = random_block(rng, static_cast<long>(rows) * cols);
  std::vector<double> o1(logits.size()), o2(logits.size());
  double ts = time_call([&] { kern::serial::softmax_rows(logits.data(), o1.data(), rows, cols); }, 50);
  double tp = time_call([&] { kern::par::softmax_rows(logits.data(), o2.data(), rows, cols); }, 50);
  bool same = std::memcmp(o1.data(), o2.data(), o1.size() * sizeof(double)) == 0;
  print_row("softmax_rows", "4096x64", ts, tp, same);

  std::vector<std::uint8_t> mask(logits.size());
  for (std::uint8_t& m : mask) m = rng.uniform01() < 0.7 ? 1 : 0;
  for (MaskMode mode : {MaskMode::Hard, MaskMode::Soft}) {
    auto run = [&](bool parallel, std::vector<double>& out) {
      auto fn = parallel ? kern::par::softmax_rows_masked : kern::serial::softmax_rows_masked;
      fn(logits.data(), mask.data(), out.data(), rows, cols, mode, -1e4, true);
    };
    ts = time_call([&] { run(false, o1); }, 50);
    tp = time_call([&] { run(true, o2); }, 50);
    same = std::memcmp(o1.data(), o2.data(), o1.size() * sizeof(double)) == 0;
    print_row(mode == MaskMode::Hard ? "masked hard" : "masked soft", "4096x64", ts, tp, same);
  }
}

void bench_model() {
  RunConfig cfg;
  cfg.num_modalities = 4;
  cfg.num_classes = 5;
  cfg.grid_size = 16;
  cfg.basic_per_modality = 2;
  cfg.virtual_per_modality = 1;
  cfg.heads = 2;
  cfg.feature_len = 64;
  cfg.enc_hidden = 384;
  cfg.dec_hidden = 384;
  cfg.sample_count = 1;
  cfg.validate();
  ModelConfig model = cfg.model_config();
  Dataset data = generate_synthetic(cfg.data_config());
  const Sample& sample = data.samples.front();
  ModalityMask mask = ModalityMask::all_available(cfg.num_modalities);

  ParamBundle params;
  Rng rng(7);
  init_model_params(model, rng, params);

  auto forward = [&] {
    Tape t(false);
    Binder bind(t, params, false);
    total_loss(t, sample, mask, bind, model);
  };
  auto forward_backward = [&] {
    Tape t(true);
    Binder bind(t, params, true);
    LossParts parts = total_loss(t, sample, mask, bind, model);
    t.backward(parts.total);
  };
  auto loss_value = [&] {
    Tape t(false);
    Binder bind(t, params, false);
    LossParts parts = total_loss(t, sample, mask, bind, model);
    return t.value(parts.total);
  };

  kern::set_exec(kern::Exec::Serial);
  Matrix loss_serial = loss_value();
  kern::set_exec(kern::Exec::Parallel);
  Matrix loss_parallel = loss_value();
  bool same = loss_serial.size() == loss_parallel.size() &&
              std::memcmp(loss_serial.data(), loss_parallel.data(),
                          static_cast<size_t>(loss_serial.size()) * sizeof(double)) == 0;

  for (bool with_backward : {false, true}) {
    std::function<void()> work = forward;
    if (with_backward) work = forward_backward;
    kern::set_exec(kern::Exec::Serial);
    double ts = time_call(work, 10);
    kern::set_exec(kern::Exec::Parallel);
    double tp = time_call(work, 10);
    print_row(with_backward ? "model fwd+bwd" : "model forward", "16x16 grid", ts, tp, same);
  }
}

}  // namespace

int main() {
  std::cout << "OpenMP max threads: " << omp_get_max_threads() << "\n";
  std::cout << std::left << std::setw(16) << "kernel" << std::setw(14) << "size"
            << std::right << std::setw(15) << "serial" << std::setw(15) << "parallel"
            << std::setw(10) << "speedup" << std::setw(11) << "identical" << "\n";
  Rng rng(1);
  bench_matmul(rng);
  bench_softmax(rng);
  bench_model();
  return 0;
}
