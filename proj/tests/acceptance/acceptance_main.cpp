// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL]
// line with its wall time; the process exits zero only when all pass. The
// two trained criteria (8 and 9) use fixed operating points and seeds that
// were chosen before the thresholds were locked in, so reruns are exact.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hetgat/adjacency_oracle.hpp"
#include "hetgat/cli.hpp"
#include "hetgat/config.hpp"
#include "hetgat/gat_layer.hpp"
#include "hetgat/optimizer.hpp"
#include "hetgat/subset_eval.hpp"
#include "hetgat/trainer.hpp"
#include "reference_gat.hpp"

namespace {

using namespace hetgat;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}

Matrix random_matrix(Rng& rng, int rows, int cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

void randomize_params(ParamBundle& params, Rng& rng, double range) {
  for (auto& tensor : params.tensors())
    for (long i = 0; i < tensor.value.size(); ++i)
      tensor.value.data()[i] = rng.uniform(-range, range);
}

Matrix layer_output(const GatConfig& cfg, const ParamBundle& params,
                    const std::vector<Matrix>& basic_blocks, const ModalityMask& mask) {
  Tape t(false);
  Binder bind(t, params, false);
  std::vector<Var> blocks;
  blocks.reserve(basic_blocks.size());
  for (const Matrix& b : basic_blocks) blocks.push_back(t.constant(b));
  Var out = gat_forward(t, blocks, mask, bind, cfg);
  return t.value(out);
}

// Criterion 1: every adjacency the library builds, across graph shapes and
// availability masks, must match the independent per-edge rule evaluator.
Outcome check_adjacency_oracle() {
  long pairs = 0;
  long entries = 0;
  for (int n = 1; n <= 4; ++n) {
    for (int c = 1; c <= 4; ++c) {
      for (int cp = 0; cp <= 2; ++cp) {
        GraphSpec spec;
        spec.num_modalities = n;
        spec.basic_per_modality = c;
        spec.virtual_per_modality = cp;
        spec.feature_len = 1;
        AdjacencyMatrix full = build_full_adjacency(spec);
        for (const ModalityMask& mask : enumerate_subsets(n)) {
          AdjacencyMatrix built = apply_modality_mask(full, mask, spec);
          AdjacencyMatrix oracle = verify::oracle_adjacency(spec, mask);
          int total = spec.total_nodes();
          for (int i = 0; i < total; ++i) {
            for (int j = 0; j < total; ++j) {
              if (built.at(i, j) != oracle.at(i, j)) {
                std::ostringstream msg;
                msg << "mismatch at N=" << n << " C=" << c << " Cp=" << cp << " mask="
                    << mask.to_string() << " entry (" << i << ", " << j << ")";
                return {false, msg.str()};
              }
            }
          }
          ++pairs;
          entries += static_cast<long>(total) * total;
        }
      }
    }
  }
  std::ostringstream msg;
  msg << pairs << " graph/mask pairs, " << entries << " entries compared";
  return {true, msg.str()};
}

// Criterion 2: overwriting the dropped modalities' inputs with huge garbage
// must not change the layer output. Hard masking has to be bit-identical;
// soft masking may move by the documented leakage bound.
Outcome check_masking_invariance() {
  Rng rng(41);
  double worst_soft = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    GatConfig cfg;
    cfg.num_modalities = 4;
    cfg.basic_per_modality = 2;
    cfg.virtual_per_modality = 1;
    cfg.feature_in = 3 + trial % 4;
    cfg.feature_out = cfg.feature_in;
    cfg.heads = 1 + trial % 2;
    cfg.mask_mode = trial < 50 ? MaskMode::Hard : MaskMode::Soft;
    cfg.validate();

    ParamBundle params;
    Rng init(derive_seed(77, static_cast<std::uint64_t>(trial)));
    init_gat_params(cfg, init, params);
    randomize_params(params, init, 1.0);

    std::vector<ModalityMask> subsets = enumerate_subsets(cfg.num_modalities);
    ModalityMask mask = subsets[static_cast<size_t>(rng.uniform_int(
        static_cast<int>(subsets.size()) - 1))];  // the full set is last

    std::vector<Matrix> clean;
    for (int m = 0; m < cfg.num_modalities; ++m)
      clean.push_back(random_matrix(rng, cfg.basic_per_modality, cfg.feature_in, -1.5, 1.5));
    std::vector<Matrix> garbage = clean;
    for (int m = 0; m < cfg.num_modalities; ++m) {
      if (mask.available(m)) continue;
      garbage[static_cast<size_t>(m)] =
          random_matrix(rng, cfg.basic_per_modality, cfg.feature_in, -1e6, 1e6);
    }

    Matrix a = layer_output(cfg, params, clean, mask);
    Matrix b = layer_output(cfg, params, garbage, mask);
    for (long i = 0; i < a.size(); ++i) {
      double diff = std::abs(a.data()[i] - b.data()[i]);
      if (cfg.mask_mode == MaskMode::Hard) {
        if (a.data()[i] != b.data()[i]) {
          std::ostringstream msg;
          msg << "hard trial " << trial << " mask " << mask.to_string()
              << " differs by " << diff;
          return {false, msg.str()};
        }
      } else {
        worst_soft = std::max(worst_soft, diff);
        if (diff > 1e-9) {
          std::ostringstream msg;
          msg << "soft trial " << trial << " mask " << mask.to_string()
              << " differs by " << diff;
          return {false, msg.str()};
        }
      }
    }
  }
  std::ostringstream msg;
  msg << "50 hard trials bit-identical, 50 soft trials within 1e-9 (worst "
      << fmt(worst_soft, 3) << ")";
  return {true, msg.str()};
}

// Criterion 3: attention rows must be probability distributions under every
// availability mask and both masking modes.
Outcome check_attention_rows() {
  Rng rng(59);
  long rows_checked = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    GatConfig cfg;
    cfg.num_modalities = 4;
    cfg.basic_per_modality = 1 + inst % 3;
    cfg.virtual_per_modality = inst % 3;
    cfg.feature_in = 3 + inst % 4;
    cfg.feature_out = cfg.feature_in;
    cfg.heads = 1 + inst % 2;
    cfg.mask_mode = inst % 2 == 0 ? MaskMode::Hard : MaskMode::Soft;
    cfg.validate();
    GraphSpec spec = cfg.graph();

    ParamBundle params;
    Rng init(derive_seed(91, static_cast<std::uint64_t>(inst)));
    init_gat_params(cfg, init, params);
    randomize_params(params, init, 1.0);

    Matrix nodes = random_matrix(rng, spec.total_nodes(), cfg.feature_in, -2.0, 2.0);
    AdjacencyMatrix full = build_full_adjacency(spec);

    Tape t(false);
    Binder bind(t, params, false);
    Var node_var = t.constant(nodes);
    for (int head = 0; head < cfg.heads; ++head) {
      Var logits = attention_logits(t, node_var, bind, cfg, head);
      for (const ModalityMask& mask : enumerate_subsets(cfg.num_modalities)) {
        AdjacencyMatrix adj = apply_modality_mask(full, mask, spec);
        Var weights = attention_weights(t, logits, adj, cfg.mask_mode, cfg.soft_logit);
        const Matrix& w = t.value(weights);
        for (int i = 0; i < w.rows(); ++i) {
          double sum = 0.0;
          for (int j = 0; j < w.cols(); ++j) sum += w.at(i, j);
          double err = std::abs(sum - 1.0);
          worst = std::max(worst, err);
          if (err > 1e-12) {
            std::ostringstream msg;
            msg << "instance " << inst << " head " << head << " mask "
                << mask.to_string() << " row " << i << " sums to " << fmt(sum, 17);
            return {false, msg.str()};
          }
          ++rows_checked;
        }
      }
    }
  }
  std::ostringstream msg;
  msg << rows_checked << " rows sum to 1 within 1e-12 (worst " << fmt(worst, 3) << ")";
  return {true, msg.str()};
}

// Criterion 4: the command-line gradient check must pass its per-group
// relative-error gates in both mask modes, with and without virtual nodes.
Outcome check_gradients() {
  int with_virtual = run_cli({"gradcheck"});
  int without_virtual = run_cli({"gradcheck", "--no-virtual"});
  std::ostringstream msg;
  msg << "gradcheck exit " << with_virtual << ", gradcheck --no-virtual exit "
      << without_virtual << " (tables above)";
  return {with_virtual == 0 && without_virtual == 0, msg.str()};
}

// Criterion 5: with one shared weight slot and the full graph, the layer
// must reproduce an independently written plain attention network.
Outcome check_tied_reduction() {
  Rng rng(67);
  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    GatConfig cfg;
    cfg.num_modalities = 2 + inst % 3;
    cfg.basic_per_modality = 1 + inst % 3;
    cfg.virtual_per_modality = inst % 2;
    cfg.feature_in = 3 + inst % 4;
    cfg.feature_out = 3 + (inst + 1) % 4;
    cfg.heads = 1 + inst % 2;
    cfg.tied_weights = true;
    cfg.out_activation = inst % 3 == 0   ? Activation::Elu
                         : inst % 3 == 1 ? Activation::Sigmoid
                                         : Activation::Identity;
    cfg.validate();
    GraphSpec spec = cfg.graph();

    ParamBundle params;
    Rng init(derive_seed(113, static_cast<std::uint64_t>(inst)));
    init_gat_params(cfg, init, params);
    randomize_params(params, init, 0.8);

    Matrix nodes = random_matrix(rng, spec.total_nodes(), cfg.feature_in, -1.5, 1.5);
    AdjacencyMatrix adj = build_full_adjacency(spec);

    Tape t(false);
    Binder bind(t, params, false);
    Var out = multi_head_update(t, t.constant(nodes), adj, bind, cfg);
    const Matrix& got = t.value(out);

    std::vector<testing::ReferenceGatHead> heads;
    for (int k = 0; k < cfg.heads; ++k)
      heads.push_back({params.get(cfg.w_name(k, 0)), params.get(cfg.a_name(k, 0))});
    Matrix want = testing::reference_gat_forward(nodes, adj, heads, cfg.leaky_slope,
                                                 cfg.out_activation);

    for (long i = 0; i < got.size(); ++i) {
      double err = std::abs(got.data()[i] - want.data()[i]);
      worst = std::max(worst, err);
      if (err > 1e-10) {
        std::ostringstream msg;
        msg << "instance " << inst << " differs by " << fmt(err, 3);
        return {false, msg.str()};
      }
    }
  }
  std::ostringstream msg;
  msg << "20 instances within 1e-10 of the reference (worst " << fmt(worst, 3) << ")";
  return {true, msg.str()};
}

// Criterion 6: one Adam update against the hand-derived closed form, and the
// cosine schedule at its three exact points.
Outcome check_optimizer_closed_forms() {
  ParamBundle params;
  Matrix x(1, 1);
  x.at(0, 0) = 1.0;
  params.add("x", x);
  AdamState opt(params);
  Matrix g(1, 1);
  g.at(0, 0) = 2.0;
  opt.apply(params, {{"x", g}}, 0.1);
  // After one step the bias-corrected moments are exactly 2 and 4, so the
  // update is 0.1 * 2 / (sqrt(4) + eps).
  double expected = 1.0 - 0.1 * (2.0 / (2.0 + 1e-8));
  double got = params.get("x").at(0, 0);
  if (std::abs(got - expected) > 1e-12) {
    std::ostringstream msg;
    msg << "Adam step gave " << fmt(got, 17) << ", closed form " << fmt(expected, 17);
    return {false, msg.str()};
  }

  const double lr0 = 2e-4;
  const double lr_min = 1e-5;
  const long total = 100;
  double mid_expected = lr_min + 0.5 * (lr0 - lr_min);
  if (cosine_lr(0, total, lr0, lr_min) != lr0 ||
      cosine_lr(total, total, lr0, lr_min) != lr_min ||
      cosine_lr(total / 2, total, lr0, lr_min) != mid_expected) {
    return {false, "cosine schedule misses an exact endpoint or midpoint"};
  }
  std::ostringstream msg;
  msg << "Adam step within 1e-12 of " << fmt(expected, 10)
      << "; cosine exact at start, midpoint, end";
  return {true, msg.str()};
}

// Criterion 7: the training-time dropout draw must be uniform over drop
// counts and, given a count, uniform over the subsets of that size.
Outcome check_dropout_distribution() {
  const int n = 4;
  const long draws = 100000;
  DropoutPolicy policy;
  policy.num_modalities = n;
  Rng rng(123);
  std::vector<long> count_hits(static_cast<size_t>(n), 0);
  std::vector<long> subset_hits(1u << n, 0);
  for (long i = 0; i < draws; ++i) {
    ModalityMask mask = sample_dropout(policy, rng);
    int dropped = n - mask.count();
    ++count_hits[static_cast<size_t>(dropped)];
    ++subset_hits[mask.bits];
  }
  double worst_count = 0.0;
  for (int d = 0; d < n; ++d) {
    double freq = static_cast<double>(count_hits[static_cast<size_t>(d)]) / draws;
    worst_count = std::max(worst_count, std::abs(freq - 0.25));
    if (std::abs(freq - 0.25) > 0.01) {
      std::ostringstream msg;
      msg << "drop count " << d << " frequency " << fmt(freq, 4) << " vs 0.25";
      return {false, msg.str()};
    }
  }
  const double choose[] = {1.0, 4.0, 6.0, 4.0};
  double worst_subset = 0.0;
  for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
    ModalityMask mask{n, bits};
    int dropped = n - mask.count();
    if (dropped == 0) continue;
    double conditional = static_cast<double>(subset_hits[bits]) /
                         static_cast<double>(count_hits[static_cast<size_t>(dropped)]);
    double target = 1.0 / choose[dropped];
    worst_subset = std::max(worst_subset, std::abs(conditional - target));
    if (std::abs(conditional - target) > 0.02) {
      std::ostringstream msg;
      msg << "subset " << mask.to_string() << " conditional " << fmt(conditional, 4)
          << " vs " << fmt(target, 4);
      return {false, msg.str()};
    }
  }
  std::ostringstream msg;
  msg << draws << " draws; count error " << fmt(worst_count, 3) << " (gate 0.01), subset error "
      << fmt(worst_subset, 3) << " (gate 0.02)";
  return {true, msg.str()};
}

// Criterion 8: a fixed end-to-end run must clear the dice floors with every
// modality present and with each modality alone.
Outcome check_trained_dice_floors() {
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
  cfg.total_steps = 2000;
  cfg.lr0 = 1e-3;
  cfg.lr_min = 1e-5;
  cfg.seed = 1;
  cfg.sample_count = 12;
  cfg.data_seed = 100;
  cfg.region_min = 4;
  cfg.validate();

  Dataset data = generate_synthetic(cfg.data_config());
  TrainResult result = train(cfg.train_config(), data);
  SubsetReport report = evaluate_subsets(result.params, cfg.model_config(), data);

  const SubsetRow& full = report.row_for(ModalityMask::all_available(4));
  bool pass = full.mean >= 0.90;
  std::ostringstream msg;
  msg << "full-input mean dice " << fmt(full.mean) << " (floor 0.90); single-modality"
      << " assigned-class dice";
  for (int m = 0; m < 4; ++m) {
    const SubsetRow& solo = report.row_for(ModalityMask::from_indices(4, {m}));
    double dice = solo.class_dice[static_cast<size_t>(m)];
    pass = pass && dice >= 0.80;
    msg << (m == 0 ? " " : "/") << fmt(dice);
  }
  msg << " (floor 0.80)";
  return {pass, msg.str()};
}

// Criterion 9: on a fixed operating point and three fixed seeds, the full
// model must beat its no-virtual-nodes ablation on the mean dice over
// incomplete availability subsets in at least two seeds.
Outcome check_virtual_node_ablation() {
  RunConfig base;
  base.num_modalities = 4;
  base.num_classes = 5;
  base.grid_size = 12;
  base.basic_per_modality = 1;
  base.virtual_per_modality = 1;
  base.heads = 2;
  base.feature_len = 32;
  base.enc_hidden = 128;
  base.dec_hidden = 128;
  base.total_steps = 800;
  base.lr0 = 1e-3;
  base.lr_min = 1e-5;
  base.sample_count = 8;
  base.data_seed = 300;
  base.noise_level = 0.3;
  base.region_max = 4;
  base.validate();

  Dataset data = generate_synthetic(base.data_config());
  auto missing_mean = [&](const RunConfig& cfg) {
    TrainResult result = train(cfg.train_config(), data);
    SubsetReport report = evaluate_subsets(result.params, cfg.model_config(), data);
    double total = 0.0;
    int rows = 0;
    for (const SubsetRow& row : report.rows) {
      if (row.mask.full()) continue;
      total += row.mean;
      ++rows;
    }
    return total / rows;
  };

  int wins = 0;
  std::ostringstream msg;
  for (unsigned long seed : {1ul, 2ul, 3ul}) {
    RunConfig with_virtual = base;
    with_virtual.seed = seed;
    RunConfig without_virtual = with_virtual;
    without_virtual.no_virtual = true;
    double a = missing_mean(with_virtual);
    double b = missing_mean(without_virtual);
    if (a >= b) ++wins;
    if (seed > 1) msg << ", ";
    msg << "seed " << seed << ": with " << fmt(a) << " vs without " << fmt(b);
  }
  msg << "; virtual nodes ahead in " << wins << "/3 seeds";
  return {wins >= 2, msg.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "masked adjacency matches the brute-force edge oracle", check_adjacency_oracle},
      {2, "layer output ignores garbage on dropped modalities", check_masking_invariance},
      {3, "attention rows stay normalized under every availability mask", check_attention_rows},
      {4, "analytic gradients match finite differences in both mask modes", check_gradients},
      {5, "tied-weight layer reproduces the plain attention reference", check_tied_reduction},
      {6, "Adam step and cosine schedule match their closed forms",
       check_optimizer_closed_forms},
      {7, "modality dropout is uniform over drop counts and subsets",
       check_dropout_distribution},
      {8, "trained model clears the dice floors on full and single inputs",
       check_trained_dice_floors},
      {9, "virtual nodes improve missing-modality dice on fixed seeds",
       check_virtual_node_ablation},
  };

  auto suite_start = Clock::now();
  int passed = 0;
  for (const Criterion& c : criteria) {
    auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": "
              << c.label << " -- " << outcome.detail << " [" << fmt(seconds, 3) << " s]\n"
              << std::flush;
    if (outcome.pass) ++passed;
  }
  double total = std::chrono::duration<double>(Clock::now() - suite_start).count();
  std::cout << "acceptance: " << passed << "/" << criteria.size() << " criteria passed ["
            << fmt(total, 3) << " s]\n";
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
