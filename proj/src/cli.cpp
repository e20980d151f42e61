// SPDX-License-Identifier: Apache-2.0
#include "hetgat/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetgat/adjacency_oracle.hpp"
#include "hetgat/config.hpp"
#include "hetgat/gradcheck.hpp"
#include "hetgat/subset_eval.hpp"
#include "hetgat/trainer.hpp"

namespace hetgat {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitProperty = 3;

RunConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  return parse_run_config(config_path);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::istringstream item(tok);
    T v{};
    item >> v;
    if (!item || !(item >> std::ws).eof()) {
      throw ConfigError(std::string(what) + ": bad list entry \"" + tok + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

struct GenDataOptions {
  std::string config;
  std::string out;
  bool force = false;
};

int cmd_gen_data(const GenDataOptions& opt) {
  RunConfig cfg = load_or_default(opt.config);
  DataConfig dc = cfg.data_config();
  if (!opt.force && std::filesystem::exists(opt.out + "/manifest.txt")) {
    throw ConfigError("refusing to overwrite " + opt.out + " (pass --force)");
  }
  Dataset ds = generate_synthetic(dc);
  save_dataset(opt.out, ds);
  std::cout << "wrote " << ds.samples.size() << " samples (grid " << dc.grid_size
            << ", " << dc.num_modalities << " modalities, " << dc.num_classes
            << " classes) to " << opt.out << "\n";
  return kExitOk;
}

struct VerifyOptions {
  int max_modalities = 4;
  int max_basic = 4;
  int max_virtual = 2;
  std::vector<int> fault;  // row, col when given
};

int cmd_verify_adjacency(const VerifyOptions& opt) {
  if (opt.max_modalities < 1 || opt.max_basic < 1 || opt.max_virtual < 0) {
    throw ConfigError("verify-adjacency: bounds must be positive");
  }
  bool faulted = false;
  long instances = 0;
  long entries = 0;
  for (int n = 1; n <= opt.max_modalities; ++n) {
    for (int c = 1; c <= opt.max_basic; ++c) {
      for (int cp = 0; cp <= opt.max_virtual; ++cp) {
        GraphSpec spec;
        spec.num_modalities = n;
        spec.basic_per_modality = c;
        spec.virtual_per_modality = cp;
        AdjacencyMatrix full = build_full_adjacency(spec);
        for (const ModalityMask& mask : enumerate_subsets(n)) {
          AdjacencyMatrix lib = apply_modality_mask(full, mask, spec);
          if (!opt.fault.empty() && !faulted && opt.fault[0] < lib.size() &&
              opt.fault[1] < lib.size()) {
            lib.set(opt.fault[0], opt.fault[1], !lib.at(opt.fault[0], opt.fault[1]));
            faulted = true;
          }
          AdjacencyMatrix want = verify::oracle_adjacency(spec, mask);
          ++instances;
          entries += static_cast<long>(lib.size()) * lib.size();
          for (int i = 0; i < lib.size(); ++i) {
            for (int j = 0; j < lib.size(); ++j) {
              if (lib.at(i, j) != want.at(i, j)) {
                std::cout << "adjacency mismatch at N=" << n << " C=" << c
                          << " Cp=" << cp << " mask=" << mask.to_string()
                          << " entry (" << i << ", " << j << "): built "
                          << int(lib.at(i, j)) << ", rules say "
                          << int(want.at(i, j)) << "\n";
                return kExitProperty;
              }
            }
          }
        }
      }
    }
  }
  std::cout << "adjacency verified: " << instances << " topology/mask pairs, "
            << entries << " entries, all equal\n";
  return kExitOk;
}

struct GradCheckOptions {
  std::string mode = "both";
  bool no_virtual = false;
  unsigned long seed = 7;
  double step = 1e-6;
  double tol = 1e-6;
};

std::string param_group(const std::string& name) {
  if (name.rfind("enc/", 0) == 0) return "encoders";
  if (name.rfind("dec/spec", 0) == 0) return "decoder spec";
  if (name.rfind("dec/multi", 0) == 0) return "decoder multi";
  size_t off = name[0] == 'L' ? name.find('/') + 1 : 0;
  switch (name[off]) {
    case 'W': return "projections W";
    case 'a': return "attention a";
    case 'p': return "virtual rows p";
    default: return "other";
  }
}

int cmd_gradcheck(const GradCheckOptions& opt) {
  ModelConfig cfg;
  cfg.gat.num_modalities = 3;
  cfg.gat.basic_per_modality = 2;
  cfg.gat.virtual_per_modality = opt.no_virtual ? 0 : 1;
  cfg.gat.feature_in = 5;
  cfg.gat.feature_out = 5;
  cfg.gat.heads = 2;
  cfg.grid_size = 6;
  cfg.num_classes = 3;
  cfg.enc_hidden = 8;
  cfg.dec_hidden = 8;

  DataConfig dc;
  dc.grid_size = 6;
  dc.num_modalities = 3;
  dc.num_classes = 3;
  dc.sample_count = 1;
  dc.seed = opt.seed;
  dc.noise_level = 0.1;
  dc.region_min = 1;
  dc.region_max = 3;
  Dataset ds = generate_synthetic(dc);
  ModalityMask mask = ModalityMask::from_indices(3, {0, 2});

  std::vector<MaskMode> modes;
  if (opt.mode == "both" || opt.mode == "hard") modes.push_back(MaskMode::Hard);
  if (opt.mode == "both" || opt.mode == "soft") modes.push_back(MaskMode::Soft);
  if (modes.empty()) throw ConfigError("gradcheck: mode must be hard, soft or both");

  bool ok = true;
  for (MaskMode mode : modes) {
    cfg.gat.mask_mode = mode;
    const char* mode_name = mode == MaskMode::Hard ? "hard" : "soft";

    ParamBundle init;
    Rng rng(derive_seed(opt.seed, 1));
    init_model_params(cfg, rng, init);
    // A generic point: fresh zeros for biases and virtual rows would park
    // several activations exactly on their kinks.
    for (NamedTensor& nt : init.tensors()) {
      for (long i = 0; i < nt.value.size(); ++i) {
        nt.value.data()[i] = rng.uniform(-0.7, 0.7);
      }
    }

    std::vector<Matrix> values;
    std::vector<std::string> names;
    for (const NamedTensor& nt : init.tensors()) {
      names.push_back(nt.name);
      values.push_back(nt.value);
    }
    GradCheckReport report = finite_difference_check(
        values, names,
        [&](Tape& t, const std::vector<Var>& pvars) {
          Binder bind(t, init);
          for (size_t i = 0; i < names.size(); ++i) {
            bind.bind_existing(names[i], pvars[i]);
          }
          return total_loss(t, ds.samples[0], mask, bind, cfg).total;
        },
        opt.step);

    std::map<std::string, std::vector<const GradCheckEntry*>> groups;
    for (const GradCheckEntry& e : report.per_param) {
      groups[param_group(e.name)].push_back(&e);
    }
    for (const auto& [group, entries] : groups) {
      double norm_err = combined_norm_rel_err(entries);
      double entry_err = 0.0;
      std::string worst;
      for (const GradCheckEntry* e : entries) {
        if (e->max_rel_err >= entry_err) {
          entry_err = e->max_rel_err;
          worst = e->name;
        }
      }
      bool pass = norm_err < opt.tol;
      ok = ok && pass;
      std::cout << mode_name << " " << std::left << std::setw(14) << group
                << " norm " << std::scientific << std::setprecision(3) << norm_err
                << "  entrywise " << entry_err << std::defaultfloat << " (worst "
                << worst << ")" << (pass ? "" : "  FAIL") << "\n";
    }
    std::cout << mode_name << " overall: norm " << std::scientific
              << std::setprecision(3) << report.max_norm_rel_err << " ("
              << report.worst_norm_param << "), entrywise " << report.max_rel_err
              << " (" << report.worst_param << ")" << std::defaultfloat << "\n";
  }
  std::cout << (ok ? "gradcheck passed" : "gradcheck FAILED") << " at tolerance "
            << opt.tol << "\n";
  return ok ? kExitOk : kExitProperty;
}

struct TrainOptions {
  std::string config;
  std::string out;
  std::string data;
  bool force = false;
  bool no_virtual = false;
  bool static_graph = false;
  bool homogeneous = false;
  long steps = -1;
  long seed = -1;
};

int cmd_train(const TrainOptions& opt) {
  RunConfig cfg = load_or_default(opt.config);
  cfg.no_virtual = cfg.no_virtual || opt.no_virtual;
  cfg.static_full_graph = cfg.static_full_graph || opt.static_graph;
  cfg.homogeneous_weights = cfg.homogeneous_weights || opt.homogeneous;
  if (opt.steps >= 0) cfg.total_steps = opt.steps;
  if (opt.seed >= 0) cfg.seed = static_cast<unsigned long>(opt.seed);

  if (!opt.force && std::filesystem::exists(opt.out + "/model.manifest")) {
    throw ConfigError("refusing to overwrite " + opt.out + " (pass --force)");
  }

  Dataset ds;
  if (opt.data.empty()) {
    ds = generate_synthetic(cfg.data_config());
  } else {
    ds = load_dataset(opt.data);
    // Keep the echo faithful to the data actually trained on, so a later
    // eval without --data regenerates the same set.
    cfg.sample_count = ds.config.sample_count;
    cfg.data_seed = ds.config.seed;
    cfg.noise_level = ds.config.noise_level;
    cfg.off_contrast = ds.config.off_contrast;
    cfg.region_min = ds.config.region_min;
    cfg.region_max = ds.config.region_max;
  }
  cfg.validate();

  TrainConfig tc = cfg.train_config();
  tc.out_dir = opt.out;
  std::filesystem::create_directories(opt.out);
  echo_run_config(opt.out + "/config_echo.txt", cfg);

  TrainResult result = train(tc, ds);
  std::cout << "trained " << cfg.total_steps << " steps on " << ds.samples.size()
            << " samples, final loss " << std::setprecision(6)
            << result.loss_curve.back() << ", checkpoint in " << opt.out << "\n";
  return kExitOk;
}

struct EvalOptions {
  std::string run;
  std::string config;
  std::string data;
  std::string out;
};

void print_report(const SubsetReport& report) {
  std::cout << std::left << std::setw(12) << "available";
  for (size_t c = 0; c < report.mean_class.size(); ++c) {
    std::cout << std::setw(10) << ("class" + std::to_string(c + 1));
  }
  std::cout << "mean\n" << std::setprecision(4) << std::fixed;
  for (const SubsetRow& row : report.rows) {
    std::cout << std::setw(12) << row.mask.to_string();
    for (double d : row.class_dice) std::cout << std::setw(10) << d;
    std::cout << row.mean << "\n";
  }
  std::cout << std::setw(12) << "Mean";
  for (double d : report.mean_class) std::cout << std::setw(10) << d;
  std::cout << report.grand_mean << "\n" << std::defaultfloat
            << std::setprecision(6);
}

int cmd_eval(const EvalOptions& opt) {
  std::string config_path =
      opt.config.empty() ? opt.run + "/config_echo.txt" : opt.config;
  RunConfig cfg = parse_run_config(config_path);
  LoadedBundle model = load_bundle(opt.run, "model");
  Dataset ds =
      opt.data.empty() ? generate_synthetic(cfg.data_config()) : load_dataset(opt.data);

  SubsetReport report = evaluate_subsets(model.params, cfg.model_config(), ds);
  std::string out = opt.out.empty() ? opt.run : opt.out;
  std::filesystem::create_directories(out);
  write_report_csv(out + "/report.csv", report);
  write_report_text(out + "/report.txt", report);

  std::cout << "model at step " << model.step << ", " << ds.samples.size()
            << " samples, " << report.rows.size() << " availability subsets\n";
  print_report(report);
  std::cout << "reports written to " << out << "\n";
  return kExitOk;
}

struct AblateOptions {
  std::string config;
  std::string out;
  std::string seeds = "1,2,3";
  std::string sweep_virtual;
  long steps = -1;
};

double arm_grand_mean(RunConfig cfg, unsigned long seed, const Dataset& ds) {
  cfg.seed = seed;
  TrainConfig tc = cfg.train_config();
  TrainResult result = train(tc, ds);
  return evaluate_subsets(result.params, cfg.model_config(), ds).grand_mean;
}

int cmd_ablate(const AblateOptions& opt) {
  RunConfig cfg = load_or_default(opt.config);
  if (opt.steps >= 0) cfg.total_steps = opt.steps;
  cfg.validate();
  std::vector<unsigned long> seeds =
      parse_list<unsigned long>(opt.seeds, "ablate seeds");
  Dataset ds = generate_synthetic(cfg.data_config());

  std::ostringstream lines;
  lines << std::setprecision(4) << std::fixed;
  if (!opt.sweep_virtual.empty()) {
    for (int v : parse_list<int>(opt.sweep_virtual, "ablate virtual lengths")) {
      RunConfig arm = cfg;
      arm.no_virtual = false;
      arm.virtual_per_modality = v;
      double mean = 0.0;
      for (unsigned long s : seeds) mean += arm_grand_mean(arm, s, ds);
      mean /= static_cast<double>(seeds.size());
      lines << "virtual length " << v << ": mean dice " << mean << " over "
            << seeds.size() << " seeds\n";
    }
  } else {
    int wins = 0;
    double delta_sum = 0.0;
    for (unsigned long s : seeds) {
      RunConfig with = cfg;
      with.no_virtual = false;
      RunConfig without = cfg;
      without.no_virtual = true;
      double full = arm_grand_mean(with, s, ds);
      double none = arm_grand_mean(without, s, ds);
      wins += full >= none;
      delta_sum += full - none;
      lines << "seed " << s << ": with virtual " << full << ", without " << none
            << ", delta " << std::showpos << full - none << std::noshowpos << "\n";
    }
    lines << "virtual nodes ahead in " << wins << "/" << seeds.size()
          << " seeds, mean delta " << std::showpos
          << delta_sum / static_cast<double>(seeds.size()) << std::noshowpos << "\n";
  }

  std::cout << lines.str();
  if (!opt.out.empty()) {
    std::filesystem::create_directories(opt.out);
    std::ofstream f(opt.out + "/ablate.txt");
    if (!f) throw ConfigError("cannot write " + opt.out + "/ablate.txt");
    f << lines.str();
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Heterogeneous graph attention on multimodal grids, with "
               "missing-modality masking"};
  app.require_subcommand(1);

  GenDataOptions gen_opt;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("--config", gen_opt.config, "run configuration file");
  gen->add_option("--out", gen_opt.out, "dataset directory")->required();
  gen->add_flag("--force", gen_opt.force, "overwrite an existing dataset");

  VerifyOptions ver_opt;
  CLI::App* ver = app.add_subcommand(
      "verify-adjacency", "Sweep built adjacency matrices against the edge rules");
  ver->add_option("--max-modalities", ver_opt.max_modalities, "largest N swept");
  ver->add_option("--max-basic", ver_opt.max_basic, "largest basic count swept");
  ver->add_option("--max-virtual", ver_opt.max_virtual, "largest virtual count swept");
  ver->add_option("--inject-fault", ver_opt.fault,
                  "flip one built entry (row col); the sweep must then report it")
      ->expected(2);

  GradCheckOptions grad_opt;
  CLI::App* grad = app.add_subcommand(
      "gradcheck", "Compare model gradients against finite differences");
  grad->add_option("--mode", grad_opt.mode, "hard, soft or both");
  grad->add_flag("--no-virtual", grad_opt.no_virtual, "check the no-virtual variant");
  grad->add_option("--seed", grad_opt.seed, "parameter and data seed");
  grad->add_option("--step-size", grad_opt.step, "finite difference step");
  grad->add_option("--tol", grad_opt.tol, "norm-ratio gate per parameter group");

  TrainOptions train_opt;
  CLI::App* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--config", train_opt.config, "run configuration file");
  tr->add_option("--out", train_opt.out, "run directory for checkpoints and metrics")
      ->required();
  tr->add_option("--data", train_opt.data, "train on a saved dataset directory");
  tr->add_flag("--force", train_opt.force, "overwrite an existing run directory");
  tr->add_flag("--no-virtual", train_opt.no_virtual, "drop the virtual nodes");
  tr->add_flag("--static-graph", train_opt.static_graph,
               "keep the full adjacency under missing modalities");
  tr->add_flag("--homogeneous-weights", train_opt.homogeneous,
               "share projections across modalities");
  tr->add_option("--steps", train_opt.steps, "override total_steps");
  tr->add_option("--seed", train_opt.seed, "override the training seed");

  EvalOptions eval_opt;
  CLI::App* ev = app.add_subcommand(
      "eval", "Evaluate a checkpoint over every availability subset");
  ev->add_option("--run", eval_opt.run, "run directory holding the checkpoint")
      ->required();
  ev->add_option("--config", eval_opt.config,
                 "configuration override (default: the run's echo)");
  ev->add_option("--data", eval_opt.data, "evaluate on a saved dataset directory");
  ev->add_option("--out", eval_opt.out, "report directory (default: the run)");

  AblateOptions abl_opt;
  CLI::App* abl = app.add_subcommand(
      "ablate", "Train matched variants and compare subset Dice");
  abl->add_option("--config", abl_opt.config, "run configuration file");
  abl->add_option("--seeds", abl_opt.seeds, "comma-separated training seeds");
  abl->add_option("--sweep-virtual", abl_opt.sweep_virtual,
                  "comma-separated virtual node counts to sweep");
  abl->add_option("--steps", abl_opt.steps, "override total_steps");
  abl->add_option("--out", abl_opt.out, "directory for the summary text");

  try {
    std::vector<std::string> to_parse(args.rbegin(), args.rend());
    app.parse(to_parse);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen_data(gen_opt);
    if (*ver) return cmd_verify_adjacency(ver_opt);
    if (*grad) return cmd_gradcheck(grad_opt);
    if (*tr) return cmd_train(train_opt);
    if (*ev) return cmd_eval(eval_opt);
    if (*abl) return cmd_ablate(abl_opt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace hetgat
