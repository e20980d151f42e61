// SPDX-License-Identifier: Apache-2.0
#include "hetgat/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "hetgat/common.hpp"

namespace hetgat {

namespace {

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: " + key + " wants true/false, got \"" + value + "\"");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !(in >> std::ws).eof()) {
    throw ConfigError("config: bad value for " + key + ": \"" + value + "\"");
  }
  return out;
}

MaskMode parse_mask_mode(const std::string& name) {
  if (name == "hard") return MaskMode::Hard;
  if (name == "soft") return MaskMode::Soft;
  throw ConfigError("config: mask_mode must be hard or soft, got \"" + name + "\"");
}

Activation parse_activation(const std::string& name) {
  if (name == "elu") return Activation::Elu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("config: unknown activation \"" + name + "\"");
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "num_modalities") {
    cfg.num_modalities = parse_number<int>(key, value);
  } else if (key == "basic_per_modality") {
    cfg.basic_per_modality = parse_number<int>(key, value);
  } else if (key == "virtual_per_modality") {
    cfg.virtual_per_modality = parse_number<int>(key, value);
  } else if (key == "feature_len") {
    cfg.feature_len = parse_number<int>(key, value);
  } else if (key == "heads") {
    cfg.heads = parse_number<int>(key, value);
  } else if (key == "mask_mode") {
    cfg.mask_mode = value;
  } else if (key == "soft_logit") {
    cfg.soft_logit = parse_number<double>(key, value);
  } else if (key == "activation") {
    cfg.activation = value;
  } else if (key == "leaky_slope") {
    cfg.leaky_slope = parse_number<double>(key, value);
  } else if (key == "grid_size") {
    cfg.grid_size = parse_number<int>(key, value);
  } else if (key == "num_classes") {
    cfg.num_classes = parse_number<int>(key, value);
  } else if (key == "enc_hidden") {
    cfg.enc_hidden = parse_number<int>(key, value);
  } else if (key == "dec_hidden") {
    cfg.dec_hidden = parse_number<int>(key, value);
  } else if (key == "gat_layers") {
    cfg.gat_layers = parse_number<int>(key, value);
  } else if (key == "no_virtual") {
    cfg.no_virtual = parse_bool(key, value);
  } else if (key == "static_full_graph") {
    cfg.static_full_graph = parse_bool(key, value);
  } else if (key == "homogeneous_weights") {
    cfg.homogeneous_weights = parse_bool(key, value);
  } else if (key == "total_steps") {
    cfg.total_steps = parse_number<long>(key, value);
  } else if (key == "lr0") {
    cfg.lr0 = parse_number<double>(key, value);
  } else if (key == "lr_min") {
    cfg.lr_min = parse_number<double>(key, value);
  } else if (key == "checkpoint_every") {
    cfg.checkpoint_every = parse_number<long>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<unsigned long>(key, value);
  } else if (key == "sample_count") {
    cfg.sample_count = parse_number<int>(key, value);
  } else if (key == "data_seed") {
    cfg.data_seed = parse_number<unsigned long>(key, value);
  } else if (key == "noise_level") {
    cfg.noise_level = parse_number<double>(key, value);
  } else if (key == "off_contrast") {
    cfg.off_contrast = parse_number<double>(key, value);
  } else if (key == "region_min") {
    cfg.region_min = parse_number<int>(key, value);
  } else if (key == "region_max") {
    cfg.region_max = parse_number<int>(key, value);
  } else {
    throw ConfigError("config: unknown key \"" + key + "\"");
  }
}

}  // namespace

void RunConfig::validate() const {
  model_config().validate();
  data_config().validate();
  train_config().validate();
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.gat.num_modalities = num_modalities;
  m.gat.basic_per_modality = basic_per_modality;
  m.gat.virtual_per_modality = no_virtual ? 0 : virtual_per_modality;
  m.gat.feature_in = feature_len;
  m.gat.feature_out = feature_len;
  m.gat.heads = heads;
  m.gat.leaky_slope = leaky_slope;
  m.gat.mask_mode = parse_mask_mode(mask_mode);
  m.gat.soft_logit = soft_logit;
  m.gat.out_activation = parse_activation(activation);
  m.gat.tied_weights = homogeneous_weights;
  m.gat.static_full_graph = static_full_graph;
  m.grid_size = grid_size;
  m.num_classes = num_classes;
  m.enc_hidden = enc_hidden;
  m.dec_hidden = dec_hidden;
  m.gat_layers = gat_layers;
  return m;
}

DataConfig RunConfig::data_config() const {
  DataConfig d;
  d.grid_size = grid_size;
  d.num_modalities = num_modalities;
  d.num_classes = num_classes;
  d.sample_count = sample_count;
  d.seed = data_seed;
  d.noise_level = noise_level;
  d.off_contrast = off_contrast;
  d.region_min = region_min;
  d.region_max = region_max;
  return d;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.model = model_config();
  t.total_steps = total_steps;
  t.lr0 = lr0;
  t.lr_min = lr_min;
  t.seed = seed;
  t.checkpoint_every = checkpoint_every;
  return t;
}

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trimmed(line);
    if (line.empty()) continue;
    size_t split = line.find_first_of(" \t");
    if (split == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": missing value");
    }
    apply_key(cfg, line.substr(0, split), trimmed(line.substr(split + 1)));
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str());
}

void echo_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "num_modalities " << cfg.num_modalities << "\n";
  out << "basic_per_modality " << cfg.basic_per_modality << "\n";
  out << "virtual_per_modality " << cfg.virtual_per_modality << "\n";
  out << "feature_len " << cfg.feature_len << "\n";
  out << "heads " << cfg.heads << "\n";
  out << "mask_mode " << cfg.mask_mode << "\n";
  out << "soft_logit " << cfg.soft_logit << "\n";
  out << "activation " << cfg.activation << "\n";
  out << "leaky_slope " << cfg.leaky_slope << "\n";
  out << "grid_size " << cfg.grid_size << "\n";
  out << "num_classes " << cfg.num_classes << "\n";
  out << "enc_hidden " << cfg.enc_hidden << "\n";
  out << "dec_hidden " << cfg.dec_hidden << "\n";
  out << "gat_layers " << cfg.gat_layers << "\n";
  out << "no_virtual " << (cfg.no_virtual ? "true" : "false") << "\n";
  out << "static_full_graph " << (cfg.static_full_graph ? "true" : "false") << "\n";
  out << "homogeneous_weights " << (cfg.homogeneous_weights ? "true" : "false") << "\n";
  out << "total_steps " << cfg.total_steps << "\n";
  out << "lr0 " << cfg.lr0 << "\n";
  out << "lr_min " << cfg.lr_min << "\n";
  out << "checkpoint_every " << cfg.checkpoint_every << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "sample_count " << cfg.sample_count << "\n";
  out << "data_seed " << cfg.data_seed << "\n";
  out << "noise_level " << cfg.noise_level << "\n";
  out << "off_contrast " << cfg.off_contrast << "\n";
  out << "region_min " << cfg.region_min << "\n";
  out << "region_max " << cfg.region_max << "\n";
  if (!out) throw ConfigError("short write to " + path);
}

}  // namespace hetgat
