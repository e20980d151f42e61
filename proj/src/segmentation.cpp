// SPDX-License-Identifier: Apache-2.0
#include "hetgat/segmentation.hpp"

#include <cmath>

namespace hetgat {

namespace {

std::string enc_name(int m, const char* part) {
  return "enc/" + std::to_string(m) + "/" + part;
}

std::string dec_name(const std::string& decoder, const char* part) {
  return "dec/" + decoder + "/" + part;
}

Matrix glorot(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  double std = std::sqrt(2.0 / (rows + cols));
  for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, std);
  return m;
}

void init_mlp(Rng& rng, ParamBundle& params, const std::string& w1, const std::string& b1,
              const std::string& w2, const std::string& b2, int in, int hidden, int out) {
  params.add(w1, glorot(rng, hidden, in));
  params.add(b1, Matrix(1, hidden));
  params.add(w2, glorot(rng, out, hidden));
  params.add(b2, Matrix(1, out));
}

// Shared two-layer trunk: x [1 x in] -> elu -> [1 x out].
Var mlp(Tape& t, Var x, Binder& bind, const std::string& w1, const std::string& b1,
        const std::string& w2, const std::string& b2) {
  Var h = t.elu(t.add(t.matmul_nt(x, bind(w1)), bind(b1)));
  return t.add(t.matmul_nt(h, bind(w2)), bind(b2));
}

int decoder_rows(const ModelConfig& cfg, const std::string& decoder) {
  if (decoder == "spec") return cfg.nodes_per_modality();
  if (decoder == "multi") return cfg.total_nodes();
  throw ConfigError("unknown decoder: " + decoder);
}

}  // namespace

GatConfig ModelConfig::layer_config(int layer) const {
  GatConfig c = gat;
  c.feature_out = gat.feature_in;
  if (layer > 0) c.name_prefix = "L" + std::to_string(layer) + "/";
  return c;
}

void ModelConfig::validate() const {
  gat.validate();
  if (gat.feature_out != gat.feature_in) {
    throw ConfigError("feature_out must equal feature_in to stack onto the decoders");
  }
  if (grid_size < 2) throw ConfigError("grid_size must be at least 2");
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (enc_hidden < 1 || dec_hidden < 1) {
    throw ConfigError("hidden widths must be positive");
  }
  if (gat_layers < 1) throw ConfigError("gat_layers must be positive");
}

void init_model_params(const ModelConfig& cfg, Rng& rng, ParamBundle& params) {
  cfg.validate();
  for (int layer = 0; layer < cfg.gat_layers; ++layer) {
    GatConfig lc = cfg.layer_config(layer);
    if (layer > 0) lc.virtual_per_modality = 0;  // virtual rows attach once
    init_gat_params(lc, rng, params);
  }
  int f = cfg.gat.feature_in;
  int c = cfg.gat.basic_per_modality;
  for (int m = 0; m < cfg.gat.num_modalities; ++m) {
    init_mlp(rng, params, enc_name(m, "W1"), enc_name(m, "b1"), enc_name(m, "W2"),
             enc_name(m, "b2"), cfg.pixels(), cfg.enc_hidden, c * f);
  }
  init_mlp(rng, params, dec_name("spec", "W1"), dec_name("spec", "b1"),
           dec_name("spec", "W2"), dec_name("spec", "b2"),
           cfg.nodes_per_modality() * f, cfg.dec_hidden, cfg.pixels() * cfg.num_classes);
  init_mlp(rng, params, dec_name("multi", "W1"), dec_name("multi", "b1"),
           dec_name("multi", "W2"), dec_name("multi", "b2"), cfg.total_nodes() * f,
           cfg.dec_hidden, cfg.pixels() * cfg.num_classes);
}

Var encode(Tape& t, const Matrix& grid, Binder& bind, const ModelConfig& cfg,
           int modality) {
  if (grid.rows() != cfg.grid_size || grid.cols() != cfg.grid_size) {
    throw ConfigError("encode: grid shape mismatch");
  }
  Matrix flat(1, cfg.pixels());
  for (long i = 0; i < grid.size(); ++i) flat.data()[i] = grid.data()[i];
  Var x = t.constant(std::move(flat), "input_grid");
  Var y = mlp(t, x, bind, enc_name(modality, "W1"), enc_name(modality, "b1"),
              enc_name(modality, "W2"), enc_name(modality, "b2"));
  return t.reshape(y, cfg.gat.basic_per_modality, cfg.gat.feature_in);
}

Var decode_nodes(Tape& t, Var rows, Binder& bind, const ModelConfig& cfg,
                 const std::string& decoder) {
  int r = decoder_rows(cfg, decoder);
  const Matrix& m = t.value(rows);
  if (m.rows() != r || m.cols() != cfg.gat.feature_in) {
    throw ConfigError("decode_nodes: node block shape mismatch");
  }
  Var flat = t.reshape(rows, 1, r * cfg.gat.feature_in);
  Var logits = mlp(t, flat, bind, dec_name(decoder, "W1"), dec_name(decoder, "b1"),
                   dec_name(decoder, "W2"), dec_name(decoder, "b2"));
  return t.row_softmax(t.reshape(logits, cfg.pixels(), cfg.num_classes));
}

Matrix one_hot_labels(const Matrix& labels, int num_classes) {
  Matrix out(static_cast<int>(labels.size()), num_classes);
  for (long i = 0; i < labels.size(); ++i) {
    double v = labels.data()[i];
    int cls = static_cast<int>(v);
    if (v != cls || cls < 0 || cls >= num_classes) {
      throw ConfigError("labels must be integers in [0, num_classes)");
    }
    out.at(static_cast<int>(i), cls) = 1.0;
  }
  return out;
}

Var dice_loss(Tape& t, Var probs, const Matrix& onehot) {
  const Matrix& p = t.value(probs);
  if (p.rows() != onehot.rows() || p.cols() != onehot.cols()) {
    throw ConfigError("dice_loss: shape mismatch");
  }
  Var g = t.constant(onehot, "labels");
  Var inter = t.col_sums(t.mul_elem(probs, g));
  Var psum = t.col_sums(probs);
  Var gsum = t.col_sums(g);
  Var num = t.add_const(t.scale(inter, 2.0), kDiceEps);
  Var den = t.add_const(t.add(psum, gsum), kDiceEps);
  Var coeff = t.div_elem(num, den);
  return t.mean_all(t.add_const(t.scale(coeff, -1.0), 1.0));
}

Var graph_nodes_forward(Tape& t, const std::vector<Var>& basic_blocks,
                        const ModalityMask& mask, Binder& bind, const ModelConfig& cfg) {
  Var nodes = gat_forward(t, basic_blocks, mask, bind, cfg.layer_config(0));
  for (int layer = 1; layer < cfg.gat_layers; ++layer) {
    GatConfig lc = cfg.layer_config(layer);
    GraphSpec spec = lc.graph();
    AdjacencyMatrix adj = build_full_adjacency(spec);
    if (!lc.static_full_graph && !mask.full()) {
      adj = apply_modality_mask(adj, mask, spec);
    }
    nodes = multi_head_update(t, nodes, adj, bind, lc);
  }
  return nodes;
}

LossParts total_loss(Tape& t, const Sample& sample, const ModalityMask& mask,
                     Binder& bind, const ModelConfig& cfg) {
  cfg.validate();
  int n = cfg.gat.num_modalities;
  if (static_cast<int>(sample.inputs.size()) != n) {
    throw ConfigError("total_loss: one input grid per modality required");
  }
  Matrix onehot = one_hot_labels(sample.labels, cfg.num_classes);

  LossParts parts;
  std::vector<Var> blocks;
  for (int m = 0; m < n; ++m) {
    blocks.push_back(encode(t, sample.inputs[static_cast<size_t>(m)], bind, cfg, m));
  }

  // Per-modality supervision always sees the full input, mask or not.
  for (int m = 0; m < n; ++m) {
    std::vector<Var> rows = {blocks[static_cast<size_t>(m)]};
    if (cfg.gat.virtual_per_modality > 0) {
      rows.push_back(bind(cfg.gat.p_name(m)));
    }
    Var block = rows.size() == 1 ? rows[0] : t.concat_rows(rows);
    Var probs = decode_nodes(t, block, bind, cfg, "spec");
    parts.specific.push_back(dice_loss(t, probs, onehot));
  }

  Var nodes = graph_nodes_forward(t, blocks, mask, bind, cfg);
  Var probs = decode_nodes(t, nodes, bind, cfg, "multi");
  parts.multimodal = dice_loss(t, probs, onehot);

  Var total = parts.multimodal;
  for (Var s : parts.specific) total = t.add(total, s);
  parts.total = total;
  return parts;
}

Matrix predict_probs(const ParamBundle& params, const ModelConfig& cfg,
                     const Sample& sample, const ModalityMask& mask) {
  cfg.validate();
  Tape t(false);
  Binder bind(t, params, false);
  std::vector<Var> blocks;
  for (int m = 0; m < cfg.gat.num_modalities; ++m) {
    if (mask.available(m)) {
      blocks.push_back(encode(t, sample.inputs[static_cast<size_t>(m)], bind, cfg, m));
    } else {
      blocks.push_back(t.constant(
          Matrix(cfg.gat.basic_per_modality, cfg.gat.feature_in), "missing_block"));
    }
  }
  Var nodes = graph_nodes_forward(t, blocks, mask, bind, cfg);
  Var probs = decode_nodes(t, nodes, bind, cfg, "multi");
  return t.value(probs);
}

}  // namespace hetgat
