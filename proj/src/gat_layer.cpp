// SPDX-License-Identifier: Apache-2.0
#include "hetgat/gat_layer.hpp"

#include <cmath>

namespace hetgat {

namespace {

struct HeadProjection {
  std::vector<Var> blocks;  // per modality, [P x F_out]
  Var all = -1;             // stacked, [n x F_out]
};

HeadProjection project_nodes(Tape& t, Var nodes, Binder& bind, const GatConfig& cfg,
                             int head) {
  GraphSpec spec = cfg.graph();
  int p = spec.per_modality();
  HeadProjection proj;
  for (int m = 0; m < cfg.num_modalities; ++m) {
    Var block = t.slice_rows(nodes, m * p, p);
    Var w = bind(cfg.w_name(head, m));
    proj.blocks.push_back(t.matmul_nt(block, w));
  }
  proj.all = t.concat_rows(proj.blocks);
  return proj;
}

Var logits_from_projection(Tape& t, const HeadProjection& proj, Binder& bind,
                           const GatConfig& cfg, int head) {
  int n = cfg.graph().total_nodes();
  int f = cfg.feature_out;

  // Query-side term: a's left half against the query's own projection.
  std::vector<Var> s_blocks;
  std::vector<Var> u_cols;
  for (int m = 0; m < cfg.num_modalities; ++m) {
    Var a = bind(cfg.a_name(head, m));
    Var a_left = t.slice_cols(a, 0, f);
    Var a_right = t.slice_cols(a, f, f);
    s_blocks.push_back(t.matmul_nt(proj.blocks[static_cast<size_t>(m)], a_left));
    // Source-side scores of every node under modality m's attention vector;
    // the query picks its own modality's column below.
    u_cols.push_back(t.matmul_nt(proj.all, a_right));
  }
  Var s = t.concat_rows(s_blocks);
  Var u = t.concat_cols(u_cols);

  Matrix onehot(n, cfg.num_modalities);
  GraphSpec spec = cfg.graph();
  for (int i = 0; i < n; ++i) onehot.at(i, node_from_flat(spec, i).modality) = 1.0;
  Var pick = t.constant(std::move(onehot), "query_modality");

  Var raw = t.add(t.broadcast_col(s, n), t.matmul_nt(pick, u));
  return t.leaky_relu(raw, cfg.leaky_slope);
}

}  // namespace

GraphSpec GatConfig::graph() const {
  GraphSpec s;
  s.num_modalities = num_modalities;
  s.basic_per_modality = basic_per_modality;
  s.virtual_per_modality = virtual_per_modality;
  s.feature_len = feature_in;
  return s;
}

void GatConfig::validate() const {
  graph().validate();
  if (feature_out < 1) throw ConfigError("feature_out must be positive");
  if (heads < 1) throw ConfigError("heads must be positive");
  if (leaky_slope < 0.0 || leaky_slope >= 1.0) {
    throw ConfigError("leaky_slope must be in [0, 1)");
  }
  if (soft_logit >= 0.0) throw ConfigError("soft_logit must be negative");
}

std::string GatConfig::w_name(int head, int m) const {
  return name_prefix + "W/" + std::to_string(head) + "/" + std::to_string(modality_slot(m));
}

std::string GatConfig::a_name(int head, int m) const {
  return name_prefix + "a/" + std::to_string(head) + "/" + std::to_string(modality_slot(m));
}

std::string GatConfig::p_name(int m) const {
  return name_prefix + "p/" + std::to_string(m);
}

void init_gat_params(const GatConfig& cfg, Rng& rng, ParamBundle& params) {
  cfg.validate();
  int slots = cfg.tied_weights ? 1 : cfg.num_modalities;
  double w_std = std::sqrt(2.0 / (cfg.feature_in + cfg.feature_out));
  double a_std = std::sqrt(2.0 / (2 * cfg.feature_out + 1));
  for (int k = 0; k < cfg.heads; ++k) {
    for (int m = 0; m < slots; ++m) {
      Matrix w(cfg.feature_out, cfg.feature_in);
      for (long i = 0; i < w.size(); ++i) w.data()[i] = rng.normal(0.0, w_std);
      params.add(cfg.w_name(k, m), std::move(w));
      Matrix a(1, 2 * cfg.feature_out);
      for (long i = 0; i < a.size(); ++i) a.data()[i] = rng.normal(0.0, a_std);
      params.add(cfg.a_name(k, m), std::move(a));
    }
  }
  if (cfg.virtual_per_modality > 0) {
    for (int m = 0; m < cfg.num_modalities; ++m) {
      params.add(cfg.p_name(m), Matrix(cfg.virtual_per_modality, cfg.feature_in));
    }
  }
}

Var attach_virtual_nodes(Tape& t, const std::vector<Var>& basic_blocks, Binder& bind,
                         const GatConfig& cfg) {
  if (static_cast<int>(basic_blocks.size()) != cfg.num_modalities) {
    throw ConfigError("attach_virtual_nodes: one basic block per modality required");
  }
  std::vector<Var> parts;
  for (int m = 0; m < cfg.num_modalities; ++m) {
    const Matrix& b = t.value(basic_blocks[static_cast<size_t>(m)]);
    if (b.rows() != cfg.basic_per_modality || b.cols() != cfg.feature_in) {
      throw ConfigError("attach_virtual_nodes: basic block shape mismatch");
    }
    parts.push_back(basic_blocks[static_cast<size_t>(m)]);
    if (cfg.virtual_per_modality > 0) parts.push_back(bind(cfg.p_name(m)));
  }
  return t.concat_rows(parts);
}

std::vector<double> dropped_row_factors(const GraphSpec& spec, const ModalityMask& mask) {
  std::vector<double> f(static_cast<size_t>(spec.total_nodes()), 1.0);
  for (int i = 0; i < spec.total_nodes(); ++i) {
    NodeId id = node_from_flat(spec, i);
    if (id.kind == NodeKind::Basic && !mask.available(id.modality)) {
      f[static_cast<size_t>(i)] = 0.0;
    }
  }
  return f;
}

Var attention_logits(Tape& t, Var nodes, Binder& bind, const GatConfig& cfg, int head) {
  HeadProjection proj = project_nodes(t, nodes, bind, cfg, head);
  return logits_from_projection(t, proj, bind, cfg, head);
}

Var attention_weights(Tape& t, Var logits, const AdjacencyMatrix& adj, MaskMode mode,
                      double soft_logit) {
  return t.masked_softmax_rows(logits, adj, mode, soft_logit, true);
}

Var multi_head_update(Tape& t, Var nodes, const AdjacencyMatrix& adj, Binder& bind,
                      const GatConfig& cfg) {
  Var acc = -1;
  for (int k = 0; k < cfg.heads; ++k) {
    HeadProjection proj = project_nodes(t, nodes, bind, cfg, k);
    Var logits = logits_from_projection(t, proj, bind, cfg, k);
    Var alpha = attention_weights(t, logits, adj, cfg.mask_mode, cfg.soft_logit);
    Var msg = t.matmul(alpha, proj.all);
    acc = (k == 0) ? msg : t.add(acc, msg);
  }
  Var mean = cfg.heads == 1 ? acc : t.scale(acc, 1.0 / cfg.heads);
  return t.activation(mean, cfg.out_activation);
}

Var gat_forward(Tape& t, const std::vector<Var>& basic_blocks, const ModalityMask& mask,
                Binder& bind, const GatConfig& cfg) {
  cfg.validate();
  GraphSpec spec = cfg.graph();
  if (mask.num_modalities != cfg.num_modalities) {
    throw ConfigError("gat_forward: mask size mismatch");
  }
  Var nodes = attach_virtual_nodes(t, basic_blocks, bind, cfg);
  if (!mask.full()) {
    nodes = t.row_scale_const(nodes, dropped_row_factors(spec, mask));
  }
  AdjacencyMatrix adj = build_full_adjacency(spec);
  if (!cfg.static_full_graph && !mask.full()) {
    adj = apply_modality_mask(adj, mask, spec);
  }
  return multi_head_update(t, nodes, adj, bind, cfg);
}

}  // namespace hetgat
