// SPDX-License-Identifier: Apache-2.0
#include "hetgat/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace hetgat {

void GraphSpec::validate() const {
  if (num_modalities < 1 || num_modalities > 32) {
    throw ConfigError("num_modalities must be in [1, 32]");
  }
  if (basic_per_modality < 1) {
    throw ConfigError("basic_per_modality must be positive");
  }
  if (virtual_per_modality < 0) {
    throw ConfigError("virtual_per_modality must be non-negative");
  }
  if (feature_len < 1) {
    throw ConfigError("feature_len must be positive");
  }
}

int flat_index(const GraphSpec& spec, const NodeId& id) {
  int base = id.modality * spec.per_modality();
  if (id.kind == NodeKind::Basic) {
    return base + id.index_within_kind;
  }
  return base + spec.basic_per_modality + id.index_within_kind;
}

NodeId node_from_flat(const GraphSpec& spec, int flat) {
  int p = spec.per_modality();
  NodeId id;
  id.modality = flat / p;
  int off = flat % p;
  if (off < spec.basic_per_modality) {
    id.kind = NodeKind::Basic;
    id.index_within_kind = off;
  } else {
    id.kind = NodeKind::Virtual;
    id.index_within_kind = off - spec.basic_per_modality;
  }
  return id;
}

ModalityMask ModalityMask::all_available(int n) {
  ModalityMask m;
  m.num_modalities = n;
  m.bits = (n >= 32) ? 0xffffffffu : ((1u << n) - 1u);
  return m;
}

ModalityMask ModalityMask::from_indices(int n, const std::vector<int>& available) {
  ModalityMask m;
  m.num_modalities = n;
  for (int idx : available) {
    if (idx < 0 || idx >= n) {
      throw ConfigError("modality index out of range");
    }
    m.bits |= 1u << idx;
  }
  return m;
}

int ModalityMask::count() const {
  int c = 0;
  for (int m = 0; m < num_modalities; ++m) c += available(m) ? 1 : 0;
  return c;
}

bool ModalityMask::full() const { return count() == num_modalities; }

std::string ModalityMask::to_string() const {
  std::string s(static_cast<size_t>(num_modalities), '0');
  for (int m = 0; m < num_modalities; ++m) {
    if (available(m)) s[static_cast<size_t>(m)] = '1';
  }
  return s;
}

long AdjacencyMatrix::edge_count() const {
  long c = 0;
  for (size_t k = 0; k < e_.size(); ++k) c += e_[k];
  return c;
}

AdjacencyMatrix build_full_adjacency(const GraphSpec& spec) {
  spec.validate();
  int n = spec.total_nodes();
  AdjacencyMatrix adj(n);
  for (int i = 0; i < n; ++i) {
    NodeId a = node_from_flat(spec, i);
    for (int j = 0; j < n; ++j) {
      NodeId b = node_from_flat(spec, j);
      bool e;
      if (a.modality == b.modality) {
        e = true;
      } else if (a.kind == NodeKind::Basic && b.kind == NodeKind::Basic) {
        e = a.index_within_kind == b.index_within_kind;
      } else if (a.kind == NodeKind::Basic && b.kind == NodeKind::Virtual) {
        e = true;
      } else {
        // Virtual nodes take no cross-modal input, so both the
        // virtual <- basic and virtual <- virtual cases stay off.
        e = false;
      }
      adj.set(i, j, e);
    }
  }
  return adj;
}

AdjacencyMatrix apply_modality_mask(const AdjacencyMatrix& adj, const ModalityMask& mask,
                                    const GraphSpec& spec) {
  if (mask.num_modalities != spec.num_modalities) {
    throw ConfigError("mask modality count does not match graph");
  }
  if (adj.size() != spec.total_nodes()) {
    throw ConfigError("adjacency size does not match graph");
  }
  if (mask.empty()) {
    throw ConfigError("at least one modality must be available");
  }
  AdjacencyMatrix out = adj;
  int n = adj.size();
  for (int j = 0; j < n; ++j) {
    NodeId b = node_from_flat(spec, j);
    if (b.kind == NodeKind::Basic && !mask.available(b.modality)) {
      for (int i = 0; i < n; ++i) out.set(i, j, false);
    }
  }
  return out;
}

std::vector<NodeId> in_neighborhood(const AdjacencyMatrix& adj, const GraphSpec& spec,
                                    const NodeId& i) {
  std::vector<NodeId> out;
  int row = flat_index(spec, i);
  for (int j = 0; j < adj.size(); ++j) {
    if (adj.at(row, j)) out.push_back(node_from_flat(spec, j));
  }
  return out;
}

std::vector<ModalityMask> enumerate_subsets(int n) {
  if (n < 1 || n > 32) {
    throw ConfigError("modality count must be in [1, 32]");
  }
  std::vector<ModalityMask> out;
  for (int size = 1; size <= n; ++size) {
    // Lexicographic index combinations of the given size.
    std::vector<int> comb(static_cast<size_t>(size));
    for (int k = 0; k < size; ++k) comb[static_cast<size_t>(k)] = k;
    while (true) {
      out.push_back(ModalityMask::from_indices(n, comb));
      int k = size - 1;
      while (k >= 0 && comb[static_cast<size_t>(k)] == n - size + k) --k;
      if (k < 0) break;
      ++comb[static_cast<size_t>(k)];
      for (int t = k + 1; t < size; ++t) {
        comb[static_cast<size_t>(t)] = comb[static_cast<size_t>(t - 1)] + 1;
      }
    }
  }
  return out;
}

void write_adjacency_text(const AdjacencyMatrix& adj, std::ostream& os) {
  os << adj.size() << "\n";
  for (int i = 0; i < adj.size(); ++i) {
    for (int j = 0; j < adj.size(); ++j) {
      if (j) os << ' ';
      os << static_cast<int>(adj.at(i, j));
    }
    os << "\n";
  }
}

AdjacencyMatrix read_adjacency_text(std::istream& is) {
  int n = -1;
  if (!(is >> n) || n < 0) {
    throw ConfigError("bad adjacency header");
  }
  AdjacencyMatrix adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int v = -1;
      if (!(is >> v) || (v != 0 && v != 1)) {
        throw ConfigError("bad adjacency entry");
      }
      adj.set(i, j, v == 1);
    }
  }
  return adj;
}

std::vector<std::uint8_t> pack_adjacency(const AdjacencyMatrix& adj) {
  std::uint32_t n = static_cast<std::uint32_t>(adj.size());
  size_t total_bits = static_cast<size_t>(n) * n;
  std::vector<std::uint8_t> bytes(4 + (total_bits + 7) / 8, 0);
  bytes[0] = static_cast<std::uint8_t>(n & 0xff);
  bytes[1] = static_cast<std::uint8_t>((n >> 8) & 0xff);
  bytes[2] = static_cast<std::uint8_t>((n >> 16) & 0xff);
  bytes[3] = static_cast<std::uint8_t>((n >> 24) & 0xff);
  for (size_t bit = 0; bit < total_bits; ++bit) {
    if (adj.data()[bit]) {
      bytes[4 + bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return bytes;
}

AdjacencyMatrix unpack_adjacency(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) {
    throw ConfigError("packed adjacency too short");
  }
  std::uint32_t n = static_cast<std::uint32_t>(bytes[0]) |
                    (static_cast<std::uint32_t>(bytes[1]) << 8) |
                    (static_cast<std::uint32_t>(bytes[2]) << 16) |
                    (static_cast<std::uint32_t>(bytes[3]) << 24);
  size_t total_bits = static_cast<size_t>(n) * n;
  if (bytes.size() != 4 + (total_bits + 7) / 8) {
    throw ConfigError("packed adjacency size mismatch");
  }
  AdjacencyMatrix adj(static_cast<int>(n));
  for (size_t bit = 0; bit < total_bits; ++bit) {
    if ((bytes[4 + bit / 8] >> (bit % 8)) & 1u) {
      int i = static_cast<int>(bit / n);
      int j = static_cast<int>(bit % n);
      adj.set(i, j, true);
    }
  }
  return adj;
}

}  // namespace hetgat
