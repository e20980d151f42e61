// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetgat/common.hpp"

namespace hetgat {

// Static description of the multimodal node set. Nodes are laid out
// modality-major: for modality m the block [m*P, (m+1)*P) holds the C basic
// nodes first, then the C_p virtual nodes, with P = C + C_p. Cross-modal
// "corresponding" edges match basic nodes by their index within the basic
// block.
struct GraphSpec {
  int num_modalities = 1;      // N
  int basic_per_modality = 1;  // C
  int virtual_per_modality = 0;  // C_p
  int feature_len = 1;         // F

  int per_modality() const { return basic_per_modality + virtual_per_modality; }
  int total_nodes() const { return num_modalities * per_modality(); }

  void validate() const;
};

enum class NodeKind { Basic, Virtual };

struct NodeId {
  int modality = 0;
  NodeKind kind = NodeKind::Basic;
  int index_within_kind = 0;

  bool operator==(const NodeId&) const = default;
};

int flat_index(const GraphSpec& spec, const NodeId& id);
NodeId node_from_flat(const GraphSpec& spec, int flat);

// Availability bit vector over modalities. Bit m set means modality m is
// present.
struct ModalityMask {
  int num_modalities = 0;
  std::uint32_t bits = 0;

  static ModalityMask all_available(int n);
  static ModalityMask from_indices(int n, const std::vector<int>& available);

  bool available(int m) const { return (bits >> m) & 1u; }
  int count() const;
  bool empty() const { return bits == 0; }
  bool full() const;

  // e.g. "1010" with modality 0 leftmost, matching the table column order.
  std::string to_string() const;

  bool operator==(const ModalityMask&) const = default;
};

// Boolean directed edge matrix over all nodes. Entry (i, j) set means node j
// participates in updating node i, i.e. rows index the updated node and
// columns the source.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(int n) : n_(n), e_(static_cast<size_t>(n) * n, 0) {}

  int size() const { return n_; }
  std::uint8_t at(int i, int j) const { return e_[static_cast<size_t>(i) * n_ + j]; }
  void set(int i, int j, bool v) { e_[static_cast<size_t>(i) * n_ + j] = v ? 1 : 0; }
  const std::uint8_t* row(int i) const { return e_.data() + static_cast<size_t>(i) * n_; }
  const std::uint8_t* data() const { return e_.data(); }

  long edge_count() const;

  bool operator==(const AdjacencyMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<std::uint8_t> e_;
};

// Full-availability adjacency:
//   same modality                  -> connected both ways (self-loops included)
//   cross-modal basic/basic        -> connected both ways iff same basic index
//   cross-modal basic <- virtual   -> source only (virtual updates the basic)
//   cross-modal virtual pairs      -> disconnected
AdjacencyMatrix build_full_adjacency(const GraphSpec& spec);

// Cuts every outgoing edge of each basic node in a missing modality,
// including its self-loop; incoming edges stay. Virtual nodes are parameter
// derived and keep all their edges regardless of the mask.
AdjacencyMatrix apply_modality_mask(const AdjacencyMatrix& adj, const ModalityMask& mask,
                                    const GraphSpec& spec);

// All j with edge (i, j), sorted by flat index.
std::vector<NodeId> in_neighborhood(const AdjacencyMatrix& adj, const GraphSpec& spec,
                                    const NodeId& i);

// All non-empty availability masks: subset sizes ascending, and subsets of
// equal size in lexicographic order of their modality index tuples. For n=4
// this matches the usual results-table row order (singles, pairs, triples,
// full set).
std::vector<ModalityMask> enumerate_subsets(int n);

// Text fixture format: first line is the node count, then one line per row
// of space-separated 0/1 entries.
void write_adjacency_text(const AdjacencyMatrix& adj, std::ostream& os);
AdjacencyMatrix read_adjacency_text(std::istream& is);

// Compact fixture format: u32 little-endian node count, then the row-major
// entries packed 8 per byte, least-significant bit first, no row padding.
std::vector<std::uint8_t> pack_adjacency(const AdjacencyMatrix& adj);
AdjacencyMatrix unpack_adjacency(const std::vector<std::uint8_t>& bytes);

}  // namespace hetgat
