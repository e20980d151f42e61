// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>

#include "hetgat/adjacency_oracle.hpp"
#include "doctest.h"
#include "hetgat/graph.hpp"

using namespace hetgat;

namespace {

GraphSpec make_spec(int n, int c, int cp) {
  GraphSpec s;
  s.num_modalities = n;
  s.basic_per_modality = c;
  s.virtual_per_modality = cp;
  s.feature_len = 1;
  return s;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("flat index layout is modality-major, basic before virtual") {
  GraphSpec s = make_spec(2, 1, 1);
  CHECK(flat_index(s, {0, NodeKind::Basic, 0}) == 0);
  CHECK(flat_index(s, {0, NodeKind::Virtual, 0}) == 1);
  CHECK(flat_index(s, {1, NodeKind::Basic, 0}) == 2);
  CHECK(flat_index(s, {1, NodeKind::Virtual, 0}) == 3);
  for (int f = 0; f < s.total_nodes(); ++f) {
    CHECK(flat_index(s, node_from_flat(s, f)) == f);
  }
}

TEST_CASE("single modality with one node gives an all-ones 1x1 block per kind") {
  GraphSpec s = make_spec(1, 1, 2);
  AdjacencyMatrix adj = build_full_adjacency(s);
  REQUIRE(adj.size() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(adj.at(i, j) == 1);
  }
}

TEST_CASE("full adjacency matches the hand-built two-modality case") {
  // Two modalities, one basic and one virtual node each. Flat order:
  // 0 = basic(0), 1 = virtual(0), 2 = basic(1), 3 = virtual(1).
  GraphSpec s = make_spec(2, 1, 1);
  AdjacencyMatrix adj = build_full_adjacency(s);
  int want[4][4] = {
      {1, 1, 1, 1},
      {1, 1, 0, 0},
      {1, 1, 1, 1},
      {0, 0, 1, 1},
  };
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      INFO("entry (", i, ",", j, ")");
      CHECK(adj.at(i, j) == want[i][j]);
    }
  }
}

TEST_CASE("cross-modal basic edges require matching index") {
  GraphSpec s = make_spec(2, 3, 0);
  AdjacencyMatrix adj = build_full_adjacency(s);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      CHECK(adj.at(a, 3 + b) == (a == b ? 1 : 0));
      CHECK(adj.at(3 + a, b) == (a == b ? 1 : 0));
    }
  }
}

TEST_CASE("masking cuts all outgoing edges of dropped basic nodes") {
  GraphSpec s = make_spec(2, 1, 1);
  AdjacencyMatrix full = build_full_adjacency(s);
  ModalityMask mask = ModalityMask::from_indices(2, {0});
  AdjacencyMatrix m = apply_modality_mask(full, mask, s);
  // Column of node 2 (modality 1's basic node) is cleared, self-loop included.
  for (int i = 0; i < 4; ++i) CHECK(m.at(i, 2) == 0);
  // Its virtual node keeps every edge.
  CHECK(m.at(2, 3) == 1);
  CHECK(m.at(3, 3) == 1);
  // Incoming edges of the dropped basic node survive.
  CHECK(m.at(2, 0) == 1);
}

TEST_CASE("masked adjacency equals oracle over the full sweep") {
  for (int n = 1; n <= 4; ++n) {
    for (int c = 1; c <= 4; ++c) {
      for (int cp = 0; cp <= 2; ++cp) {
        GraphSpec s = make_spec(n, c, cp);
        AdjacencyMatrix full = build_full_adjacency(s);
        for (const ModalityMask& mask : enumerate_subsets(n)) {
          AdjacencyMatrix got = apply_modality_mask(full, mask, s);
          AdjacencyMatrix want = verify::oracle_adjacency(s, mask);
          REQUIRE(got == want);
        }
      }
    }
  }
}

TEST_CASE("in-neighborhood of a basic node under partial availability") {
  // Four modalities, two basic and one virtual node each; only modality 0
  // available. The first basic node of modality 0 keeps: its own modality's
  // nodes, and the virtual nodes of every other modality. Cross-modal basic
  // sources are dropped with their modalities.
  GraphSpec s = make_spec(4, 2, 1);
  AdjacencyMatrix adj =
      apply_modality_mask(build_full_adjacency(s), ModalityMask::from_indices(4, {0}), s);
  std::vector<NodeId> nb = in_neighborhood(adj, s, {0, NodeKind::Basic, 0});
  std::vector<int> flats;
  for (const NodeId& id : nb) flats.push_back(flat_index(s, id));
  std::vector<int> want = {0, 1, 2, 5, 8, 11};
  CHECK(flats == want);
}

TEST_CASE("masking is idempotent and monotone") {
  GraphSpec s = make_spec(3, 2, 1);
  AdjacencyMatrix full = build_full_adjacency(s);
  for (const ModalityMask& mask : enumerate_subsets(3)) {
    AdjacencyMatrix once = apply_modality_mask(full, mask, s);
    AdjacencyMatrix twice = apply_modality_mask(once, mask, s);
    CHECK(once == twice);
    for (int i = 0; i < once.size(); ++i) {
      for (int j = 0; j < once.size(); ++j) {
        CHECK(once.at(i, j) <= full.at(i, j));
      }
    }
  }
}

TEST_CASE("virtual sources and available rows survive any mask") {
  GraphSpec s = make_spec(4, 2, 2);
  AdjacencyMatrix full = build_full_adjacency(s);
  for (const ModalityMask& mask : enumerate_subsets(4)) {
    AdjacencyMatrix m = apply_modality_mask(full, mask, s);
    for (int i = 0; i < m.size(); ++i) {
      NodeId a = node_from_flat(s, i);
      // Virtual columns never change.
      for (int j = 0; j < m.size(); ++j) {
        NodeId b = node_from_flat(s, j);
        if (b.kind == NodeKind::Virtual) CHECK(m.at(i, j) == full.at(i, j));
      }
      // Every node of an available modality keeps at least one in-edge
      // (its self-loop survives since its own column is never cut).
      if (mask.available(a.modality)) {
        bool any = false;
        for (int j = 0; j < m.size(); ++j) any = any || m.at(i, j);
        CHECK(any);
      }
    }
  }
}

TEST_CASE("empty mask is rejected") {
  GraphSpec s = make_spec(2, 1, 0);
  AdjacencyMatrix full = build_full_adjacency(s);
  ModalityMask none;
  none.num_modalities = 2;
  CHECK_THROWS_AS(apply_modality_mask(full, none, s), ConfigError);
}

TEST_CASE("subset enumeration is size-ascending then lexicographic") {
  std::vector<ModalityMask> subsets = enumerate_subsets(4);
  REQUIRE(subsets.size() == 15);
  std::vector<std::string> got;
  for (const ModalityMask& m : subsets) got.push_back(m.to_string());
  std::vector<std::string> want = {
      "1000", "0100", "0010", "0001", "1100", "1010", "1001", "0110", "0101", "0011",
      "1110", "1101", "1011", "0111", "1111",
  };
  CHECK(got == want);
}

TEST_CASE("text serialization round-trips") {
  GraphSpec s = make_spec(3, 2, 1);
  AdjacencyMatrix adj =
      apply_modality_mask(build_full_adjacency(s), ModalityMask::from_indices(3, {0, 2}), s);
  std::stringstream ss;
  write_adjacency_text(adj, ss);
  AdjacencyMatrix back = read_adjacency_text(ss);
  CHECK(adj == back);
}

TEST_CASE("bit-packed serialization round-trips and is compact") {
  GraphSpec s = make_spec(4, 2, 1);
  AdjacencyMatrix adj =
      apply_modality_mask(build_full_adjacency(s), ModalityMask::from_indices(4, {1}), s);
  std::vector<std::uint8_t> bytes = pack_adjacency(adj);
  CHECK(bytes.size() == 4 + (static_cast<size_t>(12 * 12) + 7) / 8);
  AdjacencyMatrix back = unpack_adjacency(bytes);
  CHECK(adj == back);
}

}  // TEST_SUITE
