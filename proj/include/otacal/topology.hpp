// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <compare>
#include <utility>
#include <vector>

#include "otacal/errors.hpp"

namespace otacal {

/// Undirected edge, stored with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Measurement graph: N antennas (nodes, 0-based) and M pairwise
/// measurements (undirected edges).  Edges are normalized to i < j and
/// stored sorted lexicographically; self-loops and duplicates are rejected.
class Topology {
 public:
  Topology(int node_count, std::vector<Edge> edges);

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
};

Topology build_line(int n);
Topology build_ring(int n);
/// Planar grid with 8-neighbor measurements (horizontal, vertical and both
/// diagonals), no wraparound.  Node index = row * cols + col, row-major from
/// the lower-left corner.
Topology build_grid8(int rows, int cols);
Topology build_complete(int n);
/// Normalizes pairs to (min, max) and sorts; rejects self-loops, duplicates
/// and out-of-range indices.
Topology from_edge_list(int node_count, const std::vector<std::pair<int, int>>& pairs);

/// Participating subset of antennas; members sorted, unique, nonempty.
/// Connectivity of the induced subgraph is checked where the subset is used,
/// not at construction (the spec of the graph is not known here).
class SubsetSpec {
 public:
  SubsetSpec(int node_count, std::vector<int> members);

  int node_count() const { return node_count_; }
  const std::vector<int>& members() const { return members_; }
  std::vector<int> complement() const;
  int participating_count() const { return static_cast<int>(members_.size()); }
  bool contains(int node) const { return mask_[static_cast<std::size_t>(node)] != 0; }

 private:
  int node_count_ = 0;
  std::vector<int> members_;
  std::vector<char> mask_;
};

/// M x N incidence matrix: row m has +1 at edge m's lower-index endpoint and
/// -1 at the higher one, so B u = 0 and every row sums to zero.
struct IncidenceMatrix {
  Eigen::MatrixXd matrix;
  std::vector<int> edge_order;  // row -> edge index in the source Topology

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

IncidenceMatrix incidence(const Topology& t);

struct SubsetRows {
  IncidenceMatrix b_omega;         // rows of B whose both endpoints lie in the subset
  std::vector<int> row_index_map;  // B_omega row -> original row in B
};

/// Extracts the measurement rows internal to the subset.  Throws ModelError
/// if the subset-induced subgraph is disconnected.
SubsetRows subset_rows(const Topology& t, const SubsetSpec& s);

bool is_connected(const Topology& t);
bool omega_connected(const Topology& t, const SubsetSpec& s);

}  // namespace otacal
