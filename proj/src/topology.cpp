// SPDX-License-Identifier: Apache-2.0
#include "otacal/topology.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace otacal {
namespace {

std::vector<std::vector<int>> adjacency(const Topology& t) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(t.node_count()));
  for (const Edge& e : t.edges()) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  return adj;
}

}  // namespace

Topology::Topology(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 1) {
    throw std::invalid_argument("topology needs at least one node");
  }
  for (Edge& e : edges_) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i == e.j) {
      throw std::invalid_argument("self-loop at node " + std::to_string(e.i));
    }
    if (e.i < 0 || e.j >= node_count_) {
      throw std::invalid_argument("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                  ") out of range for N=" + std::to_string(node_count_));
    }
  }
  std::sort(edges_.begin(), edges_.end());
  const auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw std::invalid_argument("duplicate edge (" + std::to_string(dup->i) + ", " +
                                std::to_string(dup->j) + ")");
  }
}

Topology build_line(int n) {
  if (n < 2) throw std::invalid_argument("line topology needs N >= 2");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) edges.push_back({k, k + 1});
  return {n, std::move(edges)};
}

Topology build_ring(int n) {
  if (n < 3) throw std::invalid_argument("ring topology needs N >= 3");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k + 1 < n; ++k) edges.push_back({k, k + 1});
  edges.push_back({0, n - 1});
  return {n, std::move(edges)};
}

Topology build_grid8(int rows, int cols) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid8 needs rows, cols >= 2");
  const auto idx = [cols](int r, int c) { return r * cols + c; };
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({idx(r, c), idx(r, c + 1)});
      if (r + 1 < rows) edges.push_back({idx(r, c), idx(r + 1, c)});
      if (r + 1 < rows && c + 1 < cols) edges.push_back({idx(r, c), idx(r + 1, c + 1)});
      if (r + 1 < rows && c > 0) edges.push_back({idx(r, c), idx(r + 1, c - 1)});
    }
  }
  return {rows * cols, std::move(edges)};
}

Topology build_complete(int n) {
  if (n < 2) throw std::invalid_argument("complete topology needs N >= 2");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  }
  return {n, std::move(edges)};
}

Topology from_edge_list(int node_count, const std::vector<std::pair<int, int>>& pairs) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) edges.push_back({a, b});
  return {node_count, std::move(edges)};
}

SubsetSpec::SubsetSpec(int node_count, std::vector<int> members)
    : node_count_(node_count), members_(std::move(members)) {
  if (node_count_ < 1) throw std::invalid_argument("subset needs a positive node count");
  if (members_.empty()) throw std::invalid_argument("subset must be nonempty");
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  mask_.assign(static_cast<std::size_t>(node_count_), 0);
  for (int m : members_) {
    if (m < 0 || m >= node_count_) {
      throw std::invalid_argument("subset member " + std::to_string(m) + " out of range for N=" +
                                  std::to_string(node_count_));
    }
    mask_[static_cast<std::size_t>(m)] = 1;
  }
}

std::vector<int> SubsetSpec::complement() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(node_count_ - participating_count()));
  for (int n = 0; n < node_count_; ++n) {
    if (!mask_[static_cast<std::size_t>(n)]) out.push_back(n);
  }
  return out;
}

IncidenceMatrix incidence(const Topology& t) {
  const int m = t.edge_count();
  IncidenceMatrix b;
  b.matrix = Eigen::MatrixXd::Zero(m, t.node_count());
  b.edge_order.resize(static_cast<std::size_t>(m));
  for (int row = 0; row < m; ++row) {
    const Edge& e = t.edges()[static_cast<std::size_t>(row)];
    b.matrix(row, e.i) = 1.0;
    b.matrix(row, e.j) = -1.0;
    b.edge_order[static_cast<std::size_t>(row)] = row;
  }
  return b;
}

SubsetRows subset_rows(const Topology& t, const SubsetSpec& s) {
  if (s.node_count() != t.node_count()) {
    throw std::invalid_argument("subset node count does not match topology");
  }
  if (!omega_connected(t, s)) {
    throw ModelError("subset-induced subgraph is disconnected");
  }
  std::vector<int> keep;
  for (int row = 0; row < t.edge_count(); ++row) {
    const Edge& e = t.edges()[static_cast<std::size_t>(row)];
    if (s.contains(e.i) && s.contains(e.j)) keep.push_back(row);
  }
  SubsetRows out;
  out.b_omega.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keep.size()), t.node_count());
  out.b_omega.edge_order = keep;
  out.row_index_map = keep;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const Edge& e = t.edges()[static_cast<std::size_t>(keep[r])];
    out.b_omega.matrix(static_cast<Eigen::Index>(r), e.i) = 1.0;
    out.b_omega.matrix(static_cast<Eigen::Index>(r), e.j) = -1.0;
  }
  return out;
}

bool is_connected(const Topology& t) {
  const int n = t.node_count();
  if (n == 1) return true;
  const auto adj = adjacency(t);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int visited = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++visited;
        q.push(w);
      }
    }
  }
  return visited == n;
}

bool omega_connected(const Topology& t, const SubsetSpec& s) {
  if (s.node_count() != t.node_count()) {
    throw std::invalid_argument("subset node count does not match topology");
  }
  const auto adj = adjacency(t);
  std::vector<char> seen(static_cast<std::size_t>(t.node_count()), 0);
  std::queue<int> q;
  const int start = s.members().front();
  q.push(start);
  seen[static_cast<std::size_t>(start)] = 1;
  int visited = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (s.contains(w) && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++visited;
        q.push(w);
      }
    }
  }
  return visited == s.participating_count();
}

}  // namespace otacal
