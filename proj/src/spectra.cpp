// SPDX-License-Identifier: Apache-2.0
#include "otacal/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace otacal {
namespace {

constexpr double kPi = std::numbers::pi;

// Squared norms of the line cosine vectors, by direct summation.
Eigen::VectorXd line_vector_norms2(int n) {
  Eigen::VectorXd norms(n);
  for (int col = 0; col < n; ++col) {
    double acc = 0.0;
    for (int row = 0; row < n; ++row) {
      const double c = std::cos((2.0 * row + 1.0) * col * kPi / (2.0 * n));
      acc += c * c;
    }
    norms(col) = acc;
  }
  return norms;
}

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int source) {
  std::vector<int> dist(adj.size(), -1);
  std::queue<int> q;
  q.push(source);
  dist[static_cast<std::size_t>(source)] = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (dist[static_cast<std::size_t>(w)] < 0) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

}  // namespace

LineEigenpairs line_eigenpairs(int n) {
  if (n < 2) throw std::invalid_argument("line closed forms need N >= 2");
  LineEigenpairs out;
  out.vectors.resize(n, n);
  out.eigenvalues.resize(n);
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < n; ++row) {
      out.vectors(row, col) = std::cos((2.0 * row + 1.0) * col * kPi / (2.0 * n));
    }
    const double s = std::sin(col * kPi / (2.0 * n));
    out.eigenvalues(col) = 4.0 * s * s;
  }
  return out;
}

double line_variance(int node, int n, double sigma2) {
  if (n < 2) throw std::invalid_argument("line closed forms need N >= 2");
  if (node < 0 || node >= n) throw std::invalid_argument("antenna index out of range");
  const Eigen::VectorXd norms = line_vector_norms2(n);
  double acc = 0.0;
  for (int col = 1; col < n; ++col) {
    const double c = std::cos((2.0 * node + 1.0) * col * kPi / (2.0 * n));
    const double s = std::sin(col * kPi / (2.0 * n));
    acc += (c * c) / (s * s * norms(col));
  }
  return sigma2 * acc / 4.0;
}

Eigen::VectorXd line_variances(int n, double sigma2) {
  if (n < 2) throw std::invalid_argument("line closed forms need N >= 2");
  const Eigen::VectorXd norms = line_vector_norms2(n);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int node = 0; node < n; ++node) {
    double acc = 0.0;
    for (int col = 1; col < n; ++col) {
      const double c = std::cos((2.0 * node + 1.0) * col * kPi / (2.0 * n));
      const double s = std::sin(col * kPi / (2.0 * n));
      acc += (c * c) / (s * s * norms(col));
    }
    out(node) = sigma2 * acc / 4.0;
  }
  return out;
}

double line_lower_bound(int n) {
  if (n < 2) throw std::invalid_argument("line bound needs N >= 2");
  return n / (32.0 * kPi * kPi);
}

double ring_lower_bound(int n) {
  if (n < 3) throw std::invalid_argument("ring bound needs N >= 3");
  return n / (4.0 * kPi * kPi);
}

double ring_variance(int n, double sigma2) {
  if (n < 3) throw std::invalid_argument("ring closed form needs N >= 3");
  return sigma2 * (static_cast<double>(n) * n - 1.0) / (12.0 * n);
}

double complete_variance(int n) {
  if (n < 2) throw std::invalid_argument("complete closed form needs N >= 2");
  const double nd = n;
  return 1.0 / nd - 1.0 / (nd * nd);
}

double average_variance(const GeneralizedLaplacian& gl) {
  const ReducedSpectrum spectrum = reduced_spectrum(gl);
  return spectrum.eigenvalues.cwiseInverse().sum() / static_cast<double>(gl.matrix.rows());
}

WienerCheck tree_wiener_check(const Topology& tree) {
  const int n = tree.node_count();
  if (tree.edge_count() != n - 1 || !is_connected(tree)) {
    throw std::invalid_argument("topology is not a tree");
  }
  const GeneralizedLaplacian gl = laplacian(tree, NoiseModel::scalar(tree.edge_count(), 1.0));
  const ReducedSpectrum spectrum = reduced_spectrum(gl);
  const double lhs = n * spectrum.eigenvalues.cwiseInverse().sum();

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : tree.edges()) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  long long wiener = 0;
  for (int src = 0; src < n; ++src) {
    for (int d : bfs_distances(adj, src)) wiener += d;
  }
  const double rhs = static_cast<double>(wiener) / 2.0;  // each pair counted twice
  return {lhs, rhs, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs))};
}

ClosedFormReport closed_form_report(const std::string& kind, int n, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  ClosedFormReport rep;
  rep.topology_kind = kind;
  rep.n = n;
  rep.sigma2 = sigma2;

  Topology topo = [&]() -> Topology {
    if (kind == "line") return build_line(n);
    if (kind == "ring") return build_ring(n);
    if (kind == "complete") return build_complete(n);
    throw std::invalid_argument("unknown closed-form topology kind: " + kind);
  }();

  if (kind == "line") {
    const LineEigenpairs pairs = line_eigenpairs(n);
    rep.eigenvalues.assign(pairs.eigenvalues.data(), pairs.eigenvalues.data() + n);
    const Eigen::VectorXd v = line_variances(n, sigma2);
    rep.per_node_variance.assign(v.data(), v.data() + n);
    rep.bound_value = sigma2 * line_lower_bound(n);
  } else if (kind == "ring") {
    for (int k = 0; k < n; ++k) {
      const double s = std::sin(k * kPi / n);
      rep.eigenvalues.push_back(4.0 * s * s);
    }
    rep.per_node_variance.assign(static_cast<std::size_t>(n), ring_variance(n, sigma2));
    rep.bound_value = sigma2 * ring_lower_bound(n);
  } else {
    rep.eigenvalues.assign(static_cast<std::size_t>(n), static_cast<double>(n));
    rep.eigenvalues.front() = 0.0;
    rep.per_node_variance.assign(static_cast<std::size_t>(n), sigma2 * complete_variance(n));
    rep.bound_value = std::nullopt;
  }
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());

  const GeneralizedLaplacian gl = laplacian(topo, NoiseModel::scalar(topo.edge_count(), sigma2));
  const Eigen::MatrixXd cov = covariance(gl);
  double dev = 0.0;
  for (int k = 0; k < n; ++k) {
    const double closed = rep.per_node_variance[static_cast<std::size_t>(k)];
    dev = std::max(dev, std::abs(cov(k, k) - closed) / std::abs(closed));
  }
  rep.max_rel_dev = dev;
  rep.matches_numeric = dev <= 1e-9;
  return rep;
}

}  // namespace otacal
