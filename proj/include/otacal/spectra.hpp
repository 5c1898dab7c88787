// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "otacal/calibrate.hpp"
#include "otacal/topology.hpp"

namespace otacal {

/// Closed-form eigenvectors and eigenvalues of the line-topology Laplacian
/// under unit noise.  Column k holds the cosine vector paired with the
/// eigenvalue 4 sin^2(k pi / 2N); column 0 is the all-ones vector with
/// eigenvalue zero.
struct LineEigenpairs {
  Eigen::MatrixXd vectors;      // N x N
  Eigen::VectorXd eigenvalues;  // length N
};

LineEigenpairs line_eigenpairs(int n);

/// Closed-form per-antenna variance for the line topology, noise sigma2 * I.
/// `node` is a 0-based antenna index.
double line_variance(int node, int n, double sigma2);
Eigen::VectorXd line_variances(int n, double sigma2);

double line_lower_bound(int n);  // N / (32 pi^2), unit noise
double ring_lower_bound(int n);  // N / (4 pi^2), unit noise

/// Ring per-antenna variance (N^2 - 1) / (12 N) * sigma2.  Derived
/// convenience, cross-checked against the brute-force pseudoinverse in the
/// test suite before use.
double ring_variance(int n, double sigma2);

double complete_variance(int n);  // 1/N - 1/N^2, unit noise

/// (1/N) sum of reciprocal nonzero eigenvalues of Z^T L Z; equals the mean
/// of the covariance diagonal.
double average_variance(const GeneralizedLaplacian& gl);

struct WienerCheck {
  double lhs;           // N * sum of reciprocal nonzero Laplacian eigenvalues
  double rhs;           // Wiener index: sum of pairwise BFS distances
  double relative_gap;  // |lhs - rhs| / max(1, |rhs|)
};

/// For a tree under unit noise, N * sum(1/lambda_i) equals the Wiener index
/// exactly (proportionality constant 1, established by exhaustive
/// enumeration over small trees in the test suite).  Throws on non-trees.
WienerCheck tree_wiener_check(const Topology& tree);

struct ClosedFormReport {
  std::string topology_kind;
  int n = 0;
  double sigma2 = 1.0;
  std::vector<double> eigenvalues;        // closed form, ascending, unit noise
  std::vector<double> per_node_variance;  // scaled by sigma2
  std::optional<double> bound_value;      // lower bound where defined
  bool matches_numeric = false;
  double max_rel_dev = 0.0;
};

/// Closed forms for "line", "ring" or "complete", compared against the
/// numeric covariance route.
ClosedFormReport closed_form_report(const std::string& kind, int n, double sigma2);

}  // namespace otacal
