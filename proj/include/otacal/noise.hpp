// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "otacal/errors.hpp"
#include "otacal/rng.hpp"

namespace otacal {

enum class NoiseKind { Scalar, Diagonal, Full };

/// Measurement-noise covariance Q (M x M, symmetric positive definite) in
/// one of three structured representations.  Sampling draws zero-mean
/// Gaussian vectors with covariance Q via the Cholesky factor; whitening
/// applies the symmetric inverse square root Q^{-1/2}.
class NoiseModel {
 public:
  static NoiseModel scalar(int size, double sigma2);
  static NoiseModel diagonal(Eigen::VectorXd variances);
  /// Throws ModelError unless q is symmetric positive definite
  /// (smallest eigenvalue >= 1e-12 times the largest).
  static NoiseModel full(Eigen::MatrixXd q);

  int size() const { return size_; }
  NoiseKind kind() const { return kind_; }
  double scalar_sigma2() const;
  /// Per-measurement variances; valid for Scalar and Diagonal kinds.
  Eigen::VectorXd diagonal_variances() const;

  Eigen::MatrixXd materialize() const;
  /// Principal submatrix at the given rows/columns, in the given order.
  NoiseModel restrict(const std::vector<int>& row_index_map) const;

  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const;        // Q^{-1/2} x
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& x) const; // Q^{-1} x
  Eigen::MatrixXd apply_inverse(const Eigen::MatrixXd& x) const;
  /// w = C z with C the Cholesky factor of Q and z i.i.d. standard normal
  /// draws from the stream; deterministic given the stream state.
  Eigen::VectorXd sample(RngStream& stream) const;

 private:
  NoiseModel() = default;

  NoiseKind kind_ = NoiseKind::Scalar;
  int size_ = 0;
  double sigma2_ = 1.0;          // Scalar
  Eigen::VectorXd variances_;    // Diagonal
  Eigen::MatrixXd q_;            // Full
  Eigen::MatrixXd chol_lower_;   // Full: Q = C C^T
  Eigen::MatrixXd inv_sqrt_;     // Full: Q^{-1/2}
  Eigen::MatrixXd inv_;          // Full: Q^{-1}
};

struct MeasurementVector {
  Eigen::VectorXd values;
  bool whitened = false;
};

/// Pre-whitens a raw measurement vector; the whitened noise has identity
/// covariance.  Throws std::invalid_argument on dimension mismatch or if the
/// input is already whitened.
MeasurementVector whiten(const MeasurementVector& x, const NoiseModel& nm);

}  // namespace otacal
