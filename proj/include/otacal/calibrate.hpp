// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "otacal/noise.hpp"
#include "otacal/topology.hpp"

namespace otacal {

/// Noise-weighted Laplacian L = B^T Q^{-1} B together with an orthonormal
/// basis Z of the identifiable subspace (the orthogonal complement of the
/// nullspace directions).  For the full problem the nullspace is span{u};
/// for a subset problem it is span{u, e_n : n outside the subset}.
struct GeneralizedLaplacian {
  Eigen::MatrixXd matrix;  // N x N, symmetric PSD, L u = 0
  Eigen::MatrixXd basis;   // N x k with Z^T Z = I, k = N - nullspace_dim
  int nullspace_dim = 1;
};

/// Eigendecomposition of the reduced matrix Z^T L Z.  Positive definite when
/// the relevant part of the graph is connected; construction throws
/// ModelError when the condition number exceeds 1e12.
struct ReducedSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending, all positive
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal
};

/// Orthonormal basis of the orthogonal complement of span{null_vectors},
/// built by Householder QR.  Any valid choice is acceptable downstream; the
/// estimator and covariance are invariant to it.
Eigen::MatrixXd complement_basis(const std::vector<Eigen::VectorXd>& null_vectors);

GeneralizedLaplacian laplacian(const IncidenceMatrix& b, const NoiseModel& q);
/// Edge-assembled fast path for scalar and diagonal noise; equivalent to the
/// incidence-matrix route.
GeneralizedLaplacian laplacian(const Topology& t, const NoiseModel& q);
GeneralizedLaplacian subset_laplacian(const IncidenceMatrix& b_omega, const NoiseModel& q_omega,
                                      const SubsetSpec& omega);

ReducedSpectrum reduced_spectrum(const GeneralizedLaplacian& gl);

/// Z (Z^T L Z)^{-1} Z^T: the exact estimator covariance.  Equals the
/// Moore-Penrose pseudoinverse of L for the full problem.
Eigen::MatrixXd covariance(const GeneralizedLaplacian& gl);
Eigen::MatrixXd covariance(const GeneralizedLaplacian& gl, const ReducedSpectrum& spectrum);
/// Single diagonal entry of the covariance, without forming the full matrix.
double variance_at(const GeneralizedLaplacian& gl, const ReducedSpectrum& spectrum, int node);

enum class CaseTag { Full, Subset };

struct CalibrationSolution {
  Eigen::VectorXd estimate;    // gauge fixed to zero: the minimum-norm solution
  Eigen::MatrixXd covariance;  // N x N, PSD, rank N-1 (full) or N_omega-1 (subset)
  Eigen::MatrixXd projector;   // Z Z^T, projector onto the identifiable part
  CaseTag case_tag = CaseTag::Full;
  std::vector<int> omega;      // members when case_tag == Subset
};

/// Least-squares estimate from all measurements of a connected graph.
CalibrationSolution solve_full(const IncidenceMatrix& b, const NoiseModel& q,
                               const Eigen::VectorXd& x);
/// Least-squares estimate from the subset-internal measurements only; the
/// entries at nodes outside the subset follow the minimum-norm convention
/// (they are zero and carry no information).
CalibrationSolution solve_subset(const IncidenceMatrix& b_omega, const NoiseModel& q_omega,
                                 const Eigen::VectorXd& x_omega, const SubsetSpec& omega);

/// E[estimate] = projector * phi_true; the Monte Carlo bias oracle.
Eigen::VectorXd mean_projection(const Eigen::VectorXd& phi_true, const CalibrationSolution& s);

/// True iff A - B is positive semidefinite within tolerance:
/// lambda_min(A - B) >= -tol * max(1, ||A||_2).  Throws on inputs that are
/// asymmetric beyond 1e-10.
bool psd_order(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol);

/// Owns a topology + noise model + optional participating subset, with the
/// derived incidence matrices, Laplacians, bases and reduced spectra built
/// once up front.  Immutable after construction; safe to share across
/// threads.
class CalibrationProblem {
 public:
  CalibrationProblem(Topology topology, NoiseModel noise,
                     std::optional<SubsetSpec> omega = std::nullopt);

  const Topology& topology() const { return topology_; }
  const NoiseModel& noise() const { return noise_; }
  bool has_subset() const { return omega_.has_value(); }
  const SubsetSpec& omega() const;

  const IncidenceMatrix& b() const { return b_; }
  const GeneralizedLaplacian& full_laplacian() const { return gl_; }
  const ReducedSpectrum& full_spectrum() const { return spectrum_; }

  const IncidenceMatrix& b_omega() const;
  const std::vector<int>& row_index_map() const;
  const NoiseModel& noise_omega() const;
  const GeneralizedLaplacian& subset_laplacian() const;
  const ReducedSpectrum& subset_spectrum() const;

  /// Estimate only (no covariance assembly); the per-trial Monte Carlo path.
  Eigen::VectorXd estimate(const Eigen::VectorXd& x, CaseTag tag = CaseTag::Full) const;
  CalibrationSolution solve(const Eigen::VectorXd& x, CaseTag tag = CaseTag::Full) const;
  Eigen::MatrixXd covariance_for(CaseTag tag) const;
  Eigen::MatrixXd projector_for(CaseTag tag) const;
  int measurement_count(CaseTag tag) const;

 private:
  const GeneralizedLaplacian& gl_for(CaseTag tag) const;
  const ReducedSpectrum& spectrum_for(CaseTag tag) const;
  const NoiseModel& noise_for(CaseTag tag) const;
  const IncidenceMatrix& b_for(CaseTag tag) const;

  Topology topology_;
  NoiseModel noise_;
  std::optional<SubsetSpec> omega_;
  IncidenceMatrix b_;
  GeneralizedLaplacian gl_;
  ReducedSpectrum spectrum_;
  // subset-only members
  IncidenceMatrix b_omega_;
  std::vector<int> row_index_map_;
  std::optional<NoiseModel> noise_omega_;
  GeneralizedLaplacian gl_omega_;
  ReducedSpectrum spectrum_omega_;
};

}  // namespace otacal
