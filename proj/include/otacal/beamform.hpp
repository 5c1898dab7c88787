// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "otacal/calibrate.hpp"
#include "otacal/rng.hpp"

namespace otacal {

/// Null-steering configuration for beamforming from the subset: weights a
/// with sum_{n in omega} h_n a_n = 0, carried together with the composite
/// vector v (v_n = h_n a_n on the subset, zero elsewhere) and its coordinates
/// p in the identifiable basis, v = Z_omega p.
struct BeamformScenario {
  SubsetSpec omega;
  Eigen::VectorXcd channel;  // h
  Eigen::VectorXcd weights;  // a
  Eigen::VectorXcd v;
  Eigen::VectorXcd p;
  Eigen::MatrixXd basis;     // the Z_omega the p coordinates refer to
};

/// Builds a null-steering scenario from explicit coordinates p.  Throws
/// std::invalid_argument on a zero channel entry inside the subset.
BeamformScenario make_null_steering(const Eigen::VectorXcd& h, const SubsetSpec& omega,
                                    const Eigen::MatrixXd& z_omega, const Eigen::VectorXcd& p);
/// Same, with p drawn uniformly from the complex unit sphere.
BeamformScenario make_null_steering(const Eigen::VectorXcd& h, const SubsetSpec& omega,
                                    const Eigen::MatrixXd& z_omega, RngStream& stream);

/// Exact effective channel g = sum_{n in omega} h_n a_n e^{j phi_hat_n}
/// e^{-j phi_n}; no small-error approximation.
std::complex<double> effective_channel(const BeamformScenario& s, const Eigen::VectorXd& phi_true,
                                       const Eigen::VectorXd& phi_hat);

/// First-order leakage variance v^H cov(phi_hat) v.
double var_g(const BeamformScenario& s, const Eigen::MatrixXd& covariance);

/// K_a = Z_omega^T Z (Z^T L Z)^{-1} Z^T Z_omega: leakage kernel when the
/// calibration uses all measurements.
Eigen::MatrixXd kernel_a(const GeneralizedLaplacian& full, const Eigen::MatrixXd& z_omega);
Eigen::MatrixXd kernel_a(const GeneralizedLaplacian& full, const ReducedSpectrum& full_spectrum,
                         const Eigen::MatrixXd& z_omega);
/// Equivalent Schur-complement route for K_a; requires E^T L E invertible on
/// the complement, which holds when the full graph is connected.
Eigen::MatrixXd kernel_a_schur(const GeneralizedLaplacian& full, const SubsetSpec& omega,
                               const Eigen::MatrixXd& z_omega);

/// K_b = (Z_omega^T L_omega Z_omega)^{-1}: leakage kernel when only the
/// subset-internal measurements are used.
Eigen::MatrixXd kernel_b(const GeneralizedLaplacian& subset);
Eigen::MatrixXd kernel_b(const ReducedSpectrum& subset_spectrum);

struct KernelPair {
  Eigen::MatrixXd k_a;
  Eigen::MatrixXd k_b;
};

/// Both kernels for a problem carrying a participating subset, expressed in
/// the problem's Z_omega basis.
KernelPair make_kernel_pair(const CalibrationProblem& problem);

/// Delta = L - L_omega: the measurement information discarded when only
/// subset-internal measurements are kept.  Positive semidefinite.
Eigen::MatrixXd delta_matrix(const GeneralizedLaplacian& full, const GeneralizedLaplacian& subset);

/// lambda_max(K_b - K_a) / lambda_max(K_b): the largest relative improvement
/// in leakage variance from calibrating with all measurements.
double kernel_gap(const KernelPair& kp);

/// Relative power loss 4 / |1 + e^{j delta}|^2 when half the antennas carry a
/// phase error of delta radians under constructive interference; +infinity at
/// delta = pi.
double coherent_loss(double delta);

}  // namespace otacal
