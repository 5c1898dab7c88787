// SPDX-License-Identifier: Apache-2.0
#include "otacal/beamform.hpp"

#include <cmath>
#include <limits>

namespace otacal {
namespace {

BeamformScenario assemble(const Eigen::VectorXcd& h, const SubsetSpec& omega,
                          const Eigen::MatrixXd& z_omega, Eigen::VectorXcd p) {
  const int n = omega.node_count();
  if (h.size() != n) throw std::invalid_argument("channel length does not match node count");
  if (z_omega.rows() != n || z_omega.cols() != omega.participating_count() - 1) {
    throw std::invalid_argument("basis shape does not match subset");
  }
  if (p.size() != z_omega.cols()) throw std::invalid_argument("coordinate length mismatch");
  if (omega.participating_count() < 2) {
    throw std::invalid_argument("null-steering needs at least two participating antennas");
  }
  BeamformScenario s{omega, h, Eigen::VectorXcd::Zero(n), z_omega.cast<std::complex<double>>() * p,
                     std::move(p), z_omega};
  for (int node : omega.members()) {
    if (std::abs(h(node)) < 1e-300) {
      throw std::invalid_argument("zero channel entry inside the subset");
    }
    s.weights(node) = s.v(node) / h(node);
  }
  return s;
}

}  // namespace

BeamformScenario make_null_steering(const Eigen::VectorXcd& h, const SubsetSpec& omega,
                                    const Eigen::MatrixXd& z_omega, const Eigen::VectorXcd& p) {
  return assemble(h, omega, z_omega, p);
}

BeamformScenario make_null_steering(const Eigen::VectorXcd& h, const SubsetSpec& omega,
                                    const Eigen::MatrixXd& z_omega, RngStream& stream) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXcd p(z_omega.cols());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double re = dist(stream);
    const double im = dist(stream);
    p(k) = std::complex<double>(re, im);
  }
  p /= p.norm();
  return assemble(h, omega, z_omega, std::move(p));
}

std::complex<double> effective_channel(const BeamformScenario& s, const Eigen::VectorXd& phi_true,
                                       const Eigen::VectorXd& phi_hat) {
  if (phi_true.size() != s.v.size() || phi_hat.size() != s.v.size()) {
    throw std::invalid_argument("phase vector length does not match scenario");
  }
  std::complex<double> g(0.0, 0.0);
  for (int node : s.omega.members()) {
    g += s.v(node) * std::exp(std::complex<double>(0.0, phi_hat(node) - phi_true(node)));
  }
  return g;
}

double var_g(const BeamformScenario& s, const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != s.v.size() || covariance.cols() != s.v.size()) {
    throw std::invalid_argument("covariance shape does not match scenario");
  }
  return (s.v.adjoint() * (covariance * s.v))(0).real();
}

Eigen::MatrixXd kernel_a(const GeneralizedLaplacian& full, const Eigen::MatrixXd& z_omega) {
  return kernel_a(full, reduced_spectrum(full), z_omega);
}

Eigen::MatrixXd kernel_a(const GeneralizedLaplacian& full, const ReducedSpectrum& full_spectrum,
                         const Eigen::MatrixXd& z_omega) {
  if (z_omega.rows() != full.basis.rows()) {
    throw std::invalid_argument("basis dimensions do not match");
  }
  // K_a = (Z^T Z_omega)^T (Z^T L Z)^{-1} (Z^T Z_omega), via the spectrum
  const Eigen::MatrixXd w = full_spectrum.eigenvectors.transpose() *
                            (full.basis.transpose() * z_omega);
  Eigen::MatrixXd k =
      w.transpose() * full_spectrum.eigenvalues.cwiseInverse().asDiagonal() * w;
  return 0.5 * (k + k.transpose()).eval();
}

Eigen::MatrixXd kernel_a_schur(const GeneralizedLaplacian& full, const SubsetSpec& omega,
                               const Eigen::MatrixXd& z_omega) {
  const std::vector<int> outside = omega.complement();
  const Eigen::MatrixXd lz = full.matrix * z_omega;
  Eigen::MatrixXd schur = z_omega.transpose() * lz;
  if (!outside.empty()) {
    const Eigen::Index nb = static_cast<Eigen::Index>(outside.size());
    Eigen::MatrixXd l_eb(full.matrix.rows(), nb);   // L E_(complement)
    Eigen::MatrixXd d(nb, nb);                      // E^T L E
    for (Eigen::Index c = 0; c < nb; ++c) l_eb.col(c) = full.matrix.col(outside[static_cast<std::size_t>(c)]);
    for (Eigen::Index r = 0; r < nb; ++r) d.row(r) = l_eb.row(outside[static_cast<std::size_t>(r)]);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (d + d.transpose()).eval());
    if (llt.info() != Eigen::Success) {
      throw ModelError("complement block E^T L E is not positive definite");
    }
    const Eigen::MatrixXd c = z_omega.transpose() * l_eb;  // Z_omega^T L E
    schur -= c * llt.solve(c.transpose());
  }
  schur = 0.5 * (schur + schur.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(schur);
  if (llt.info() != Eigen::Success) {
    throw ModelError("Schur-form kernel is not positive definite");
  }
  Eigen::MatrixXd k = llt.solve(Eigen::MatrixXd::Identity(schur.rows(), schur.cols()));
  return 0.5 * (k + k.transpose()).eval();
}

Eigen::MatrixXd kernel_b(const GeneralizedLaplacian& subset) {
  return kernel_b(reduced_spectrum(subset));
}

Eigen::MatrixXd kernel_b(const ReducedSpectrum& subset_spectrum) {
  Eigen::MatrixXd k = subset_spectrum.eigenvectors *
                      subset_spectrum.eigenvalues.cwiseInverse().asDiagonal() *
                      subset_spectrum.eigenvectors.transpose();
  return 0.5 * (k + k.transpose()).eval();
}

KernelPair make_kernel_pair(const CalibrationProblem& problem) {
  return {kernel_a(problem.full_laplacian(), problem.full_spectrum(),
                   problem.subset_laplacian().basis),
          kernel_b(problem.subset_spectrum())};
}

Eigen::MatrixXd delta_matrix(const GeneralizedLaplacian& full,
                             const GeneralizedLaplacian& subset) {
  if (full.matrix.rows() != subset.matrix.rows()) {
    throw std::invalid_argument("Laplacian dimensions do not match");
  }
  return full.matrix - subset.matrix;
}

double kernel_gap(const KernelPair& kp) {
  if (kp.k_a.rows() != kp.k_b.rows() || kp.k_a.cols() != kp.k_b.cols()) {
    throw std::invalid_argument("kernel shapes do not match");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_b(kp.k_b, Eigen::EigenvaluesOnly);
  const double top_b = eig_b.eigenvalues().maxCoeff();
  if (!(top_b > 0.0)) throw std::invalid_argument("K_b has no positive eigenvalue");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_d(kp.k_b - kp.k_a, Eigen::EigenvaluesOnly);
  return eig_d.eigenvalues().maxCoeff() / top_b;
}

double coherent_loss(double delta) {
  // |1 + e^{j delta}|^2 = 2 + 2 cos(delta)
  const double denom = 2.0 + 2.0 * std::cos(delta);
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return 4.0 / denom;
}

}  // namespace otacal
