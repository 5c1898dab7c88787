// SPDX-License-Identifier: Apache-2.0
#include "otacal/calibrate.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace otacal {
namespace {

constexpr double kConditionLimit = 1e12;

Eigen::VectorXd ones(int n) { return Eigen::VectorXd::Ones(n); }

std::vector<Eigen::VectorXd> subset_null_vectors(const SubsetSpec& omega) {
  std::vector<Eigen::VectorXd> nulls;
  nulls.push_back(ones(omega.node_count()));
  for (int n : omega.complement()) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(omega.node_count());
    e(n) = 1.0;
    nulls.push_back(std::move(e));
  }
  return nulls;
}

Eigen::VectorXd reduced_solve(const ReducedSpectrum& spectrum, const Eigen::VectorXd& rhs) {
  // (Z^T L Z)^{-1} rhs via the eigendecomposition
  return spectrum.eigenvectors *
         (spectrum.eigenvalues.cwiseInverse().asDiagonal() *
          (spectrum.eigenvectors.transpose() * rhs));
}

CalibrationSolution solve_with(const GeneralizedLaplacian& gl, const ReducedSpectrum& spectrum,
                               const IncidenceMatrix& b, const NoiseModel& q,
                               const Eigen::VectorXd& x, CaseTag tag,
                               std::vector<int> omega_members) {
  if (x.size() != b.rows()) {
    throw std::invalid_argument("measurement vector has length " + std::to_string(x.size()) +
                                ", expected M=" + std::to_string(b.rows()));
  }
  const Eigen::VectorXd rhs = gl.basis.transpose() * (b.matrix.transpose() * q.apply_inverse(x));
  CalibrationSolution s;
  s.estimate = gl.basis * reduced_solve(spectrum, rhs);
  s.covariance = covariance(gl, spectrum);
  s.projector = gl.basis * gl.basis.transpose();
  s.case_tag = tag;
  s.omega = std::move(omega_members);
  return s;
}

}  // namespace

Eigen::MatrixXd complement_basis(const std::vector<Eigen::VectorXd>& null_vectors) {
  if (null_vectors.empty()) throw std::invalid_argument("no null vectors given");
  const Eigen::Index n = null_vectors.front().size();
  const Eigen::Index j = static_cast<Eigen::Index>(null_vectors.size());
  Eigen::MatrixXd v(n, j);
  for (Eigen::Index c = 0; c < j; ++c) {
    if (null_vectors[static_cast<std::size_t>(c)].size() != n) {
      throw std::invalid_argument("null vectors have inconsistent lengths");
    }
    v.col(c) = null_vectors[static_cast<std::size_t>(c)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  if (qr.rank() < j) {
    throw std::invalid_argument("null vectors are linearly dependent");
  }
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - j);
}

GeneralizedLaplacian laplacian(const IncidenceMatrix& b, const NoiseModel& q) {
  if (b.rows() != q.size()) {
    throw std::invalid_argument("incidence rows do not match noise model size");
  }
  GeneralizedLaplacian gl;
  const Eigen::MatrixXd qinv_b = q.apply_inverse(b.matrix);
  gl.matrix = b.matrix.transpose() * qinv_b;
  gl.matrix = 0.5 * (gl.matrix + gl.matrix.transpose()).eval();
  gl.basis = complement_basis({ones(static_cast<int>(b.cols()))});
  gl.nullspace_dim = 1;
  return gl;
}

GeneralizedLaplacian laplacian(const Topology& t, const NoiseModel& q) {
  if (t.edge_count() != q.size()) {
    throw std::invalid_argument("edge count does not match noise model size");
  }
  if (q.kind() == NoiseKind::Full) {
    return laplacian(incidence(t), q);
  }
  GeneralizedLaplacian gl;
  gl.matrix = Eigen::MatrixXd::Zero(t.node_count(), t.node_count());
  const Eigen::VectorXd vars = q.diagonal_variances();
  for (int m = 0; m < t.edge_count(); ++m) {
    const Edge& e = t.edges()[static_cast<std::size_t>(m)];
    const double w = 1.0 / vars(m);
    gl.matrix(e.i, e.i) += w;
    gl.matrix(e.j, e.j) += w;
    gl.matrix(e.i, e.j) -= w;
    gl.matrix(e.j, e.i) -= w;
  }
  gl.basis = complement_basis({ones(t.node_count())});
  gl.nullspace_dim = 1;
  return gl;
}

GeneralizedLaplacian subset_laplacian(const IncidenceMatrix& b_omega, const NoiseModel& q_omega,
                                      const SubsetSpec& omega) {
  if (b_omega.rows() != q_omega.size()) {
    throw std::invalid_argument("subset incidence rows do not match noise model size");
  }
  if (b_omega.cols() != omega.node_count()) {
    throw std::invalid_argument("subset incidence columns do not match subset node count");
  }
  GeneralizedLaplacian gl;
  const Eigen::MatrixXd qinv_b = q_omega.apply_inverse(b_omega.matrix);
  gl.matrix = b_omega.matrix.transpose() * qinv_b;
  gl.matrix = 0.5 * (gl.matrix + gl.matrix.transpose()).eval();
  gl.basis = complement_basis(subset_null_vectors(omega));
  gl.nullspace_dim = omega.node_count() - omega.participating_count() + 1;
  return gl;
}

ReducedSpectrum reduced_spectrum(const GeneralizedLaplacian& gl) {
  Eigen::MatrixXd g = gl.basis.transpose() * gl.matrix * gl.basis;
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  if (eig.info() != Eigen::Success) throw ModelError("reduced eigendecomposition failed");
  ReducedSpectrum s{eig.eigenvalues(), eig.eigenvectors()};
  if (s.eigenvalues.size() > 0) {
    const double lo = s.eigenvalues.minCoeff();
    const double hi = s.eigenvalues.maxCoeff();
    if (!(lo > 0.0) || hi > kConditionLimit * lo) {
      throw ModelError(
          "reduced system is singular or ill-conditioned "
          "(graph disconnected, or condition number above 1e12)");
    }
  }
  return s;
}

Eigen::MatrixXd covariance(const GeneralizedLaplacian& gl) {
  return covariance(gl, reduced_spectrum(gl));
}

Eigen::MatrixXd covariance(const GeneralizedLaplacian& gl, const ReducedSpectrum& spectrum) {
  const Eigen::MatrixXd w = gl.basis * spectrum.eigenvectors;
  Eigen::MatrixXd cov = w * spectrum.eigenvalues.cwiseInverse().asDiagonal() * w.transpose();
  return 0.5 * (cov + cov.transpose()).eval();
}

double variance_at(const GeneralizedLaplacian& gl, const ReducedSpectrum& spectrum, int node) {
  if (node < 0 || node >= gl.matrix.rows()) throw std::invalid_argument("node out of range");
  const Eigen::VectorXd t = spectrum.eigenvectors.transpose() * gl.basis.row(node).transpose();
  return t.cwiseAbs2().cwiseQuotient(spectrum.eigenvalues).sum();
}

CalibrationSolution solve_full(const IncidenceMatrix& b, const NoiseModel& q,
                               const Eigen::VectorXd& x) {
  const GeneralizedLaplacian gl = laplacian(b, q);
  return solve_with(gl, reduced_spectrum(gl), b, q, x, CaseTag::Full, {});
}

CalibrationSolution solve_subset(const IncidenceMatrix& b_omega, const NoiseModel& q_omega,
                                 const Eigen::VectorXd& x_omega, const SubsetSpec& omega) {
  const GeneralizedLaplacian gl = subset_laplacian(b_omega, q_omega, omega);
  return solve_with(gl, reduced_spectrum(gl), b_omega, q_omega, x_omega, CaseTag::Subset,
                    omega.members());
}

Eigen::VectorXd mean_projection(const Eigen::VectorXd& phi_true, const CalibrationSolution& s) {
  if (phi_true.size() != s.projector.rows()) {
    throw std::invalid_argument("phi length does not match solution dimension");
  }
  return s.projector * phi_true;
}

bool psd_order(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw std::invalid_argument("psd_order needs square matrices of equal shape");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 ||
      (b - b.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("psd_order inputs must be symmetric within 1e-10");
  }
  const Eigen::MatrixXd diff = 0.5 * ((a - b) + (a - b).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_diff(diff, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(0.5 * (a + a.transpose()),
                                                       Eigen::EigenvaluesOnly);
  const double scale = std::max(std::abs(eig_a.eigenvalues().minCoeff()),
                                std::abs(eig_a.eigenvalues().maxCoeff()));
  return eig_diff.eigenvalues().minCoeff() >= -tol * std::max(1.0, scale);
}

CalibrationProblem::CalibrationProblem(Topology topology, NoiseModel noise,
                                       std::optional<SubsetSpec> omega)
    : topology_(std::move(topology)), noise_(std::move(noise)), omega_(std::move(omega)) {
  if (noise_.size() != topology_.edge_count()) {
    throw std::invalid_argument("noise model size does not match edge count");
  }
  if (!is_connected(topology_)) {
    throw ModelError("measurement graph is disconnected");
  }
  b_ = incidence(topology_);
  gl_ = laplacian(topology_, noise_);
  spectrum_ = reduced_spectrum(gl_);
  if (omega_) {
    if (omega_->node_count() != topology_.node_count()) {
      throw std::invalid_argument("subset node count does not match topology");
    }
    SubsetRows sr = subset_rows(topology_, *omega_);  // throws ModelError if disconnected
    b_omega_ = std::move(sr.b_omega);
    row_index_map_ = std::move(sr.row_index_map);
    noise_omega_ = noise_.restrict(row_index_map_);
    gl_omega_ = subset_laplacian(b_omega_, *noise_omega_, *omega_);
    spectrum_omega_ = reduced_spectrum(gl_omega_);
  }
}

const SubsetSpec& CalibrationProblem::omega() const {
  if (!omega_) throw std::logic_error("problem has no participating subset");
  return *omega_;
}

const IncidenceMatrix& CalibrationProblem::b_omega() const {
  if (!omega_) throw std::logic_error("problem has no participating subset");
  return b_omega_;
}

const std::vector<int>& CalibrationProblem::row_index_map() const {
  if (!omega_) throw std::logic_error("problem has no participating subset");
  return row_index_map_;
}

const NoiseModel& CalibrationProblem::noise_omega() const {
  if (!omega_) throw std::logic_error("problem has no participating subset");
  return *noise_omega_;
}

const GeneralizedLaplacian& CalibrationProblem::subset_laplacian() const {
  if (!omega_) throw std::logic_error("problem has no participating subset");
  return gl_omega_;
}

const ReducedSpectrum& CalibrationProblem::subset_spectrum() const {
  if (!omega_) throw std::logic_error("problem has no participating subset");
  return spectrum_omega_;
}

const GeneralizedLaplacian& CalibrationProblem::gl_for(CaseTag tag) const {
  return tag == CaseTag::Full ? gl_ : subset_laplacian();
}

const ReducedSpectrum& CalibrationProblem::spectrum_for(CaseTag tag) const {
  return tag == CaseTag::Full ? spectrum_ : subset_spectrum();
}

const NoiseModel& CalibrationProblem::noise_for(CaseTag tag) const {
  return tag == CaseTag::Full ? noise_ : noise_omega();
}

const IncidenceMatrix& CalibrationProblem::b_for(CaseTag tag) const {
  return tag == CaseTag::Full ? b_ : b_omega();
}

Eigen::VectorXd CalibrationProblem::estimate(const Eigen::VectorXd& x, CaseTag tag) const {
  const IncidenceMatrix& b = b_for(tag);
  if (x.size() != b.rows()) {
    throw std::invalid_argument("measurement vector has length " + std::to_string(x.size()) +
                                ", expected M=" + std::to_string(b.rows()));
  }
  const GeneralizedLaplacian& gl = gl_for(tag);
  const Eigen::VectorXd rhs =
      gl.basis.transpose() * (b.matrix.transpose() * noise_for(tag).apply_inverse(x));
  return gl.basis * reduced_solve(spectrum_for(tag), rhs);
}

CalibrationSolution CalibrationProblem::solve(const Eigen::VectorXd& x, CaseTag tag) const {
  return solve_with(gl_for(tag), spectrum_for(tag), b_for(tag), noise_for(tag), x, tag,
                    tag == CaseTag::Subset ? omega().members() : std::vector<int>{});
}

Eigen::MatrixXd CalibrationProblem::covariance_for(CaseTag tag) const {
  return covariance(gl_for(tag), spectrum_for(tag));
}

Eigen::MatrixXd CalibrationProblem::projector_for(CaseTag tag) const {
  const GeneralizedLaplacian& gl = gl_for(tag);
  return gl.basis * gl.basis.transpose();
}

int CalibrationProblem::measurement_count(CaseTag tag) const {
  return static_cast<int>(b_for(tag).rows());
}

}  // namespace otacal
