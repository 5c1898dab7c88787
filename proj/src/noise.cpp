// SPDX-License-Identifier: Apache-2.0
#include "otacal/noise.hpp"

#include <cmath>
#include <string>

namespace otacal {
namespace {

constexpr double kSpdEigenTol = 1e-12;  // reject if lambda_min < tol * lambda_max

Eigen::VectorXd standard_normal(int n, RngStream& stream) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) z(k) = dist(stream);
  return z;
}

}  // namespace

NoiseModel NoiseModel::scalar(int size, double sigma2) {
  if (size < 1) throw std::invalid_argument("noise model needs a positive size");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("scalar noise variance must be positive");
  NoiseModel nm;
  nm.kind_ = NoiseKind::Scalar;
  nm.size_ = size;
  nm.sigma2_ = sigma2;
  return nm;
}

NoiseModel NoiseModel::diagonal(Eigen::VectorXd variances) {
  if (variances.size() < 1) throw std::invalid_argument("noise model needs a positive size");
  if (!(variances.minCoeff() > 0.0)) {
    throw std::invalid_argument("diagonal noise variances must be positive");
  }
  NoiseModel nm;
  nm.kind_ = NoiseKind::Diagonal;
  nm.size_ = static_cast<int>(variances.size());
  nm.variances_ = std::move(variances);
  return nm;
}

NoiseModel NoiseModel::full(Eigen::MatrixXd q) {
  if (q.rows() != q.cols() || q.rows() < 1) {
    throw std::invalid_argument("full noise covariance must be square");
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw ModelError("noise covariance is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd lam = eig.eigenvalues();
  if (!(lam.minCoeff() > kSpdEigenTol * lam.maxCoeff()) || !(lam.maxCoeff() > 0.0)) {
    throw ModelError("noise covariance is not positive definite");
  }
  NoiseModel nm;
  nm.kind_ = NoiseKind::Full;
  nm.size_ = static_cast<int>(sym.rows());
  nm.q_ = sym;
  nm.chol_lower_ = Eigen::LLT<Eigen::MatrixXd>(sym).matrixL();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  nm.inv_sqrt_ = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  nm.inv_ = v * lam.cwiseInverse().asDiagonal() * v.transpose();
  return nm;
}

double NoiseModel::scalar_sigma2() const {
  if (kind_ != NoiseKind::Scalar) throw std::logic_error("not a scalar noise model");
  return sigma2_;
}

Eigen::VectorXd NoiseModel::diagonal_variances() const {
  switch (kind_) {
    case NoiseKind::Scalar:
      return Eigen::VectorXd::Constant(size_, sigma2_);
    case NoiseKind::Diagonal:
      return variances_;
    case NoiseKind::Full:
      throw std::logic_error("full noise model has no diagonal representation");
  }
  throw std::logic_error("unreachable");
}

Eigen::MatrixXd NoiseModel::materialize() const {
  switch (kind_) {
    case NoiseKind::Scalar:
      return sigma2_ * Eigen::MatrixXd::Identity(size_, size_);
    case NoiseKind::Diagonal:
      return variances_.asDiagonal();
    case NoiseKind::Full:
      return q_;
  }
  throw std::logic_error("unreachable");
}

NoiseModel NoiseModel::restrict(const std::vector<int>& row_index_map) const {
  for (int r : row_index_map) {
    if (r < 0 || r >= size_) {
      throw std::invalid_argument("restriction index " + std::to_string(r) + " out of range");
    }
  }
  const int m = static_cast<int>(row_index_map.size());
  switch (kind_) {
    case NoiseKind::Scalar:
      return scalar(m, sigma2_);
    case NoiseKind::Diagonal: {
      Eigen::VectorXd v(m);
      for (int k = 0; k < m; ++k) v(k) = variances_(row_index_map[static_cast<std::size_t>(k)]);
      return diagonal(std::move(v));
    }
    case NoiseKind::Full: {
      Eigen::MatrixXd sub(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          sub(r, c) = q_(row_index_map[static_cast<std::size_t>(r)],
                         row_index_map[static_cast<std::size_t>(c)]);
        }
      }
      return full(std::move(sub));
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd NoiseModel::whiten(const Eigen::VectorXd& x) const {
  if (x.size() != size_) throw std::invalid_argument("whiten: dimension mismatch");
  switch (kind_) {
    case NoiseKind::Scalar:
      return x / std::sqrt(sigma2_);
    case NoiseKind::Diagonal:
      return x.cwiseQuotient(variances_.cwiseSqrt());
    case NoiseKind::Full:
      return inv_sqrt_ * x;
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd NoiseModel::apply_inverse(const Eigen::VectorXd& x) const {
  if (x.size() != size_) throw std::invalid_argument("apply_inverse: dimension mismatch");
  switch (kind_) {
    case NoiseKind::Scalar:
      return x / sigma2_;
    case NoiseKind::Diagonal:
      return x.cwiseQuotient(variances_);
    case NoiseKind::Full:
      return inv_ * x;
  }
  throw std::logic_error("unreachable");
}

Eigen::MatrixXd NoiseModel::apply_inverse(const Eigen::MatrixXd& x) const {
  if (x.rows() != size_) throw std::invalid_argument("apply_inverse: dimension mismatch");
  switch (kind_) {
    case NoiseKind::Scalar:
      return x / sigma2_;
    case NoiseKind::Diagonal:
      return variances_.cwiseInverse().asDiagonal() * x;
    case NoiseKind::Full:
      return inv_ * x;
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd NoiseModel::sample(RngStream& stream) const {
  const Eigen::VectorXd z = standard_normal(size_, stream);
  switch (kind_) {
    case NoiseKind::Scalar:
      return std::sqrt(sigma2_) * z;
    case NoiseKind::Diagonal:
      return variances_.cwiseSqrt().cwiseProduct(z);
    case NoiseKind::Full:
      return chol_lower_ * z;
  }
  throw std::logic_error("unreachable");
}

MeasurementVector whiten(const MeasurementVector& x, const NoiseModel& nm) {
  if (x.whitened) throw std::invalid_argument("measurement vector is already whitened");
  if (x.values.size() != nm.size()) {
    throw std::invalid_argument("whiten: measurement length does not match noise model");
  }
  return {nm.whiten(x.values), true};
}

}  // namespace otacal
