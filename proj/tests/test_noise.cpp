// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>

#include "otacal/noise.hpp"
#include "support/oracles.hpp"

using namespace otacal;

TEST_CASE("materialize") {
  const Eigen::MatrixXd q = NoiseModel::scalar(3, 1e-4).materialize();
  CHECK((q - 1e-4 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd v(3);
  v << 1, 2, 3;
  CHECK(NoiseModel::diagonal(v).materialize() == Eigen::MatrixXd(v.asDiagonal()));

  Eigen::MatrixXd ok(2, 2), bad(2, 2);
  ok << 2, 1, 1, 2;    // eigenvalues {1, 3}
  bad << 1, 2, 2, 1;   // eigenvalues {-1, 3}
  CHECK(NoiseModel::full(ok).materialize() == ok);
  CHECK_THROWS_AS(NoiseModel::full(bad), ModelError);
}

TEST_CASE("construction rejects degenerate variances") {
  CHECK_THROWS_AS(NoiseModel::scalar(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::scalar(3, -1.0), std::invalid_argument);
  Eigen::VectorXd v(2);
  v << 1.0, 0.0;
  CHECK_THROWS_AS(NoiseModel::diagonal(v), std::invalid_argument);
}

TEST_CASE("restrict") {
  const NoiseModel s = NoiseModel::scalar(7, 0.5).restrict({1, 3, 4});
  CHECK(s.size() == 3);
  CHECK(s.scalar_sigma2() == 0.5);

  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  const NoiseModel d = NoiseModel::diagonal(v).restrict({1, 3});
  Eigen::VectorXd want(2);
  want << 2, 4;
  CHECK(d.materialize() == Eigen::MatrixXd(want.asDiagonal()));

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd q = oracles::random_spd(4, rng);
  const Eigen::MatrixXd sub = NoiseModel::full(q).restrict({0, 2}).materialize();
  CHECK(sub(0, 0) == q(0, 0));
  CHECK(sub(0, 1) == q(0, 2));
  CHECK(sub(1, 0) == q(2, 0));
  CHECK(sub(1, 1) == q(2, 2));
}

TEST_CASE("materialize and restrict commute") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd q = oracles::random_spd(5, rng);
  const std::vector<int> map{4, 1, 2};
  const NoiseModel nm = NoiseModel::full(q);
  const Eigen::MatrixXd via_model = nm.restrict(map).materialize();
  Eigen::MatrixXd via_matrix(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) via_matrix(r, c) = q(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)]);
  }
  CHECK((via_model - via_matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("whiten") {
  Eigen::VectorXd x(2);
  x << 2, 2;
  CHECK(NoiseModel::scalar(2, 4.0).whiten(x) == Eigen::VectorXd::Ones(2));
  CHECK(NoiseModel::scalar(2, 1.0).whiten(x) == x);
  CHECK_THROWS_AS(NoiseModel::scalar(3, 1.0).whiten(x), std::invalid_argument);

  // Q^{-1/2} Q Q^{-1/2} = I for every representation
  std::mt19937_64 rng(9);
  Eigen::VectorXd spread(4);
  spread << 1e-6, 1e-2, 1.0, 1e2;  // condition 1e8
  const std::vector<NoiseModel> models{NoiseModel::scalar(4, 2.5), NoiseModel::diagonal(spread),
                                       NoiseModel::full(oracles::random_spd(4, rng))};
  for (const NoiseModel& nm : models) {
    const Eigen::MatrixXd q = nm.materialize();
    Eigen::MatrixXd wqw(4, 4);
    for (int c = 0; c < 4; ++c) wqw.col(c) = nm.whiten(q.col(c));
    for (int r = 0; r < 4; ++r) wqw.row(r) = nm.whiten(wqw.row(r).transpose()).transpose();
    CHECK((wqw - Eigen::MatrixXd::Identity(4, 4)).norm() <= 1e-10 * 2.0);
  }
}

TEST_CASE("whitened samples have identity covariance") {
  Eigen::MatrixXd q(2, 2);
  q << 2, 1, 1, 2;
  const NoiseModel nm = NoiseModel::full(q);
  const int trials = 100000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  for (int t = 0; t < trials; ++t) {
    RngStream stream = derive_stream(42, static_cast<std::uint64_t>(t));
    const Eigen::VectorXd w = nm.whiten(nm.sample(stream));
    acc += w * w.transpose();
  }
  acc /= trials;
  CHECK(oracles::rel_frob(acc, Eigen::MatrixXd::Identity(2, 2)) <= 0.03);
}

TEST_CASE("sampling statistics") {
  Eigen::MatrixXd q(2, 2);
  q << 2, 1, 1, 2;
  const NoiseModel nm = NoiseModel::full(q);
  const int trials = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  for (int t = 0; t < trials; ++t) {
    RngStream stream = derive_stream(1234, static_cast<std::uint64_t>(t));
    const Eigen::VectorXd w = nm.sample(stream);
    mean += w;
    cov += w * w.transpose();
  }
  mean /= trials;
  cov /= trials;
  // componentwise zero mean within 4 sigma / sqrt(trials)
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(mean(k)) <= 4.0 * std::sqrt(q(k, k) / trials));
  }
  CHECK(oracles::rel_frob(cov, q) <= 0.03);
}

TEST_CASE("sampling determinism") {
  const NoiseModel nm = NoiseModel::scalar(6, 0.3);
  RngStream a = derive_stream(77, 5);
  RngStream b = derive_stream(77, 5);
  CHECK(nm.sample(a) == nm.sample(b));

  // same per-trial draws regardless of the order streams are consumed
  std::vector<Eigen::VectorXd> forward, backward(10);
  for (int t = 0; t < 10; ++t) {
    RngStream s = derive_stream(99, static_cast<std::uint64_t>(t));
    forward.push_back(nm.sample(s));
  }
  for (int t = 9; t >= 0; --t) {
    RngStream s = derive_stream(99, static_cast<std::uint64_t>(t));
    backward[static_cast<std::size_t>(t)] = nm.sample(s);
  }
  for (int t = 0; t < 10; ++t) CHECK(forward[static_cast<std::size_t>(t)] == backward[static_cast<std::size_t>(t)]);
}

TEST_CASE("measurement vector whitening wrapper") {
  const NoiseModel nm = NoiseModel::scalar(2, 4.0);
  MeasurementVector x{Eigen::Vector2d(2.0, 2.0), false};
  const MeasurementVector w = whiten(x, nm);
  CHECK(w.whitened);
  CHECK(w.values == Eigen::VectorXd::Ones(2));
  CHECK_THROWS_AS(whiten(w, nm), std::invalid_argument);
  MeasurementVector wrong{Eigen::Vector3d(1.0, 2.0, 3.0), false};
  CHECK_THROWS_AS(whiten(wrong, nm), std::invalid_argument);
}
