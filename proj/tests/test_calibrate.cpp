// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "otacal/calibrate.hpp"
#include "support/oracles.hpp"

using namespace otacal;

namespace {

Eigen::MatrixXd ones_outer(int n) {
  return Eigen::MatrixXd::Ones(n, n) / static_cast<double>(n);
}

// Covariance through the pseudoinverse route: sigma2 * pinv(L) with the
// unit-noise Laplacian assembled from the adjacency.
Eigen::MatrixXd pinv_covariance(const Topology& t, double sigma2) {
  return sigma2 * oracles::pinv(oracles::adjacency_laplacian(t));
}

}  // namespace

TEST_CASE("laplacian matches hand values") {
  Eigen::MatrixXd want2(2, 2);
  want2 << 1, -1, -1, 1;
  const GeneralizedLaplacian gl2 = laplacian(build_line(2), NoiseModel::scalar(1, 1.0));
  CHECK((gl2.matrix - want2).cwiseAbs().maxCoeff() == 0.0);

  // line N=8 under unit noise: the tridiagonal with 1,2,...,2,1 diagonal
  const GeneralizedLaplacian gl8 = laplacian(build_line(8), NoiseModel::scalar(7, 1.0));
  Eigen::MatrixXd want8 = Eigen::MatrixXd::Zero(8, 8);
  for (int k = 0; k < 8; ++k) want8(k, k) = (k == 0 || k == 7) ? 1.0 : 2.0;
  for (int k = 0; k < 7; ++k) {
    want8(k, k + 1) = -1.0;
    want8(k + 1, k) = -1.0;
  }
  CHECK((gl8.matrix - want8).cwiseAbs().maxCoeff() == 0.0);

  // complete N=5: L = N I - u u^T
  const GeneralizedLaplacian gl5 = laplacian(build_complete(5), NoiseModel::scalar(10, 1.0));
  const Eigen::MatrixXd want5 =
      5.0 * Eigen::MatrixXd::Identity(5, 5) - Eigen::MatrixXd::Ones(5, 5);
  CHECK((gl5.matrix - want5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian routes agree") {
  std::mt19937_64 rng(17);
  const Topology t = oracles::random_connected_graph(7, 4, rng);
  const IncidenceMatrix b = incidence(t);

  Eigen::VectorXd vars(t.edge_count());
  for (int k = 0; k < t.edge_count(); ++k) vars(k) = 0.5 + 0.1 * k;
  const NoiseModel diag = NoiseModel::diagonal(vars);
  CHECK((laplacian(t, diag).matrix - laplacian(b, diag).matrix).cwiseAbs().maxCoeff() <= 1e-14);

  const NoiseModel full = NoiseModel::full(oracles::random_spd(t.edge_count(), rng));
  const Eigen::MatrixXd manual =
      b.matrix.transpose() * full.materialize().inverse() * b.matrix;
  CHECK(oracles::rel_frob(laplacian(t, full).matrix, manual) <= 1e-12);

  // unit noise reduces to the adjacency Laplacian D - A
  const NoiseModel unit = NoiseModel::scalar(t.edge_count(), 1.0);
  CHECK((laplacian(t, unit).matrix - oracles::adjacency_laplacian(t)).cwiseAbs().maxCoeff() <=
        1e-14);
}

TEST_CASE("complement_basis") {
  const Eigen::MatrixXd z2 = complement_basis({Eigen::VectorXd::Ones(2)});
  REQUIRE(z2.cols() == 1);
  CHECK(std::abs(std::abs(z2(0, 0)) - 1.0 / std::sqrt(2.0)) <= 1e-15);
  CHECK(std::abs(z2(0, 0) + z2(1, 0)) <= 1e-15);

  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(3);
  e2(2) = 1.0;
  const Eigen::MatrixXd z = complement_basis({Eigen::VectorXd::Ones(3), e2});
  REQUIRE(z.cols() == 1);
  // single direction proportional to (1, -1, 0)
  CHECK(std::abs(z(0, 0) + z(1, 0)) <= 1e-14);
  CHECK(std::abs(z(2, 0)) <= 1e-14);
  CHECK(std::abs(z.col(0).norm() - 1.0) <= 1e-14);

  for (int n : {2, 5, 9}) {
    const Eigen::MatrixXd zn = complement_basis({Eigen::VectorXd::Ones(n)});
    const Eigen::MatrixXd proj = zn * zn.transpose();
    CHECK(oracles::rel_frob(proj, Eigen::MatrixXd::Identity(n, n) - ones_outer(n)) <= 1e-13);
    CHECK((zn.transpose() * zn - Eigen::MatrixXd::Identity(n - 1, n - 1)).norm() <= 1e-13);
  }

  CHECK_THROWS_AS(complement_basis({Eigen::VectorXd::Ones(3), 2.0 * Eigen::VectorXd::Ones(3)}),
                  std::invalid_argument);
}

TEST_CASE("solve_full recovers centered truth without noise") {
  const Topology t = build_line(4);
  const IncidenceMatrix b = incidence(t);
  const NoiseModel q = NoiseModel::scalar(3, 1.0);
  Eigen::VectorXd phi(4);
  phi << 0.1, 0.2, 0.3, 0.4;
  const CalibrationSolution s = solve_full(b, q, b.matrix * phi);
  const Eigen::VectorXd centered = phi - Eigen::VectorXd::Constant(4, phi.mean());
  CHECK((s.estimate - centered).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("covariance closed forms and oracle") {
  // complete graph: cov = (1/N) Z Z^T = (1/N)(I - u u^T / N)
  for (int n : {3, 4, 6}) {
    const Topology t = build_complete(n);
    const Eigen::MatrixXd cov = covariance(laplacian(t, NoiseModel::scalar(t.edge_count(), 1.0)));
    const Eigen::MatrixXd want = (Eigen::MatrixXd::Identity(n, n) - ones_outer(n)) / n;
    CHECK((cov - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
  // complete N=4 diagonal: 1/4 - 1/16
  const Eigen::MatrixXd cov4 = covariance(laplacian(build_complete(4), NoiseModel::scalar(6, 1.0)));
  for (int k = 0; k < 4; ++k) CHECK(std::abs(cov4(k, k) - 0.1875) <= 1e-14);

  // line N=2 with sigma2: both variances sigma2/4, against the pinv oracle
  const double sigma2 = 0.37;
  const Eigen::MatrixXd cov2 =
      covariance(laplacian(build_line(2), NoiseModel::scalar(1, sigma2)));
  CHECK(std::abs(cov2(0, 0) - sigma2 / 4.0) <= 1e-15);
  CHECK(std::abs(cov2(1, 1) - sigma2 / 4.0) <= 1e-15);
  CHECK(oracles::rel_frob(cov2, pinv_covariance(build_line(2), sigma2)) <= 1e-12);

  // random graphs: covariance equals sigma2 * pinv(L)
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 7);
    const Topology t = oracles::random_connected_graph(n, 3, rng);
    const Eigen::MatrixXd cov =
        covariance(laplacian(t, NoiseModel::scalar(t.edge_count(), 2.0)));
    CHECK(oracles::rel_frob(cov, pinv_covariance(t, 2.0)) <= 1e-10);
  }

  // ring N=8 under unit noise: equal diagonal (N^2-1)/(12N) = 63/96
  const Eigen::MatrixXd cov8 = covariance(laplacian(build_ring(8), NoiseModel::scalar(8, 1.0)));
  for (int k = 0; k < 8; ++k) CHECK(std::abs(cov8(k, k) - 63.0 / 96.0) <= 1e-12);
}

TEST_CASE("variance_at matches the covariance diagonal") {
  std::mt19937_64 rng(29);
  const Topology t = oracles::random_connected_graph(9, 5, rng);
  const GeneralizedLaplacian gl = laplacian(t, NoiseModel::scalar(t.edge_count(), 1e-4));
  const ReducedSpectrum spectrum = reduced_spectrum(gl);
  const Eigen::MatrixXd cov = covariance(gl, spectrum);
  for (int k = 0; k < 9; ++k) {
    CHECK(std::abs(variance_at(gl, spectrum, k) - cov(k, k)) <= 1e-15);
  }
}

TEST_CASE("basis invariance of the covariance") {
  std::mt19937_64 rng(31);
  const Topology t = oracles::random_connected_graph(8, 4, rng);
  GeneralizedLaplacian gl = laplacian(t, NoiseModel::scalar(t.edge_count(), 1.0));
  const Eigen::MatrixXd cov1 = covariance(gl);
  // rotate the basis by a random orthogonal factor; still a valid complement
  const Eigen::MatrixXd o =
      Eigen::HouseholderQR<Eigen::MatrixXd>(oracles::random_spd(7, rng)).householderQ();
  gl.basis = gl.basis * o;
  CHECK(oracles::rel_frob(covariance(gl), cov1) <= 1e-10);
}

TEST_CASE("gauge invariance") {
  const Topology t = build_grid8(2, 3);
  const IncidenceMatrix b = incidence(t);
  const NoiseModel q = NoiseModel::scalar(t.edge_count(), 1.0);
  std::mt19937_64 rng(37);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd phi(6);
  for (int k = 0; k < 6; ++k) phi(k) = 0.01 * gauss(rng);
  const Eigen::VectorXd x1 = b.matrix * phi;
  const Eigen::VectorXd x2 = b.matrix * (phi + Eigen::VectorXd::Constant(6, 3.7));
  CHECK((x1 - x2).cwiseAbs().maxCoeff() <= 1e-12);  // measurements blind to the gauge
  CHECK((solve_full(b, q, x1).estimate - solve_full(b, q, x2).estimate).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("orientation invariance for scalar and diagonal noise") {
  const Topology t = build_ring(5);
  IncidenceMatrix b = incidence(t);
  Eigen::VectorXd vars(5);
  vars << 1.0, 0.5, 2.0, 0.25, 1.5;
  const NoiseModel q = NoiseModel::diagonal(vars);
  Eigen::VectorXd x(5);
  x << 0.03, -0.01, 0.02, 0.005, -0.04;
  const CalibrationSolution base = solve_full(b, q, x);

  IncidenceMatrix flipped = b;
  flipped.matrix.row(2) *= -1.0;
  Eigen::VectorXd x_flipped = x;
  x_flipped(2) *= -1.0;
  const CalibrationSolution flip = solve_full(flipped, q, x_flipped);
  CHECK((base.estimate - flip.estimate).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((base.covariance - flip.covariance).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("solve_subset") {
  const Topology t = build_grid8(3, 3);
  const NoiseModel q = NoiseModel::scalar(t.edge_count(), 1e-2);
  std::vector<int> all(9);
  for (int k = 0; k < 9; ++k) all[static_cast<std::size_t>(k)] = k;

  // the full node set reproduces solve_full
  const SubsetSpec omega_all(9, all);
  const SubsetRows sr_all = subset_rows(t, omega_all);
  const IncidenceMatrix b = incidence(t);
  Eigen::VectorXd x(t.edge_count());
  std::mt19937_64 rng(41);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < t.edge_count(); ++k) x(k) = 0.01 * gauss(rng);
  const CalibrationSolution via_subset =
      solve_subset(sr_all.b_omega, q.restrict(sr_all.row_index_map), x, omega_all);
  const CalibrationSolution via_full = solve_full(b, q, x);
  CHECK((via_subset.estimate - via_full.estimate).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((via_subset.covariance - via_full.covariance).cwiseAbs().maxCoeff() <= 1e-12);

  // proper subset: covariance vanishes outside the subset
  const SubsetSpec omega(9, {0, 1, 3, 4});
  const SubsetRows sr = subset_rows(t, omega);
  Eigen::VectorXd x_om(sr.b_omega.matrix.rows());
  for (Eigen::Index k = 0; k < x_om.size(); ++k) x_om(k) = 0.01 * gauss(rng);
  const CalibrationSolution s =
      solve_subset(sr.b_omega, q.restrict(sr.row_index_map), x_om, omega);
  for (int n : omega.complement()) {
    CHECK(s.covariance.row(n).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s.covariance.col(n).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(s.estimate(n)) <= 1e-12);
  }
}

TEST_CASE("subset variances ignore structure outside the subset") {
  // same subset-internal edges, different outside worlds
  const SubsetSpec omega(8, {0, 1, 2});
  const Topology a = from_edge_list(8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}});
  const Topology b = from_edge_list(
      8, {{0, 1}, {1, 2}, {0, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {2, 7}, {1, 5}});
  const SubsetRows sra = subset_rows(a, omega);
  const SubsetRows srb = subset_rows(b, omega);
  const double sigma2 = 0.8;
  const Eigen::MatrixXd cov_a = covariance(subset_laplacian(
      sra.b_omega, NoiseModel::scalar(static_cast<int>(sra.b_omega.rows()), sigma2), omega));
  const Eigen::MatrixXd cov_b = covariance(subset_laplacian(
      srb.b_omega, NoiseModel::scalar(static_cast<int>(srb.b_omega.rows()), sigma2), omega));
  for (int n : omega.members()) {
    CHECK(std::abs(cov_a(n, n) - cov_b(n, n)) <= 1e-12);
  }
}

TEST_CASE("mean_projection") {
  const Topology t = build_grid8(3, 3);
  const IncidenceMatrix b = incidence(t);
  const NoiseModel q = NoiseModel::scalar(t.edge_count(), 1.0);
  const CalibrationSolution s = solve_full(b, q, Eigen::VectorXd::Zero(t.edge_count()));

  // nullspace direction is unobservable
  CHECK(mean_projection(Eigen::VectorXd::Constant(9, 2.5), s).cwiseAbs().maxCoeff() <= 1e-12);

  // a vector orthogonal to u is fixed by the projector
  std::mt19937_64 rng(43);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd phi(9);
  for (int k = 0; k < 9; ++k) phi(k) = gauss(rng);
  phi.array() -= phi.mean();
  CHECK((mean_projection(phi, s) - phi).cwiseAbs().maxCoeff() <= 1e-12);

  // subset case: E[phi_hat_n] = phi_n - mean over the subset, n inside
  const SubsetSpec omega(9, {0, 1, 3, 4});
  const SubsetRows sr = subset_rows(t, omega);
  const CalibrationSolution ss =
      solve_subset(sr.b_omega, q.restrict(sr.row_index_map),
                   Eigen::VectorXd::Zero(sr.b_omega.rows()), omega);
  Eigen::VectorXd phi2(9);
  for (int k = 0; k < 9; ++k) phi2(k) = gauss(rng);
  const Eigen::VectorXd mean = mean_projection(phi2, ss);
  double omega_mean = 0.0;
  for (int n : omega.members()) omega_mean += phi2(n);
  omega_mean /= omega.participating_count();
  for (int n : omega.members()) {
    CHECK(std::abs(mean(n) - (phi2(n) - omega_mean)) <= 1e-12);
  }
}

TEST_CASE("noiseless exactness of the identifiable projection") {
  std::mt19937_64 rng(47);
  const Topology t = oracles::random_connected_graph(10, 6, rng);
  const IncidenceMatrix b = incidence(t);
  const NoiseModel q = NoiseModel::scalar(t.edge_count(), 1e-4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd phi(10);
  for (int k = 0; k < 10; ++k) phi(k) = 0.05 * gauss(rng);
  const CalibrationSolution s = solve_full(b, q, b.matrix * phi);
  CHECK((s.projector * s.estimate - s.projector * phi).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("psd_order") {
  const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
  CHECK(psd_order(2.0 * i2, i2, 1e-12));
  Eigen::MatrixXd d(2, 2);
  d << 2, 0, 0, 0;
  CHECK_FALSE(psd_order(i2, d, 1e-12));
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 1e-3, 0, 1;
  CHECK_THROWS_AS(psd_order(asym, i2, 1e-12), std::invalid_argument);

  // chords only help: line N=6 vs the same plus three extra measurements
  const Topology line = build_line(6);
  const Topology chords =
      from_edge_list(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}});
  const Eigen::MatrixXd before =
      covariance(laplacian(line, NoiseModel::scalar(line.edge_count(), 1.0)));
  const Eigen::MatrixXd after =
      covariance(laplacian(chords, NoiseModel::scalar(chords.edge_count(), 1.0)));
  CHECK(psd_order(before, after, 1e-9));
}

TEST_CASE("monotonicity under nested measurement sets") {
  // random (graph, edge-superset, nested SPD noise) instances; the covariance
  // can only shrink in the PSD order when measurements are added
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 9);  // up to 12
    const Topology base = oracles::random_connected_graph(n, static_cast<int>(rng() % 3), rng);
    const int extra = 1 + static_cast<int>(rng() % 4);
    std::vector<std::pair<int, int>> edges;
    for (const Edge& e : base.edges()) edges.emplace_back(e.i, e.j);
    std::set<std::pair<int, int>> present(edges.begin(), edges.end());
    std::uniform_int_distribution<int> node(0, n - 1);
    for (int added = 0; added < extra;) {
      int a = node(rng);
      int b = node(rng);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (present.count({a, b})) continue;
      present.emplace(a, b);
      edges.emplace_back(a, b);
      ++added;
    }
    const Topology super = from_edge_list(n, edges);

    // nested noise: Q'' SPD on the superset, Q its principal submatrix at the
    // rows carrying the original edges
    const bool full_noise = (trial % 2 == 0);
    Eigen::MatrixXd q_super_dense = oracles::random_spd(super.edge_count(), rng);
    if (!full_noise) {
      q_super_dense = Eigen::MatrixXd(q_super_dense.diagonal().asDiagonal());
    }
    std::vector<int> base_rows;
    for (const Edge& e : base.edges()) {
      const auto it = std::lower_bound(super.edges().begin(), super.edges().end(), e);
      base_rows.push_back(static_cast<int>(it - super.edges().begin()));
    }
    Eigen::MatrixXd q_base_dense(base.edge_count(), base.edge_count());
    for (int r = 0; r < base.edge_count(); ++r) {
      for (int c = 0; c < base.edge_count(); ++c) {
        q_base_dense(r, c) = q_super_dense(base_rows[static_cast<std::size_t>(r)],
                                           base_rows[static_cast<std::size_t>(c)]);
      }
    }
    const Eigen::MatrixXd cov_before =
        covariance(laplacian(incidence(base), NoiseModel::full(q_base_dense)));
    const Eigen::MatrixXd cov_after =
        covariance(laplacian(incidence(super), NoiseModel::full(q_super_dense)));
    CHECK(psd_order(cov_before, cov_after, 1e-9));
  }
}

TEST_CASE("solve rejects disconnected graphs") {
  const Topology t = from_edge_list(4, {{0, 1}, {2, 3}});
  const IncidenceMatrix b = incidence(t);
  const NoiseModel q = NoiseModel::scalar(2, 1.0);
  CHECK_THROWS_AS(solve_full(b, q, Eigen::VectorXd::Zero(2)), ModelError);
  CHECK_THROWS_AS(CalibrationProblem(t, q), ModelError);
}

TEST_CASE("CalibrationProblem wiring") {
  const Topology t = build_grid8(3, 3);
  const NoiseModel q = NoiseModel::scalar(t.edge_count(), 1e-4);
  const SubsetSpec omega(9, {0, 1, 3, 4});
  const CalibrationProblem problem(t, q, omega);

  CHECK(problem.measurement_count(CaseTag::Full) == t.edge_count());
  CHECK(problem.measurement_count(CaseTag::Subset) == 5);  // edges inside {0,1,3,4}

  const Eigen::MatrixXd cov_free = covariance(laplacian(t, q));
  CHECK(oracles::rel_frob(problem.covariance_for(CaseTag::Full), cov_free) <= 1e-13);

  Eigen::VectorXd x(t.edge_count());
  std::mt19937_64 rng(59);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < t.edge_count(); ++k) x(k) = 0.01 * gauss(rng);
  const CalibrationSolution via_problem = problem.solve(x, CaseTag::Full);
  const CalibrationSolution via_free = solve_full(problem.b(), q, x);
  CHECK((via_problem.estimate - via_free.estimate).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((problem.estimate(x, CaseTag::Full) - via_free.estimate).cwiseAbs().maxCoeff() <= 1e-13);

  CHECK_THROWS_AS(CalibrationProblem(t, q, SubsetSpec(9, {0, 2})), ModelError);
  CHECK_THROWS_AS(CalibrationProblem(build_line(4), q), std::invalid_argument);  // M mismatch
}
