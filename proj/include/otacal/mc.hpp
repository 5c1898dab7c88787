// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <optional>

#include "otacal/beamform.hpp"
#include "otacal/calibrate.hpp"

#include <nlohmann/json_fwd.hpp>

namespace otacal {

struct McConfig {
  std::uint64_t master_seed = 0;
  std::int64_t trials = 1;
  Eigen::VectorXd phi_true;
  CaseTag estimation_case = CaseTag::Full;
  /// Multiplies the sampled noise (and, squared, the theory covariance);
  /// zero gives noiseless trials while the model Q itself stays positive
  /// definite.
  double noise_scale = 1.0;
  int threads = 1;
  /// Keep every trial's estimate (and g) in the report, for debugging dumps.
  bool collect_trials = false;
};

struct McReport {
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
  CaseTag estimation_case = CaseTag::Full;
  Eigen::VectorXd empirical_mean;
  Eigen::VectorXd theory_mean;
  Eigen::MatrixXd empirical_cov;
  Eigen::MatrixXd theory_cov;
  double max_abs_bias_sigmas = 0.0;
  double cov_rel_frobenius_gap = 0.0;

  bool has_beamforming = false;
  std::complex<double> empirical_mean_g{0.0, 0.0};
  double empirical_var_g = 0.0;
  double theory_var_g = 0.0;
  double var_g_rel_gap = 0.0;

  Eigen::MatrixXd trial_estimates;  // trials x N when collected
  Eigen::VectorXcd trial_g;         // trials when collected with beamforming
};

/// Samples noise, forms x = B phi + w, solves, and accumulates empirical
/// moments against the exact mean and covariance oracles.  Trial t always
/// draws from the stream derived from (master_seed, t), and partial sums are
/// combined in a fixed chunk order, so the report is identical for any
/// thread count and scheduling.
McReport run_calibration_mc(const CalibrationProblem& problem, const McConfig& cfg);

/// Same trial loop, additionally evaluating the exact effective channel g
/// per trial and comparing its empirical variance with v^H cov v.
McReport run_beamforming_mc(const CalibrationProblem& problem, const BeamformScenario& scenario,
                            const McConfig& cfg);

nlohmann::json mc_report_to_json(const McReport& report);

}  // namespace otacal
