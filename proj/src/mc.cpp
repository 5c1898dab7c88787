// SPDX-License-Identifier: Apache-2.0
#include "otacal/mc.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace otacal {
namespace {

constexpr std::int64_t kChunkTrials = 4096;  // fixed, so results do not depend on thread count

struct ChunkSums {
  Eigen::VectorXd sum_d;      // deviations from the theory mean
  Eigen::MatrixXd sum_outer;  // sum of d d^T
  std::complex<double> sum_g{0.0, 0.0};
  double sum_g2 = 0.0;
};

ChunkSums combine(const ChunkSums& a, const ChunkSums& b) {
  ChunkSums out;
  out.sum_d = a.sum_d + b.sum_d;
  out.sum_outer = a.sum_outer + b.sum_outer;
  out.sum_g = a.sum_g + b.sum_g;
  out.sum_g2 = a.sum_g2 + b.sum_g2;
  return out;
}

// Pairwise tree reduction in chunk-index order.
ChunkSums reduce(const std::vector<ChunkSums>& chunks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return chunks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return combine(reduce(chunks, lo, mid), reduce(chunks, mid, hi));
}

McReport run_engine(const CalibrationProblem& problem, const BeamformScenario* scenario,
                    const McConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trial count must be positive");
  if (cfg.noise_scale < 0.0) throw std::invalid_argument("noise scale must be nonnegative");
  const int n = problem.topology().node_count();
  if (cfg.phi_true.size() != n) {
    throw std::invalid_argument("phi_true length does not match node count");
  }
  const CaseTag tag = cfg.estimation_case;
  const Eigen::MatrixXd& b = (tag == CaseTag::Full) ? problem.b().matrix
                                                    : problem.b_omega().matrix;
  const NoiseModel& noise = (tag == CaseTag::Full) ? problem.noise() : problem.noise_omega();
  const Eigen::VectorXd x_clean = b * cfg.phi_true;

  McReport rep;
  rep.trials = cfg.trials;
  rep.master_seed = cfg.master_seed;
  rep.estimation_case = tag;
  rep.theory_mean = problem.projector_for(tag) * cfg.phi_true;
  rep.theory_cov = (cfg.noise_scale * cfg.noise_scale) * problem.covariance_for(tag);
  rep.has_beamforming = scenario != nullptr;
  if (scenario != nullptr) {
    rep.theory_var_g = var_g(*scenario, rep.theory_cov);
  }
  if (cfg.collect_trials) {
    rep.trial_estimates.resize(cfg.trials, n);
    if (scenario != nullptr) rep.trial_g.resize(cfg.trials);
  }

  const std::int64_t num_chunks = (cfg.trials + kChunkTrials - 1) / kChunkTrials;
  std::vector<ChunkSums> chunks(static_cast<std::size_t>(num_chunks));
  std::atomic<std::int64_t> next_chunk{0};

  const auto worker = [&]() {
    for (;;) {
      const std::int64_t c = next_chunk.fetch_add(1);
      if (c >= num_chunks) return;
      ChunkSums acc;
      acc.sum_d = Eigen::VectorXd::Zero(n);
      acc.sum_outer = Eigen::MatrixXd::Zero(n, n);
      const std::int64_t lo = c * kChunkTrials;
      const std::int64_t hi = std::min(cfg.trials, lo + kChunkTrials);
      for (std::int64_t t = lo; t < hi; ++t) {
        RngStream stream = derive_stream(cfg.master_seed, static_cast<std::uint64_t>(t));
        const Eigen::VectorXd x = x_clean + cfg.noise_scale * noise.sample(stream);
        const Eigen::VectorXd phi_hat = problem.estimate(x, tag);
        const Eigen::VectorXd d = phi_hat - rep.theory_mean;
        acc.sum_d += d;
        acc.sum_outer += d * d.transpose();
        if (scenario != nullptr) {
          const std::complex<double> g = effective_channel(*scenario, cfg.phi_true, phi_hat);
          acc.sum_g += g;
          acc.sum_g2 += std::norm(g);
          if (cfg.collect_trials) rep.trial_g(t) = g;
        }
        if (cfg.collect_trials) rep.trial_estimates.row(t) = phi_hat.transpose();
      }
      chunks[static_cast<std::size_t>(c)] = std::move(acc);
    }
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  const ChunkSums total = reduce(chunks, 0, chunks.size());
  const double tn = static_cast<double>(cfg.trials);
  const Eigen::VectorXd mean_d = total.sum_d / tn;
  rep.empirical_mean = rep.theory_mean + mean_d;
  if (cfg.trials > 1) {
    rep.empirical_cov =
        (total.sum_outer - tn * (mean_d * mean_d.transpose())) / (tn - 1.0);
  } else {
    rep.empirical_cov = Eigen::MatrixXd::Zero(n, n);
  }

  double bias_sigmas = 0.0;
  for (int k = 0; k < n; ++k) {
    const double se = std::sqrt(std::max(0.0, rep.empirical_cov(k, k)) / tn);
    if (se > 0.0) bias_sigmas = std::max(bias_sigmas, std::abs(mean_d(k)) / se);
  }
  rep.max_abs_bias_sigmas = bias_sigmas;

  const double theory_norm = rep.theory_cov.norm();
  rep.cov_rel_frobenius_gap =
      theory_norm > 0.0 ? (rep.empirical_cov - rep.theory_cov).norm() / theory_norm
                        : rep.empirical_cov.norm();

  if (scenario != nullptr) {
    rep.empirical_mean_g = total.sum_g / tn;
    rep.empirical_var_g = total.sum_g2 / tn - std::norm(rep.empirical_mean_g);
    rep.var_g_rel_gap = rep.theory_var_g > 0.0
                            ? std::abs(rep.empirical_var_g - rep.theory_var_g) / rep.theory_var_g
                            : rep.empirical_var_g;
  }
  return rep;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

}  // namespace

McReport run_calibration_mc(const CalibrationProblem& problem, const McConfig& cfg) {
  return run_engine(problem, nullptr, cfg);
}

McReport run_beamforming_mc(const CalibrationProblem& problem, const BeamformScenario& scenario,
                            const McConfig& cfg) {
  if (scenario.v.size() != problem.topology().node_count()) {
    throw std::invalid_argument("scenario dimension does not match problem");
  }
  return run_engine(problem, &scenario, cfg);
}

nlohmann::json mc_report_to_json(const McReport& report) {
  nlohmann::json j;
  j["trials"] = report.trials;
  j["master_seed"] = report.master_seed;
  j["estimation_case"] = report.estimation_case == CaseTag::Full ? "full" : "subset";
  j["empirical_mean"] = vector_to_json(report.empirical_mean);
  j["theory_mean"] = vector_to_json(report.theory_mean);
  j["empirical_cov"] = matrix_to_json(report.empirical_cov);
  j["theory_cov"] = matrix_to_json(report.theory_cov);
  j["max_abs_bias_sigmas"] = report.max_abs_bias_sigmas;
  j["cov_rel_frobenius_gap"] = report.cov_rel_frobenius_gap;
  if (report.has_beamforming) {
    j["empirical_mean_g"] = {report.empirical_mean_g.real(), report.empirical_mean_g.imag()};
    j["empirical_var_g"] = report.empirical_var_g;
    j["theory_var_g"] = report.theory_var_g;
    j["var_g_rel_gap"] = report.var_g_rel_gap;
  }
  return j;
}

}  // namespace otacal
