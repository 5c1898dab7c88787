// SPDX-License-Identifier: Apache-2.0
#include "otacal/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "otacal/beamform.hpp"
#include "otacal/io.hpp"
#include "otacal/mc.hpp"
#include "otacal/spectra.hpp"

namespace otacal::cli {
namespace {

// Stream indices reserved for scenario construction; trial streams use the
// trial index directly, which stays far below these.
constexpr std::uint64_t kChannelStream = (1ULL << 62);
constexpr std::uint64_t kCoordStream = (1ULL << 62) + 1;
constexpr std::uint64_t kSynthesisStream = (1ULL << 62) + 2;

// Statistical gates for `mc --gate`.
constexpr double kGateCovGap = 0.03;
constexpr double kGateBiasSigmas = 4.0;
constexpr double kGateVarGGap = 0.05;

SubsetSpec lower_left_3x3(int side) {
  std::vector<int> members;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) members.push_back(r * side + c);
  }
  return {side * side, std::move(members)};
}

std::ostream& out_or_file(const std::string& path, std::ofstream& storage) {
  if (path.empty()) return std::cout;
  storage.open(path);
  if (!storage) throw std::invalid_argument("cannot open file for writing: " + path);
  return storage;
}

std::optional<std::vector<int>> resolve_subset(const std::optional<std::vector<int>>& inline_members,
                                               const std::string& path) {
  if (inline_members && !path.empty()) {
    throw std::invalid_argument("give the subset inline or as a file, not both");
  }
  if (inline_members) return inline_members;
  if (!path.empty()) return io::read_subset_file(path);
  return std::nullopt;
}

bool noiseless_scalar(const NoiseRequest& r) { return r.kind == "scalar" && r.sigma2 == 0.0; }

Eigen::VectorXcd random_unit_modulus_channel(int n, RngStream& stream) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Eigen::VectorXcd h(n);
  for (int k = 0; k < n; ++k) h(k) = std::exp(std::complex<double>(0.0, angle(stream)));
  return h;
}

}  // namespace

void write_table_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c > 0) os << ',';
    os << t.columns[c];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw std::logic_error("ragged table row");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) os << ',';
      os << io::format_double(row[c]);
    }
    os << '\n';
  }
}

Table figure_line_var(const std::vector<int>& n_list, double sigma2) {
  Table t;
  t.columns = {"N", "n", "variance"};
  for (int n : n_list) {
    const Eigen::VectorXd vars = line_variances(n, sigma2);
    for (int node = 0; node < n; ++node) {
      t.rows.push_back({static_cast<double>(n), static_cast<double>(node), vars(node)});
    }
  }
  return t;
}

Table figure_lis_var(const std::vector<int>& side_list, double sigma2) {
  Table t;
  t.columns = {"N", "var_case_a", "var_case_b"};
  for (int side : side_list) {
    if (side < 3) throw std::invalid_argument("lis-var needs side >= 3");
    Topology topo = build_grid8(side, side);
    NoiseModel noise = NoiseModel::scalar(topo.edge_count(), sigma2);
    CalibrationProblem problem(std::move(topo), std::move(noise), lower_left_3x3(side));
    const double var_a = variance_at(problem.full_laplacian(), problem.full_spectrum(), 0);
    const double var_b = variance_at(problem.subset_laplacian(), problem.subset_spectrum(), 0);
    t.rows.push_back({static_cast<double>(side * side), var_a, var_b});
  }
  return t;
}

Table figure_lis_gap(const std::vector<int>& side_list, double sigma2) {
  Table t;
  t.columns = {"N", "gap"};
  for (int side : side_list) {
    if (side < 3) throw std::invalid_argument("lis-gap needs side >= 3");
    Topology topo = build_grid8(side, side);
    NoiseModel noise = NoiseModel::scalar(topo.edge_count(), sigma2);
    CalibrationProblem problem(std::move(topo), std::move(noise), lower_left_3x3(side));
    t.rows.push_back({static_cast<double>(side * side), kernel_gap(make_kernel_pair(problem))});
  }
  return t;
}

Topology make_topology(const TopologyRequest& r) {
  if (r.kind == "line") return build_line(r.n);
  if (r.kind == "ring") return build_ring(r.n);
  if (r.kind == "grid8") return build_grid8(r.rows, r.cols);
  if (r.kind == "complete") return build_complete(r.n);
  if (r.kind == "edge_list" || r.kind == "edge-list") {
    if (r.path.empty()) throw std::invalid_argument("edge_list topology needs a path");
    return io::read_edge_list_file(r.path);
  }
  throw std::invalid_argument("unknown topology kind: '" + r.kind + "'");
}

NoiseModel make_noise(const NoiseRequest& r, int measurement_count) {
  if (r.kind == "scalar") {
    if (noiseless_scalar(r)) return NoiseModel::scalar(measurement_count, 1.0);
    return NoiseModel::scalar(measurement_count, r.sigma2);
  }
  if (r.kind == "diag") {
    Eigen::VectorXd v(static_cast<Eigen::Index>(r.vars.size()));
    for (std::size_t k = 0; k < r.vars.size(); ++k) v(static_cast<Eigen::Index>(k)) = r.vars[k];
    if (v.size() != measurement_count) {
      throw std::invalid_argument("diag noise needs exactly M=" +
                                  std::to_string(measurement_count) + " variances");
    }
    return NoiseModel::diagonal(std::move(v));
  }
  if (r.kind == "full") {
    if (r.path.empty()) throw std::invalid_argument("full noise needs a CSV path");
    Eigen::MatrixXd q = io::read_matrix_csv_file(r.path);
    if (q.rows() != measurement_count) {
      throw std::invalid_argument("noise covariance is " + std::to_string(q.rows()) + "x" +
                                  std::to_string(q.cols()) + ", expected M=" +
                                  std::to_string(measurement_count));
    }
    return NoiseModel::full(std::move(q));
  }
  throw std::invalid_argument("unknown noise kind: '" + r.kind + "'");
}

void run_calibrate(const CalibrateRequest& r) {
  Topology topo = make_topology(r.topology);
  const int m = topo.edge_count();
  const bool noiseless = noiseless_scalar(r.noise);
  NoiseModel noise = make_noise(r.noise, m);
  const auto subset_members = resolve_subset(r.subset, r.subset_path);
  std::optional<SubsetSpec> omega;
  if (subset_members) omega.emplace(topo.node_count(), *subset_members);

  CalibrationProblem problem(std::move(topo), std::move(noise), omega);
  const CaseTag tag = omega ? CaseTag::Subset : CaseTag::Full;
  const int m_active = problem.measurement_count(tag);

  Eigen::VectorXd x;
  if (!r.measurements_path.empty()) {
    x = io::read_vector_csv_file(r.measurements_path);
    if (tag == CaseTag::Subset && x.size() == m) {
      // Full-length measurement vector: keep the subset-internal rows.
      Eigen::VectorXd x_omega(m_active);
      for (int k = 0; k < m_active; ++k) {
        x_omega(k) = x(problem.row_index_map()[static_cast<std::size_t>(k)]);
      }
      x = std::move(x_omega);
    }
    if (x.size() != m_active) {
      throw std::invalid_argument("measurement vector has length " + std::to_string(x.size()) +
                                  ", expected M=" + std::to_string(m_active));
    }
  } else if (!r.phi_true_path.empty()) {
    const Eigen::VectorXd phi = io::read_vector_csv_file(r.phi_true_path);
    if (phi.size() != problem.topology().node_count()) {
      throw std::invalid_argument("phi_true has length " + std::to_string(phi.size()) +
                                  ", expected N=" +
                                  std::to_string(problem.topology().node_count()));
    }
    const Eigen::MatrixXd& b = (tag == CaseTag::Full) ? problem.b().matrix
                                                      : problem.b_omega().matrix;
    x = b * phi;
    if (!noiseless) {
      RngStream stream = derive_stream(r.seed, kSynthesisStream);
      const NoiseModel& active =
          (tag == CaseTag::Full) ? problem.noise() : problem.noise_omega();
      x += active.sample(stream);
    }
  } else {
    throw std::invalid_argument("calibrate needs --measurements or --phi-true");
  }

  CalibrationSolution sol = problem.solve(x, tag);
  if (noiseless) sol.covariance.setZero();

  io::write_vector_csv_file(sol.estimate, r.out_prefix + "_phi.csv");
  io::write_matrix_csv_file(sol.covariance, r.out_prefix + "_cov.csv");
  nlohmann::json meta;
  meta["case"] = tag == CaseTag::Full ? "full" : "subset";
  meta["n"] = problem.topology().node_count();
  meta["m"] = m_active;
  meta["omega"] = sol.omega;
  meta["gauge"] = "common phase constant fixed to zero; minimum-norm estimate";
  io::write_text_file(r.out_prefix + "_meta.json", meta.dump(2) + "\n");
}

int run_mc(const McRequest& r) {
  Topology topo = make_topology(r.topology);
  const int n = topo.node_count();
  const int m = topo.edge_count();
  const bool noiseless = noiseless_scalar(r.noise);
  NoiseModel noise = make_noise(r.noise, m);

  auto subset_members = resolve_subset(r.subset, r.subset_path);
  if (r.beamform && !subset_members) {
    // Beamforming from every antenna.
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) all[static_cast<std::size_t>(k)] = k;
    subset_members = std::move(all);
  }
  if (r.subset_case && !subset_members) {
    throw std::invalid_argument("subset-case estimation needs a subset");
  }
  std::optional<SubsetSpec> omega;
  if (subset_members) omega.emplace(n, *subset_members);

  CalibrationProblem problem(std::move(topo), std::move(noise), omega);

  McConfig cfg;
  cfg.master_seed = r.seed;
  cfg.trials = r.trials;
  cfg.threads = r.threads;
  cfg.estimation_case = r.subset_case ? CaseTag::Subset : CaseTag::Full;
  cfg.noise_scale = noiseless ? 0.0 : 1.0;
  cfg.collect_trials = !r.dump_path.empty();
  if (!r.phi_true_path.empty()) {
    cfg.phi_true = io::read_vector_csv_file(r.phi_true_path);
    if (cfg.phi_true.size() != n) {
      throw std::invalid_argument("phi_true has length " + std::to_string(cfg.phi_true.size()) +
                                  ", expected N=" + std::to_string(n));
    }
  } else {
    cfg.phi_true = Eigen::VectorXd::Zero(n);
  }

  McReport report;
  if (r.beamform) {
    RngStream h_stream = derive_stream(r.seed, kChannelStream);
    const Eigen::VectorXcd h = random_unit_modulus_channel(n, h_stream);
    RngStream p_stream = derive_stream(r.seed, kCoordStream);
    const BeamformScenario scenario =
        make_null_steering(h, problem.omega(), problem.subset_laplacian().basis, p_stream);
    report = run_beamforming_mc(problem, scenario, cfg);
  } else {
    report = run_calibration_mc(problem, cfg);
  }

  nlohmann::json j = mc_report_to_json(report);
  {
    std::ofstream storage;
    std::ostream& os = out_or_file(r.report_path, storage);
    os << j.dump(2) << '\n';
  }

  if (!r.dump_path.empty()) {
    std::ofstream os(r.dump_path);
    if (!os) throw std::invalid_argument("cannot open file for writing: " + r.dump_path);
    os << "trial";
    for (int k = 0; k < n; ++k) os << ",phi_hat_" << k;
    if (report.has_beamforming) os << ",g_re,g_im";
    os << '\n';
    for (std::int64_t t = 0; t < report.trials; ++t) {
      os << t;
      for (int k = 0; k < n; ++k) os << ',' << io::format_double(report.trial_estimates(t, k));
      if (report.has_beamforming) {
        os << ',' << io::format_double(report.trial_g(t).real()) << ','
           << io::format_double(report.trial_g(t).imag());
      }
      os << '\n';
    }
  }

  if (r.gate) {
    bool ok = report.cov_rel_frobenius_gap <= kGateCovGap &&
              report.max_abs_bias_sigmas <= kGateBiasSigmas;
    if (report.has_beamforming && report.theory_var_g > 0.0) {
      ok = ok && report.var_g_rel_gap <= kGateVarGGap;
    }
    if (!ok) return 3;
  }
  return 0;
}

void run_topo(const TopologyRequest& r, const std::string& out_path) {
  const Topology t = make_topology(r);
  std::ofstream storage;
  std::ostream& os = out_or_file(out_path, storage);
  io::write_edge_list(t, os);
  std::cerr << "N=" << t.node_count() << " M=" << t.edge_count()
            << " connected=" << (is_connected(t) ? "true" : "false") << '\n';
}

nlohmann::json spectra_report_json(const std::string& kind, int n, double sigma2) {
  const ClosedFormReport rep = closed_form_report(kind, n, sigma2);
  nlohmann::json j;
  j["topology"] = rep.topology_kind;
  j["N"] = rep.n;
  j["sigma2"] = rep.sigma2;
  j["eigenvalues"] = rep.eigenvalues;
  j["variances"] = rep.per_node_variance;
  if (rep.bound_value) {
    j["bound"] = *rep.bound_value;
  } else {
    j["bound"] = nullptr;
  }
  j["matches_numeric"] = rep.matches_numeric;
  j["max_rel_dev"] = rep.max_rel_dev;
  return j;
}

namespace {

TopologyRequest topology_request_from_json(const nlohmann::json& j) {
  TopologyRequest r;
  r.kind = j.at("kind").get<std::string>();
  if (j.contains("n")) r.n = j.at("n").get<int>();
  if (j.contains("rows")) r.rows = j.at("rows").get<int>();
  if (j.contains("cols")) r.cols = j.at("cols").get<int>();
  if (j.contains("path")) r.path = j.at("path").get<std::string>();
  return r;
}

NoiseRequest noise_request_from_json(const nlohmann::json& j) {
  NoiseRequest r;
  r.kind = j.at("kind").get<std::string>();
  if (j.contains("sigma2")) r.sigma2 = j.at("sigma2").get<double>();
  if (j.contains("vars")) r.vars = j.at("vars").get<std::vector<double>>();
  if (j.contains("path")) r.path = j.at("path").get<std::string>();
  return r;
}

void subset_from_json(const nlohmann::json& j, std::optional<std::vector<int>>& inline_members,
                      std::string& path) {
  if (!j.contains("subset")) return;
  const nlohmann::json& s = j.at("subset");
  if (s.is_array()) {
    inline_members = s.get<std::vector<int>>();
  } else if (s.is_object() && s.contains("path")) {
    path = s.at("path").get<std::string>();
  } else {
    throw std::invalid_argument("subset must be an index array or {\"path\": ...}");
  }
}

std::string path_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const nlohmann::json& f = j.at(key);
  if (f.is_string()) return f.get<std::string>();
  if (f.is_object() && f.contains("path")) return f.at("path").get<std::string>();
  throw std::invalid_argument(std::string(key) + " must be a path string or {\"path\": ...}");
}

}  // namespace

CalibrateRequest calibrate_request_from_json(const nlohmann::json& j) {
  CalibrateRequest r;
  r.topology = topology_request_from_json(j.at("topology"));
  r.noise = noise_request_from_json(j.at("noise"));
  subset_from_json(j, r.subset, r.subset_path);
  r.measurements_path = path_field(j, "measurements");
  r.phi_true_path = path_field(j, "phi_true");
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) r.out_prefix = j.at("out").get<std::string>();
  return r;
}

McRequest mc_request_from_json(const nlohmann::json& j) {
  McRequest r;
  r.topology = topology_request_from_json(j.at("topology"));
  r.noise = noise_request_from_json(j.at("noise"));
  subset_from_json(j, r.subset, r.subset_path);
  r.phi_true_path = path_field(j, "phi_true");
  if (j.contains("seed")) r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("trials")) r.trials = j.at("trials").get<std::int64_t>();
  if (j.contains("threads")) r.threads = j.at("threads").get<int>();
  if (j.contains("estimation")) {
    const std::string c = j.at("estimation").get<std::string>();
    if (c == "subset") {
      r.subset_case = true;
    } else if (c != "full") {
      throw std::invalid_argument("estimation must be 'full' or 'subset'");
    }
  }
  if (j.contains("beamform")) r.beamform = j.at("beamform").get<bool>();
  if (j.contains("gate")) r.gate = j.at("gate").get<bool>();
  if (j.contains("report")) r.report_path = j.at("report").get<std::string>();
  if (j.contains("dump")) r.dump_path = j.at("dump").get<std::string>();
  return r;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(token, &pos);
      if (pos != token.size()) throw std::invalid_argument(token);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed integer list entry: '" + token + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(token, &pos);
      if (pos != token.size()) throw std::invalid_argument(token);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed number list entry: '" + token + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

}  // namespace otacal::cli
