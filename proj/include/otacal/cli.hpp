// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "otacal/calibrate.hpp"
#include "otacal/noise.hpp"
#include "otacal/topology.hpp"

namespace otacal::cli {

/// Plot-ready numeric table; written as CSV with 17-significant-digit values.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table_csv(const Table& t, std::ostream& os);

/// Per-antenna variance of the line topology under sigma2 * I noise, one row
/// (N, n, variance) per antenna, n 0-based.
Table figure_line_var(const std::vector<int>& n_list, double sigma2);
/// For each side s: grid8 s x s, subset = lower-left 3x3; rows
/// (N, var_case_a, var_case_b) for antenna 0.
Table figure_lis_var(const std::vector<int>& side_list, double sigma2);
/// Rows (N, gap) with gap = lambda_max(K_b - K_a) / lambda_max(K_b).
Table figure_lis_gap(const std::vector<int>& side_list, double sigma2);

struct TopologyRequest {
  std::string kind;  // line | ring | grid8 | complete | edge_list
  int n = 0;
  int rows = 0;
  int cols = 0;
  std::string path;  // edge_list
};

struct NoiseRequest {
  std::string kind = "scalar";  // scalar | diag | full
  double sigma2 = 1e-4;
  std::vector<double> vars;
  std::string path;  // full: dense CSV
};

Topology make_topology(const TopologyRequest& r);
NoiseModel make_noise(const NoiseRequest& r, int measurement_count);

struct CalibrateRequest {
  TopologyRequest topology;
  NoiseRequest noise;
  std::optional<std::vector<int>> subset;
  std::string subset_path;
  std::string measurements_path;  // read x from file, or ...
  std::string phi_true_path;      // ... synthesize x = B phi + w from a seed
  std::uint64_t seed = 0;
  std::string out_prefix = "calibration";
};

/// Writes <prefix>_phi.csv, <prefix>_cov.csv and <prefix>_meta.json.
void run_calibrate(const CalibrateRequest& r);

struct McRequest {
  TopologyRequest topology;
  NoiseRequest noise;
  std::optional<std::vector<int>> subset;
  std::string subset_path;
  std::string phi_true_path;  // zeros when empty
  std::uint64_t seed = 0;
  std::int64_t trials = 10000;
  int threads = 1;
  bool subset_case = false;  // estimate from subset-internal measurements
  bool beamform = false;     // add effective-channel statistics
  bool gate = false;         // exit 3 when a statistical gate fails
  std::string report_path;   // stdout when empty
  std::string dump_path;     // optional per-trial CSV
};

/// Returns 0, or 3 when gating is enabled and a statistical gate fails.
int run_mc(const McRequest& r);

void run_topo(const TopologyRequest& r, const std::string& out_path);

nlohmann::json spectra_report_json(const std::string& kind, int n, double sigma2);

CalibrateRequest calibrate_request_from_json(const nlohmann::json& j);
McRequest mc_request_from_json(const nlohmann::json& j);

std::vector<int> parse_int_list(const std::string& csv);
std::vector<double> parse_double_list(const std::string& csv);

}  // namespace otacal::cli
