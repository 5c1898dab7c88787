// SPDX-License-Identifier: Apache-2.0
//
// otacal: over-the-air phase calibration analysis for distributed antenna
// arrays.  Subcommands build measurement topologies, run the least-squares
// calibration estimators, validate the closed-form covariances by Monte
// Carlo, and emit plot-ready tables for the line and grid studies.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "otacal/cli.hpp"
#include "otacal/errors.hpp"
#include "otacal/io.hpp"
#include "otacal/spectra.hpp"

namespace {

using otacal::cli::CalibrateRequest;
using otacal::cli::McRequest;
using otacal::cli::NoiseRequest;
using otacal::cli::Table;
using otacal::cli::TopologyRequest;

struct FlagState {
  TopologyRequest topology;
  NoiseRequest noise;
  std::string subset_csv;
  std::string subset_path;
};

void add_topology_flags(CLI::App* cmd, TopologyRequest& r) {
  cmd->add_option("--kind", r.kind, "line | ring | grid8 | complete | edge_list");
  cmd->add_option("--n", r.n, "node count (line, ring, complete)");
  cmd->add_option("--rows", r.rows, "grid8 rows");
  cmd->add_option("--cols", r.cols, "grid8 cols");
  cmd->add_option("--edges", r.path, "edge-list file (edge_list kind)");
}

void add_noise_flags(CLI::App* cmd, NoiseRequest& r, std::string& vars_csv) {
  cmd->add_option("--noise", r.kind, "scalar | diag | full (default scalar)");
  cmd->add_option("--sigma2", r.sigma2, "scalar noise variance (0 = noiseless synthesis)");
  cmd->add_option("--vars", vars_csv, "comma-separated per-edge variances (diag)");
  cmd->add_option("--q", r.path, "dense covariance CSV (full)");
}

void finish_noise(NoiseRequest& r, const std::string& vars_csv) {
  if (!vars_csv.empty()) r.vars = otacal::cli::parse_double_list(vars_csv);
}

std::optional<std::vector<int>> subset_from_flags(const std::string& csv) {
  if (csv.empty()) return std::nullopt;
  return otacal::cli::parse_int_list(csv);
}

void emit_table(const Table& t, const std::string& out_path) {
  if (out_path.empty()) {
    otacal::cli::write_table_csv(t, std::cout);
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::invalid_argument("cannot open file for writing: " + out_path);
    otacal::cli::write_table_csv(t, os);
  }
}

nlohmann::json load_config(const std::string& path) {
  const std::string text = otacal::io::read_text_file(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config is not valid JSON: " + path);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"over-the-air phase calibration analysis for distributed antenna arrays"};
  app.require_subcommand(1);

  int exit_code = 0;

  // --- topo ---------------------------------------------------------------
  auto* topo = app.add_subcommand("topo", "build a topology and write its edge list");
  auto topo_state = std::make_shared<TopologyRequest>();
  auto topo_out = std::make_shared<std::string>();
  add_topology_flags(topo, *topo_state);
  topo->add_option("--out", *topo_out, "output path (stdout when omitted)");
  topo->callback([topo_state, topo_out]() { otacal::cli::run_topo(*topo_state, *topo_out); });

  // --- calibrate ----------------------------------------------------------
  auto* cal = app.add_subcommand("calibrate", "solve a calibration problem and write the results");
  auto cal_req = std::make_shared<CalibrateRequest>();
  auto cal_cfg = std::make_shared<std::string>();
  auto cal_vars = std::make_shared<std::string>();
  auto cal_subset = std::make_shared<std::string>();
  cal->add_option("--config", *cal_cfg, "JSON config file; flags are ignored when given");
  add_topology_flags(cal, cal_req->topology);
  add_noise_flags(cal, cal_req->noise, *cal_vars);
  cal->add_option("--subset", *cal_subset, "comma-separated participating antennas");
  cal->add_option("--subset-file", cal_req->subset_path, "subset file (one line of indices)");
  cal->add_option("--measurements", cal_req->measurements_path, "measurement vector CSV");
  cal->add_option("--phi-true", cal_req->phi_true_path, "true phases CSV, synthesize x = B phi + w");
  cal->add_option("--seed", cal_req->seed, "synthesis seed");
  cal->add_option("--out", cal_req->out_prefix, "output prefix (default 'calibration')");
  cal->callback([cal_req, cal_cfg, cal_vars, cal_subset]() {
    if (!cal_cfg->empty()) {
      otacal::cli::run_calibrate(otacal::cli::calibrate_request_from_json(load_config(*cal_cfg)));
      return;
    }
    finish_noise(cal_req->noise, *cal_vars);
    cal_req->subset = subset_from_flags(*cal_subset);
    otacal::cli::run_calibrate(*cal_req);
  });

  // --- mc -----------------------------------------------------------------
  auto* mc = app.add_subcommand("mc", "Monte Carlo validation of the exact moments");
  auto mc_req = std::make_shared<McRequest>();
  auto mc_cfg = std::make_shared<std::string>();
  auto mc_vars = std::make_shared<std::string>();
  auto mc_subset = std::make_shared<std::string>();
  mc->add_option("--config", *mc_cfg, "JSON config file; flags are ignored when given");
  add_topology_flags(mc, mc_req->topology);
  add_noise_flags(mc, mc_req->noise, *mc_vars);
  mc->add_option("--subset", *mc_subset, "comma-separated participating antennas");
  mc->add_option("--subset-file", mc_req->subset_path, "subset file");
  mc->add_option("--phi-true", mc_req->phi_true_path, "true phases CSV (zeros when omitted)");
  mc->add_option("--seed", mc_req->seed, "master seed");
  mc->add_option("--trials", mc_req->trials, "trial count");
  mc->add_option("--threads", mc_req->threads, "worker threads (results independent of this)");
  mc->add_flag("--subset-case", mc_req->subset_case, "estimate from subset-internal measurements");
  mc->add_flag("--beamform", mc_req->beamform, "add effective-channel statistics");
  mc->add_flag("--gate", mc_req->gate, "exit 3 when a statistical gate fails");
  mc->add_option("--report", mc_req->report_path, "report JSON path (stdout when omitted)");
  mc->add_option("--dump", mc_req->dump_path, "per-trial dump CSV (debugging)");
  mc->callback([mc_req, mc_cfg, mc_vars, mc_subset, &exit_code]() {
    if (!mc_cfg->empty()) {
      exit_code = otacal::cli::run_mc(otacal::cli::mc_request_from_json(load_config(*mc_cfg)));
      return;
    }
    finish_noise(mc_req->noise, *mc_vars);
    mc_req->subset = subset_from_flags(*mc_subset);
    exit_code = otacal::cli::run_mc(*mc_req);
  });

  // --- figure -------------------------------------------------------------
  auto* figure = app.add_subcommand("figure", "plot-ready tables for the topology studies");
  figure->require_subcommand(1);

  auto fig_sigma2 = std::make_shared<double>(1e-4);
  auto fig_list = std::make_shared<std::string>();
  auto fig_out = std::make_shared<std::string>();

  auto* line_var = figure->add_subcommand("line-var", "per-antenna variance of the line topology");
  line_var->add_option("--n-list", *fig_list, "comma-separated antenna counts")->required();
  line_var->add_option("--sigma2", *fig_sigma2, "noise variance (default 1e-4)");
  line_var->add_option("--out", *fig_out, "output CSV (stdout when omitted)");
  line_var->callback([fig_list, fig_sigma2, fig_out]() {
    emit_table(otacal::cli::figure_line_var(otacal::cli::parse_int_list(*fig_list), *fig_sigma2),
               *fig_out);
  });

  auto* lis_var = figure->add_subcommand(
      "lis-var", "variance at the corner antenna of the grid, all-vs-subset calibration");
  lis_var->add_option("--side-list", *fig_list, "comma-separated grid sides (>= 3)")->required();
  lis_var->add_option("--sigma2", *fig_sigma2, "noise variance (default 1e-4)");
  lis_var->add_option("--out", *fig_out, "output CSV (stdout when omitted)");
  lis_var->callback([fig_list, fig_sigma2, fig_out]() {
    emit_table(otacal::cli::figure_lis_var(otacal::cli::parse_int_list(*fig_list), *fig_sigma2),
               *fig_out);
  });

  auto* lis_gap = figure->add_subcommand("lis-gap", "relative kernel eigenvalue gap for the grid");
  lis_gap->add_option("--side-list", *fig_list, "comma-separated grid sides (>= 3)")->required();
  lis_gap->add_option("--sigma2", *fig_sigma2, "noise variance (default 1e-4)");
  lis_gap->add_option("--out", *fig_out, "output CSV (stdout when omitted)");
  lis_gap->callback([fig_list, fig_sigma2, fig_out]() {
    emit_table(otacal::cli::figure_lis_gap(otacal::cli::parse_int_list(*fig_list), *fig_sigma2),
               *fig_out);
  });

  // --- spectra ------------------------------------------------------------
  auto* spectra = app.add_subcommand("spectra", "closed-form eigenstructure reports");
  spectra->require_subcommand(1);
  auto* sp_report = spectra->add_subcommand("report", "closed forms vs numeric covariance");
  auto sp_kind = std::make_shared<std::string>("line");
  auto sp_n = std::make_shared<int>(8);
  auto sp_sigma2 = std::make_shared<double>(1.0);
  auto sp_out = std::make_shared<std::string>();
  sp_report->add_option("--kind", *sp_kind, "line | ring | complete");
  sp_report->add_option("--n", *sp_n, "antenna count")->required();
  sp_report->add_option("--sigma2", *sp_sigma2, "noise variance (default 1)");
  sp_report->add_option("--out", *sp_out, "output JSON (stdout when omitted)");
  sp_report->callback([sp_kind, sp_n, sp_sigma2, sp_out]() {
    const nlohmann::json j = otacal::cli::spectra_report_json(*sp_kind, *sp_n, *sp_sigma2);
    if (sp_out->empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      otacal::io::write_text_file(*sp_out, j.dump(2) + "\n");
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  } catch (const otacal::ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
