// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "otacal/topology.hpp"

namespace otacal::io {

/// Doubles are printed with 17 significant digits ("%.16e"), which
/// round-trips exactly through parsing.
std::string format_double(double v);

/// Edge-list text format: first line "N M", then M lines "i j" (0-based).
void write_edge_list(const Topology& t, std::ostream& os);
void write_edge_list_file(const Topology& t, const std::string& path);
Topology read_edge_list(std::istream& is);
Topology read_edge_list_file(const std::string& path);

/// Subset file: one line of whitespace-separated member indices.
std::vector<int> read_subset(std::istream& is);
std::vector<int> read_subset_file(const std::string& path);

void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& os);
void write_matrix_csv_file(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd read_matrix_csv(std::istream& is);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);

/// Vectors are written one value per line; the reader also accepts a single
/// comma-separated row.
void write_vector_csv(const Eigen::VectorXd& v, std::ostream& os);
void write_vector_csv_file(const Eigen::VectorXd& v, const std::string& path);
Eigen::VectorXd read_vector_csv(std::istream& is);
Eigen::VectorXd read_vector_csv_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace otacal::io
