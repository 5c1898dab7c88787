// SPDX-License-Identifier: Apache-2.0
#include "otacal/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace otacal::io {
namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open file for reading: " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open file for writing: " + path);
  return os;
}

double parse_double(const std::string& token) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed number: '" + token + "'");
  }
  if (pos != token.size()) throw std::invalid_argument("malformed number: '" + token + "'");
  return v;
}

std::vector<double> parse_csv_line(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string token;
  while (std::getline(ss, token, ',')) {
    // trim surrounding whitespace
    const auto first = token.find_first_not_of(" \t\r");
    const auto last = token.find_last_not_of(" \t\r");
    if (first == std::string::npos) throw std::invalid_argument("empty CSV field");
    out.push_back(parse_double(token.substr(first, last - first + 1)));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

void write_edge_list(const Topology& t, std::ostream& os) {
  os << t.node_count() << ' ' << t.edge_count() << '\n';
  for (const Edge& e : t.edges()) os << e.i << ' ' << e.j << '\n';
}

void write_edge_list_file(const Topology& t, const std::string& path) {
  auto os = open_out(path);
  write_edge_list(t, os);
}

Topology read_edge_list(std::istream& is) {
  int n = 0;
  int m = 0;
  if (!(is >> n >> m)) throw std::invalid_argument("edge list header must be 'N M'");
  if (m < 0) throw std::invalid_argument("negative edge count");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    int a = 0;
    int b = 0;
    if (!(is >> a >> b)) {
      throw std::invalid_argument("edge list ended early: expected " + std::to_string(m) +
                                  " edges");
    }
    pairs.emplace_back(a, b);
  }
  return from_edge_list(n, pairs);
}

Topology read_edge_list_file(const std::string& path) {
  auto is = open_in(path);
  return read_edge_list(is);
}

std::vector<int> read_subset(std::istream& is) {
  std::vector<int> members;
  int v = 0;
  while (is >> v) members.push_back(v);
  if (members.empty()) throw std::invalid_argument("subset file holds no indices");
  return members;
}

std::vector<int> read_subset_file(const std::string& path) {
  auto is = open_in(path);
  return read_subset(is);
}

void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& os) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ',';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

void write_matrix_csv_file(const Eigen::MatrixXd& m, const std::string& path) {
  auto os = open_out(path);
  write_matrix_csv(m, os);
}

Eigen::MatrixXd read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_csv_line(line));
    if (rows.back().size() != rows.front().size()) {
      throw std::invalid_argument("ragged CSV: row " + std::to_string(rows.size()) + " has " +
                                  std::to_string(rows.back().size()) + " fields");
    }
  }
  if (rows.empty()) throw std::invalid_argument("empty CSV matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

Eigen::MatrixXd read_matrix_csv_file(const std::string& path) {
  auto is = open_in(path);
  return read_matrix_csv(is);
}

void write_vector_csv(const Eigen::VectorXd& v, std::ostream& os) {
  for (Eigen::Index k = 0; k < v.size(); ++k) os << format_double(v(k)) << '\n';
}

void write_vector_csv_file(const Eigen::VectorXd& v, const std::string& path) {
  auto os = open_out(path);
  write_vector_csv(v, os);
}

Eigen::VectorXd read_vector_csv(std::istream& is) {
  const Eigen::MatrixXd m = read_matrix_csv(is);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw std::invalid_argument("expected a vector, got a " + std::to_string(m.rows()) + "x" +
                              std::to_string(m.cols()) + " matrix");
}

Eigen::VectorXd read_vector_csv_file(const std::string& path) {
  auto is = open_in(path);
  return read_vector_csv(is);
}

std::string read_text_file(const std::string& path) {
  auto is = open_in(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  auto os = open_out(path);
  os << content;
}

}  // namespace otacal::io
