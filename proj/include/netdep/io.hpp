#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "netdep/assoc.hpp"
#include "netdep/errors.hpp"
#include "netdep/graph.hpp"
#include "netdep/lmm.hpp"
#include "netdep/nam.hpp"
#include "netdep/simharness.hpp"

namespace netdep::io {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& token, const std::string& file, int line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end) {
    throw ParameterError(file + " line " + std::to_string(line) + ": expected a number, got '" +
                         token + "'");
  }
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError(path + ": cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParameterError(path + ": cannot open for writing");
  return out;
}

}  // namespace detail

// ---- vectors: single-column CSV with a `value` header ----

inline void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
  auto out = detail::open_out(path);
  out << "value\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) out << detail::format_double(v(i)) << "\n";
}

inline Eigen::VectorXd read_vector_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines[0] != "value") {
    throw ParameterError(path + " line 1: expected header 'value'");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(lines.size()) - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    v(static_cast<Eigen::Index>(i) - 1) = detail::parse_double(lines[i], path, static_cast<int>(i) + 1);
  }
  return v;
}

// ---- dense matrices: headerless rows of comma-separated numbers ----

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = detail::open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParameterError(path + ": empty matrix file");
  const auto first = detail::split_csv_line(lines[0]);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(lines.size()),
                    static_cast<Eigen::Index>(first.size()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != first.size()) {
      throw ParameterError(path + " line " + std::to_string(i + 1) + ": expected " +
                           std::to_string(first.size()) + " columns, got " +
                           std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::parse_double(fields[j], path, static_cast<int>(i) + 1);
    }
  }
  return m;
}

// ---- adjacency matrices ----

// Edge-list CSV: header `src,dst`, 0-indexed, one undirected edge per row
// (written with src < dst). Isolated nodes are invisible to this format, so
// readers accept an explicit node count; with n < 0 the count is inferred as
// the largest endpoint + 1.
inline void write_edge_list_csv(const std::string& path, const AdjacencyMatrix& a) {
  if (!a.symmetric()) {
    throw ContractError("edge-list serialization is defined for symmetric networks");
  }
  auto out = detail::open_out(path);
  out << "src,dst\n";
  for (int i = 0; i < a.n(); ++i) {
    for (int j = i + 1; j < a.n(); ++j) {
      if (a(i, j) != 0.0) out << i << ',' << j << '\n';
    }
  }
}

inline AdjacencyMatrix read_edge_list_csv(const std::string& path, int n = -1) {
  const auto lines = detail::read_lines(path);
  if (lines.empty() || lines[0] != "src,dst") {
    throw ParameterError(path + " line 1: expected header 'src,dst'");
  }
  std::vector<std::pair<int, int>> edges;
  int max_node = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != 2) {
      throw ParameterError(path + " line " + std::to_string(i + 1) +
                           ": expected 'src,dst' pair");
    }
    const int line_no = static_cast<int>(i) + 1;
    const double src = detail::parse_double(fields[0], path, line_no);
    const double dst = detail::parse_double(fields[1], path, line_no);
    if (src != static_cast<int>(src) || dst != static_cast<int>(dst) || src < 0 || dst < 0) {
      throw ParameterError(path + " line " + std::to_string(line_no) +
                           ": node ids must be nonnegative integers");
    }
    edges.emplace_back(static_cast<int>(src), static_cast<int>(dst));
    max_node = std::max({max_node, static_cast<int>(src), static_cast<int>(dst)});
  }
  const int node_count = n >= 0 ? n : max_node + 1;
  if (node_count < 1) {
    throw ParameterError(path + ": no edges and no explicit node count");
  }
  try {
    return AdjacencyMatrix::from_edges(node_count, edges);
  } catch (const ParameterError& e) {
    throw ParameterError(path + ": " + e.what());
  }
}

inline AdjacencyMatrix read_adjacency_dense_csv(const std::string& path) {
  try {
    return AdjacencyMatrix(read_matrix_csv(path));
  } catch (const ParameterError& e) {
    throw ParameterError(path + ": " + e.what());
  }
}

// ---- JSON serialization of fits, specs, and test results ----

inline nlohmann::json to_json(const PolynomialCovarianceSpec& spec) {
  return {{"order", spec.order}, {"coefficients", spec.coefficients}};
}

inline PolynomialCovarianceSpec covariance_spec_from_json(const nlohmann::json& j) {
  PolynomialCovarianceSpec spec;
  spec.order = j.at("order").get<int>();
  spec.coefficients = j.at("coefficients").get<std::vector<double>>();
  spec.validate();
  return spec;
}

inline nlohmann::json to_json(const LmmFit& fit) {
  return {{"beta", fit.beta},
          {"variance_components", fit.variance_components},
          {"loglik", fit.loglik},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"d", fit.order()}};
}

inline nlohmann::json to_json(const NamFit& fit) {
  nlohmann::json lo;
  if (std::isfinite(fit.rho_range.lo)) lo = fit.rho_range.lo;
  return {{"rho", fit.rho},
          {"beta_nam", fit.beta_nam},
          {"sigma2", fit.sigma2},
          {"loglik", fit.loglik},
          {"rho_range", nlohmann::json::array({lo, fit.rho_range.hi})},
          {"converged", fit.converged}};
}

inline nlohmann::json to_json(const TestResult& r) {
  return {{"method", r.method == TestMethod::kOlsT ? "ols_t" : "dcorr_perm"},
          {"statistic", r.statistic},
          {"p_value", r.p_value}};
}

// ---- harness configuration ----

// JSON mirror of the scenario grid. base_seed is mandatory so a run can never
// happen with an implicit seed; everything else has the defaults of the
// published experiment (n=500, ties=500, 500 replicates, alpha 0.05, d=2,
// 199 permutations, fresh network per replicate).
inline TableConfig table_config_from_json(const nlohmann::json& j) {
  TableConfig cfg;
  if (!j.contains("base_seed")) {
    throw ParameterError("table config must set base_seed explicitly");
  }
  cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("processes")) {
    cfg.processes.clear();
    for (const auto& name : j.at("processes")) {
      cfg.processes.push_back(process_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("strengths")) {
    cfg.strengths.clear();
    for (const auto& name : j.at("strengths")) {
      cfg.strengths.push_back(strength_from_name(name.get<std::string>()));
    }
  }
  cfg.n = j.value("n", cfg.n);
  cfg.ties = j.value("ties", cfg.ties);
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.alpha_level = j.value("alpha_level", cfg.alpha_level);
  cfg.d = j.value("d", cfg.d);
  cfg.permutations = j.value("permutations", cfg.permutations);
  cfg.fresh_network_per_replicate =
      j.value("fresh_network_per_replicate", cfg.fresh_network_per_replicate);
  cfg.strict_equilibrium_feasibility =
      j.value("strict_equilibrium_feasibility", cfg.strict_equilibrium_feasibility);
  cfg.threads = j.value("threads", cfg.threads);
  if (cfg.processes.empty() || cfg.strengths.empty()) {
    throw ParameterError("table config needs at least one process and one strength");
  }
  return cfg;
}

inline TableConfig read_table_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError(path + ": cannot open for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
  try {
    return table_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
}

}  // namespace netdep::io
