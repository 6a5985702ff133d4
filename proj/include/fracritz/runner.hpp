#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracritz/problem_file.hpp"

namespace fracritz {

struct RunOptions {
  bool timestamp = true;
  bool include_endpoints = false;
  Execution execution = Execution::Parallel;
};

/// Everything `fracritz run` reports for one problem.
struct RunOutcome {
  int exit_code = 0;  // 0 converged, 2 stopped without convergence
  std::string message;
  RunSpec spec;
  std::optional<RitzSolution> solution;
  std::optional<double> l2_error_state;
  std::optional<double> l2_error_control;
  nlohmann::ordered_json result;
  std::string csv;
};

/// `samples` midpoints of a uniform partition of [a, b], or `samples` uniform
/// points including both endpoints.
std::vector<double> sample_grid(double a, double b, int samples, bool include_endpoints);

/// Solves the configured problem (fixed N, or adaptive when solver.N is
/// absent) and builds the result JSON and the sample CSV. Input errors
/// propagate as exceptions; a solver that stops early gives exit_code 2 and
/// the best iterate.
RunOutcome run_config(const ProblemConfig& config, const std::string& problem_path,
                      const RunOptions& options = {});

/// Writes <stem>.solution.csv and <stem>.result.json into `out_dir`.
void write_outputs(const RunOutcome& outcome, const std::filesystem::path& out_dir,
                   const std::string& stem);

struct TableRow {
  double alpha = 0.0;
  int degree = 0;
  double error_state = 0.0;
  std::optional<double> error_control;
  double objective = 0.0;
  bool converged = false;
};

/// One independent solve per (alpha, N) cell; cells run on the OpenMP team
/// and rows come back in sweep order (alphas outer, Ns inner).
std::vector<TableRow> run_table(const ProblemConfig& base, std::span<const double> alphas,
                                std::span<const int> degrees);

/// CSV with header alpha,N,error_state[,error_control],objective,converged.
std::string table_csv(std::span<const TableRow> rows);

}  // namespace fracritz
