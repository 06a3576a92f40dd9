#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subapsnap/config.hpp"
#include "subapsnap/csv.hpp"

namespace subapsnap {

struct MethodSummary {
  std::string method;
  double max_residual = 0.0;
  double median_residual = 0.0;
  std::optional<double> max_output_error;
  double online_total_s = 0.0;  // median over repetitions
  double per_point_s = 0.0;
  Index points = 0;
};

struct KrrSummary {
  double best_lambda = 0.0;
  double best_sigma = 0.0;
  double best_rmse = 0.0;
  std::optional<double> full_lambda;
  std::optional<double> full_sigma;
  std::optional<double> full_rmse;
  double geomean_residual = 0.0;
  double max_residual = 0.0;
  double online_per_pair_s = 0.0;
  std::optional<double> full_per_pair_s;
  bool argmin_match() const {
    return full_lambda && *full_lambda == best_lambda && *full_sigma == best_sigma;
  }
};

struct KrrCell {
  double lambda = 0.0;
  double sigma = 0.0;
  double rmse = 0.0;
  std::optional<double> rmse_full;
  double relative_residual = 0.0;
};

struct ExperimentResult {
  std::string name;
  std::string problem;
  Index n = 0;
  Index rank = 0;
  std::vector<Parameter> snapshot_points;
  Eigen::VectorXd singular_values;
  std::vector<ResultRow> rows;
  std::vector<MethodSummary> methods;
  /// Phase totals in seconds (median of repetitions): "full", "snapshot",
  /// "apsnap", "offline-<method>", "online-<method>".
  std::map<std::string, double> phases;
  std::optional<double> lipschitz;
  std::optional<KrrSummary> krr;
  std::vector<KrrCell> krr_cells;
};

/// Offline then online phases for every configured method. Errors are
/// rethrown with the phase named; the exception type is preserved.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Grid search over (lambda, sigma) for a krr problem.
ExperimentResult run_krr_grid(const ExperimentConfig& config);

/// results.csv, singular_values.csv, timing.csv, summary.json (and
/// krr_grid.csv for grid searches). Returns the files written.
std::vector<std::filesystem::path> write_experiment(const ExperimentResult& result,
                                                    const std::filesystem::path& dir);

/// Test points of the sweep, in output order.
std::vector<Parameter> sweep_points(const ExperimentConfig& config);

/// Indices spreading m picks over 0..count-1, endpoints included.
std::vector<Index> subgrid_indices(Index count, Index m);

}  // namespace subapsnap
