#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "subapsnap/problems.hpp"
#include "subapsnap/snapshot.hpp"
#include "subapsnap/subsample.hpp"

namespace subapsnap {

/// Parses "2", "-1.5", "3i", "1e4i", "i", "-i", "2+3i", "1e-3-2e2i".
cdouble parse_complex(const std::string& text);

/// Parses "[-10, -9]", "i[1, 1e4]", "[1+1i, 2+2i]" and products
/// "[1e-5, 1e2] x [0.1, 10]".
Box parse_domain(const std::string& text);

struct SnapshotSpec {
  Index r = 7;
  std::vector<PointLayout> layout{PointLayout::equispaced};  // one per axis, or shared
  BasisMode mode = BasisMode::qr;
  double pod_tol = 1e-10;
};

struct SweepSpec {
  Index count = 50;
  std::vector<PointLayout> layout{PointLayout::equispaced};
  std::optional<Box> domain;  // problem domain when absent
};

struct KrrGridSpec {
  Index lambda_count = 30;
  Index sigma_count = 30;
  PointLayout lambda_layout = PointLayout::log_spaced;
  PointLayout sigma_layout = PointLayout::equispaced;
  bool full_oracle = true;
};

enum class MethodKind { full, apsnap, subapsnap };

struct Method {
  MethodKind kind = MethodKind::subapsnap;
  Strategy strategy = Strategy::leverage;  // subapsnap only

  std::string name() const;
};

/// "full", "apsnap", "subapsnap-lupp", "subapsnap" (strategy from [selector]).
Method parse_method(const std::string& text, Strategy fallback);

struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path source;  // config file, for relative paths
  ProblemSpec problem;
  SnapshotSpec snapshot;
  SelectorConfig selector;
  SweepSpec test;
  std::vector<Method> methods;
  bool bounds = false;
  /// Lipschitz constant for the corollary bounds; NaN asks for an estimate.
  std::optional<double> lipschitz;
  bool intervals = false;
  int workers = 1;
  int repetitions = 3;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";
  std::optional<KrrGridSpec> krr;
};

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError: no methods, empty sweep, sweep outside the problem
/// domain, bounds on a multi-parameter problem.
void validate_config(const ExperimentConfig& config);

}  // namespace subapsnap
