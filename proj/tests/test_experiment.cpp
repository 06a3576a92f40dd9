#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "subapsnap/experiment.hpp"

using namespace subapsnap;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_tridiag() {
  return parse_config(R"(
[experiment]
name = small
methods = full, apsnap, subapsnap-lupp, subapsnap-leverage
bounds = true
lipschitz = 1
intervals = true
repetitions = 2
[problem]
kind = tridiag
n = 300
[snapshot]
r = 5
[test]
count = 25
)");
}

std::string csv_without_times(const std::vector<ResultRow>& rows) {
  std::vector<ResultRow> copy = rows;
  for (auto& r : copy) r.wall_time_s = 0.0;
  std::ostringstream out;
  write_results(out, copy);
  return out.str();
}

}  // namespace

TEST(Subgrid, Indices) {
  EXPECT_EQ(subgrid_indices(30, 4), (std::vector<Index>{0, 10, 19, 29}));
  EXPECT_EQ(subgrid_indices(5, 5), (std::vector<Index>{0, 1, 2, 3, 4}));
  EXPECT_EQ(subgrid_indices(7, 1), (std::vector<Index>{3}));
  EXPECT_THROW(subgrid_indices(3, 4), ConfigError);
  EXPECT_THROW(subgrid_indices(0, 1), ConfigError);
}

TEST(Sweep, UsesTestDomain) {
  auto cfg = small_tridiag();
  auto pts = sweep_points(cfg);
  ASSERT_EQ(pts.size(), 25u);
  EXPECT_EQ(pts.front()(0), cdouble(-10));
  EXPECT_EQ(pts.back()(0), cdouble(-9));
  cfg.test.domain = Box(-9.8, -9.2);
  pts = sweep_points(cfg);
  EXPECT_EQ(pts.front()(0), cdouble(-9.8));
}

TEST(Experiment, RowsAndSummaries) {
  const auto res = run_experiment(small_tridiag());
  EXPECT_EQ(res.n, 300);
  EXPECT_EQ(res.rank, 5);
  ASSERT_EQ(res.rows.size(), 4u * 25u);
  ASSERT_EQ(res.methods.size(), 4u);
  for (const auto& r : res.rows) {
    EXPECT_GE(r.wall_time_s, 0.0);
    if (r.method == "full") EXPECT_LE(r.relative_residual, 1e-10);
    if (r.method == "subapsnap-leverage") {
      ASSERT_TRUE(r.est_lower && r.est_upper);
      EXPECT_LE(*r.est_lower, *r.sampled_residual);
      EXPECT_GE(*r.est_upper, *r.sampled_residual);
    }
    if (r.method == "subapsnap-lupp") {
      EXPECT_FALSE(r.est_lower.has_value());
      ASSERT_TRUE(r.actual_ratio && r.cor_closest);
      EXPECT_FALSE(r.flags.empty());
    }
  }
  // apsnap is the best the subspace allows
  for (std::size_t i = 0; i < 25; ++i) {
    const double ap = res.rows[25 + i].relative_residual;
    EXPECT_LE(ap, res.rows[50 + i].relative_residual * (1 + 1e-9) + 1e-14);
  }
  ASSERT_TRUE(res.lipschitz.has_value());
  EXPECT_EQ(*res.lipschitz, 1.0);
}

TEST(Experiment, DeterministicApartFromTimes) {
  const auto cfg = small_tridiag();
  EXPECT_EQ(csv_without_times(run_experiment(cfg).rows), csv_without_times(run_experiment(cfg).rows));
}

TEST(Experiment, PhaseAccounting) {
  const auto res = run_experiment(small_tridiag());
  for (const char* m : {"subapsnap-lupp", "subapsnap-leverage"}) {
    double sum = 0.0;
    for (const auto& r : res.rows) {
      if (r.method == m) sum += r.wall_time_s;
    }
    ASSERT_TRUE(res.phases.count(std::string("online-") + m));
    ASSERT_TRUE(res.phases.count(std::string("offline-") + m));
    EXPECT_GE(res.phases.at(std::string("online-") + m), sum * (1 - 1e-12));
  }
  EXPECT_TRUE(res.phases.count("snapshot"));
  EXPECT_TRUE(res.phases.count("full"));
}

TEST(Experiment, WritesFiles) {
  const fs::path dir = fs::temp_directory_path() / "subapsnap_experiment_out";
  fs::remove_all(dir);
  const auto res = run_experiment(small_tridiag());
  const auto files = write_experiment(res, dir);
  for (const char* f : {"results.csv", "singular_values.csv", "timing.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_GE(files.size(), 4u);
  std::ifstream in(dir / "results.csv", std::ios::binary);
  const auto back = read_results(in);
  EXPECT_EQ(back.size(), res.rows.size());
}

TEST(Experiment, OutputErrorForDelay) {
  const auto cfg = parse_config(R"(
[experiment]
methods = apsnap, subapsnap-leverage
repetitions = 1
[problem]
kind = delay
n = 400
[snapshot]
r = 8
layout = log
mode = pod
[test]
count = 10
layout = log
)");
  const auto res = run_experiment(cfg);
  for (const auto& r : res.rows) ASSERT_TRUE(r.output_error.has_value()) << r.method;
}

TEST(Experiment, PhaseNamedInErrors) {
  auto cfg = parse_config(R"(
[experiment]
methods = apsnap
repetitions = 1
[problem]
kind = delay
n = 300
[snapshot]
r = 40
layout = log
[test]
count = 3
layout = log
)");
  try {
    run_experiment(cfg);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_NE(std::string(e.what()).find("phase 'snapshot'"), std::string::npos);
  }
}

TEST(KrrGrid, SmallGridFindsFullArgmin) {
  const auto cfg = parse_config(R"(
[experiment]
repetitions = 1
[problem]
kind = krr
n_train = 400
n_test = 100
domain = [1e-5, 1e2] x [0.1, 10]
[snapshot]
r = 16
layout = log, equispaced
[selector]
strategy = leverage
[krr]
lambda_count = 10
sigma_count = 10
)");
  const auto res = run_experiment(cfg);
  ASSERT_TRUE(res.krr.has_value());
  EXPECT_EQ(res.krr_cells.size(), 100u);
  EXPECT_TRUE(res.krr->argmin_match())
      << res.krr->best_lambda << " " << res.krr->best_sigma << " vs " << *res.krr->full_lambda << " "
      << *res.krr->full_sigma;
  for (const auto& c : res.krr_cells) {
    ASSERT_TRUE(c.rmse_full.has_value());
    EXPECT_GT(c.rmse, 0.0);
  }
}
