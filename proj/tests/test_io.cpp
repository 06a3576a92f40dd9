#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "subapsnap/config.hpp"
#include "subapsnap/csv.hpp"
#include "subapsnap/plot.hpp"
#include "subapsnap/problems.hpp"
#include "subapsnap/serialize.hpp"
#include "support.hpp"

using namespace subapsnap;
using namespace subapsnap::testing;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"(
[problem]
kind = tridiag
n = 200
)";

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("subapsnap_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// --- config -----------------------------------------------------------------

TEST(ParseComplex, Forms) {
  EXPECT_EQ(parse_complex("2"), cdouble(2));
  EXPECT_EQ(parse_complex("-1.5"), cdouble(-1.5));
  EXPECT_EQ(parse_complex("3i"), cdouble(0, 3));
  EXPECT_EQ(parse_complex("1e4i"), cdouble(0, 1e4));
  EXPECT_EQ(parse_complex("i"), cdouble(0, 1));
  EXPECT_EQ(parse_complex("-i"), cdouble(0, -1));
  EXPECT_EQ(parse_complex("2+3i"), cdouble(2, 3));
  EXPECT_EQ(parse_complex("1e-3-2e2i"), cdouble(1e-3, -2e2));
  EXPECT_THROW(parse_complex("abc"), ConfigError);
  EXPECT_THROW(parse_complex(""), ConfigError);
}

TEST(ParseDomain, Forms) {
  const Box real = parse_domain("[-10, -9]");
  EXPECT_EQ(real.lo[0], cdouble(-10));
  EXPECT_EQ(real.hi[0], cdouble(-9));
  const Box band = parse_domain("i[1, 1e4]");
  EXPECT_EQ(band.lo[0], cdouble(0, 1));
  EXPECT_EQ(band.hi[0], cdouble(0, 1e4));
  const Box product = parse_domain("[1e-5, 1e2] x [0.1, 10]");
  ASSERT_EQ(product.dim(), 2);
  EXPECT_EQ(product.hi[1], cdouble(10));
  EXPECT_THROW(parse_domain("[1, 1]"), ConfigError);
  EXPECT_THROW(parse_domain("[1, 2"), ConfigError);
  EXPECT_THROW(parse_domain("[1, 2] [3, 4]"), ConfigError);
}

TEST(Config, Defaults) {
  const auto cfg = parse_config(minimal);
  ASSERT_TRUE(std::holds_alternative<TridiagSpec>(cfg.problem));
  EXPECT_EQ(std::get<TridiagSpec>(cfg.problem).n, 200);
  EXPECT_EQ(cfg.snapshot.r, 7);
  EXPECT_EQ(cfg.selector.strategy, Strategy::leverage);
  EXPECT_EQ(cfg.selector.oversample, 4.0);
  EXPECT_TRUE(cfg.selector.augment_with_rhs);
  EXPECT_EQ(cfg.selector.anchor, AnchorChoice::median);
  EXPECT_EQ(cfg.repetitions, 3);
  ASSERT_EQ(cfg.methods.size(), 3u);
  EXPECT_EQ(cfg.methods[2].name(), "subapsnap-leverage");
}

TEST(Config, FullExample) {
  const auto cfg = parse_config(R"(
[experiment]
name = sweep
seed = 9
methods = full, apsnap, subapsnap-lupp, subapsnap-arp
bounds = true
lipschitz = estimate
workers = 2

[problem]
kind = delay
n = 500
tau = 0.2
kappa = 2.5
b = ones
c = first
domain = i[1, 100]

[snapshot]
r = 6
layout = log
mode = pod
pod_tol = 1e-9

[selector]
strategy = cpqr
anchor = nearest

[test]
count = 40
layout = log
domain = i[2, 50]

[output]
dir = out/sweep
)");
  EXPECT_EQ(cfg.name, "sweep");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.selector.seed, 9u);
  EXPECT_TRUE(cfg.bounds);
  ASSERT_TRUE(cfg.lipschitz.has_value());
  EXPECT_TRUE(std::isnan(*cfg.lipschitz));
  const auto& d = std::get<DelaySpec>(cfg.problem);
  EXPECT_EQ(d.n, 500);
  EXPECT_EQ(d.b, VectorKind::ones);
  EXPECT_EQ(d.c, VectorKind::first);
  EXPECT_EQ(d.hi, 100.0);
  EXPECT_EQ(cfg.snapshot.mode, BasisMode::pod);
  EXPECT_EQ(cfg.snapshot.layout.front(), PointLayout::log_spaced);
  EXPECT_EQ(cfg.selector.anchor, AnchorChoice::nearest);
  ASSERT_EQ(cfg.methods.size(), 4u);
  EXPECT_EQ(cfg.methods[3].name(), "subapsnap-arp");
  EXPECT_EQ(cfg.output_dir, fs::path("out/sweep"));
}

TEST(Config, SyntaxErrorCarriesLine) {
  try {
    parse_config("[problem]\nkind = tridiag\n[broken\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, LoadPrefixesPath) {
  const fs::path dir = scratch_dir("cfg");
  std::ofstream(dir / "bad.ini") << "[problem]\nkind = tridiag\nnot a key value line\n";
  try {
    load_config(dir / "bad.ini");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("bad.ini"), std::string::npos);
  }
  EXPECT_THROW(load_config(dir / "missing.ini"), ConfigError);
}

TEST(Config, Rejections) {
  const std::string base = minimal;
  EXPECT_THROW(parse_config(base + "[snapshot]\nr = 0\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[snapshot]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[nonsense]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[experiment]\nmethods = magic\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[experiment]\nworkers = 0\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[experiment]\nlipschitz = -1\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[experiment]\nbounds = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[selector]\noversample = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[test]\ncount = 0\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[test]\ndomain = [0, 1]\n"), ConfigError);
  EXPECT_THROW(parse_config(base + "[krr]\nlambda_count = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[experiment]\nname = x\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nkind = krr\n[experiment]\nbounds = true\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nkind = delay\nkappa = 1.5\n"), ConfigError);
}

TEST(Config, KrrGrid) {
  const auto cfg = parse_config(R"(
[problem]
kind = krr
n_train = 300
domain = [1e-5, 1e2] x [0.1, 10]
[krr]
lambda_count = 5
sigma_count = 4
full_oracle = false
)");
  ASSERT_TRUE(cfg.krr.has_value());
  EXPECT_EQ(cfg.krr->lambda_count, 5);
  EXPECT_EQ(cfg.krr->sigma_count, 4);
  EXPECT_EQ(cfg.krr->lambda_layout, PointLayout::log_spaced);
  EXPECT_FALSE(cfg.krr->full_oracle);
}

TEST(Config, MatrixMarketPathsRelativeToConfig) {
  const auto cfg = parse_config(R"(
[problem]
kind = matrix-market
term.0.path = k.mtx
term.0.coefficient = 1
term.1.path = /abs/e.mtx
term.1.coefficient = -p
rhs = b.mtx
complex = true
domain = i[1, 10]
)",
                                "/data/models/model.ini");
  const auto& mm = std::get<MatrixMarketSpec>(cfg.problem);
  ASSERT_EQ(mm.terms.size(), 2u);
  EXPECT_EQ(fs::path(mm.terms[0].path), fs::path("/data/models/k.mtx"));
  EXPECT_EQ(fs::path(mm.terms[1].path), fs::path("/abs/e.mtx"));
  EXPECT_EQ(fs::path(mm.rhs_path), fs::path("/data/models/b.mtx"));
  EXPECT_TRUE(mm.complex);
}

TEST(Config, PresetsParse) {
  const fs::path presets = fs::path(SUBAPSNAP_SOURCE_DIR) / "presets";
  int count = 0;
  for (const auto& entry : fs::directory_iterator(presets)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 5);
}

// --- csv --------------------------------------------------------------------

TEST(Csv, GoldenHeader) {
  std::ostringstream out;
  write_results(out, {});
  EXPECT_EQ(out.str(),
            "method,p,relative_residual,output_error,sampled_residual,est_lower,est_upper,wall_time_s,"
            "actual_ratio,bound_A,bound_Ab,thm,cor_closest,cor_global,flags\r\n");
}

TEST(Csv, RoundTrip) {
  ResultRow a;
  a.method = "subapsnap-leverage";
  a.p = "1e-05;0.1";
  a.relative_residual = 1.2345678901234567e-9;
  a.sampled_residual = 0.1;
  a.est_lower = 0.05;
  a.est_upper = 0.2;
  a.wall_time_s = 3.5e-6;
  a.actual_ratio = std::numeric_limits<double>::infinity();
  a.bound_a = 12.5;
  a.flags = "A|Ab";
  ResultRow b;
  b.method = "full";
  b.p = "-9.5";
  b.output_error = 0.0;
  std::stringstream ss;
  write_results(ss, {a, b});
  const auto back = read_results(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].method, a.method);
  EXPECT_EQ(back[0].p, a.p);
  EXPECT_EQ(back[0].relative_residual, a.relative_residual);
  EXPECT_EQ(back[0].sampled_residual, a.sampled_residual);
  EXPECT_EQ(back[0].est_upper, a.est_upper);
  EXPECT_TRUE(std::isinf(*back[0].actual_ratio));
  EXPECT_EQ(back[0].bound_a, a.bound_a);
  EXPECT_FALSE(back[0].bound_ab.has_value());
  EXPECT_EQ(back[0].flags, "A|Ab");
  EXPECT_EQ(back[1].output_error, 0.0);
  EXPECT_FALSE(back[1].sampled_residual.has_value());
}

TEST(Csv, Quoting) {
  std::stringstream ss;
  write_csv_row(ss, {"plain", "with,comma", "with \"quote\"", "two\nlines"});
  EXPECT_EQ(ss.str(), "plain,\"with,comma\",\"with \"\"quote\"\"\",\"two\nlines\"\r\n");
  const auto table = read_csv(ss);
  ASSERT_EQ(table.size(), 1u);
  EXPECT_EQ(table[0], (std::vector<std::string>{"plain", "with,comma", "with \"quote\"", "two\nlines"}));
}

TEST(Csv, Malformed) {
  std::istringstream stray("a,b\"c\r\n");
  EXPECT_THROW(read_csv(stray), ParseError);
  std::istringstream open("a,\"bc\r\n");
  EXPECT_THROW(read_csv(open), ParseError);
  std::istringstream after("\"a\"b,c\r\n");
  EXPECT_THROW(read_csv(after), ParseError);
  std::istringstream header("x,y\r\n");
  EXPECT_THROW(read_results(header), ParseError);
  std::ostringstream good;
  write_results(good, {});
  std::istringstream short_row(good.str() + "full,1,2\r\n");
  try {
    read_results(short_row);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(2.0), "2");
}

// --- artifacts --------------------------------------------------------------

TEST(Serialize, RoundTripComplex) {
  DelaySpec spec;
  spec.n = 300;
  const auto sys = build_problem<cdouble>(spec);
  auto basis = std::make_shared<const SnapshotBasis<cdouble>>(
      build_snapshot(*sys, default_snapshot_points(sys->domain(), 4, PointLayout::log_spaced)));
  const auto back = decode_basis<cdouble>(encode_basis(*basis));
  EXPECT_EQ(back.q, basis->q);
  EXPECT_EQ(back.raw, basis->raw);
  EXPECT_EQ(back.singular_values, basis->singular_values);
  EXPECT_EQ(back.points, basis->points);

  SelectorConfig cfg;
  const auto sels = build_selectors(*sys, *basis, cfg);
  const auto sels_back = decode_selectors(encode_selectors(sels));
  ASSERT_EQ(sels_back.size(), sels.size());
  EXPECT_EQ(sels_back[0].indices, sels[0].indices);
  EXPECT_EQ(sels_back[0].weights, sels[0].weights);
  EXPECT_EQ(sels_back[0].strategy, sels[0].strategy);
  EXPECT_EQ(sels_back[0].anchors, sels[0].anchors);

  const auto plans = precompute_plans(sys, basis, sels);
  const auto plans_back = decode_plans<cdouble>(encode_plans(plans), sys, basis);
  ASSERT_EQ(plans_back.plans.size(), 1u);
  EXPECT_EQ(plans_back.plans[0].blocks.size(), 3u);
  const Parameter p = make_parameter(cdouble(0, 7));
  EXPECT_EQ(solve_online(plans_back.plans[0], p).coefficients, solve_online(plans.plans[0], p).coefficients);
}

TEST(Serialize, Rejections) {
  const auto sys = build_problem<double>(TridiagSpec{});
  auto basis = std::make_shared<const SnapshotBasis<double>>(build_snapshot(*sys, line_points(-10, -9, 3)));
  const Bytes bytes = encode_basis(*basis);
  EXPECT_THROW(decode_basis<cdouble>(bytes), ConfigError);
  EXPECT_THROW(decode_selectors(bytes), ConfigError);
  EXPECT_THROW(decode_basis<double>(Bytes{0xff, 0x00, 0x12}), ConfigError);
  Bytes truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(bytes.size() / 2));
  EXPECT_THROW(decode_basis<double>(truncated), ConfigError);

  SelectorConfig cfg;
  cfg.strategy = Strategy::lupp;
  const auto plans = precompute_plans(sys, basis, build_selectors(*sys, *basis, cfg));
  TridiagSpec other;
  other.n = 500;
  const auto small = build_problem<double>(other);
  EXPECT_THROW(decode_plans<double>(encode_plans(plans), small, basis), DimensionError);
}

TEST(Serialize, FileRoundTrip) {
  const fs::path dir = scratch_dir("bytes");
  const Bytes bytes{1, 2, 3, 0, 255};
  write_bytes(dir / "x.bin", bytes);
  EXPECT_EQ(read_bytes(dir / "x.bin"), bytes);
  EXPECT_THROW(read_bytes(dir / "none.bin"), ConfigError);
}

// --- plots ------------------------------------------------------------------

TEST(Plot, Deterministic) {
  LinePlot plot;
  plot.title = "residual";
  plot.series.push_back({"a", {1, 2, 3, 4}, {1e-3, 1e-8, 0.0, 1e-2}, false});
  plot.series.push_back({"b", {1, 2, 3, 4}, {1e-2, 1e-2, 1e-2, 1e-2}, true});
  const std::string svg = render_line_plot(plot);
  EXPECT_EQ(svg, render_line_plot(plot));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(Plot, SinglePointMarker) {
  LinePlot plot;
  plot.series.push_back({"one", {0.5}, {1e-4}, false});
  const std::string svg = render_line_plot(plot);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
}

TEST(Plot, EmitFromResults) {
  const fs::path dir = scratch_dir("plots");
  ResultRow row;
  row.method = "subapsnap-lupp";
  row.p = "-9.5";
  row.relative_residual = 1e-9;
  {
    std::ofstream out(dir / "results.csv", std::ios::binary);
    write_results(out, {row});
  }
  const auto files = emit_plots(dir / "results.csv", dir / "svg");
  ASSERT_FALSE(files.empty());
  EXPECT_TRUE(fs::exists(dir / "svg" / "residual.svg"));
  const std::string first = slurp(dir / "svg" / "residual.svg");
  emit_plots(dir / "results.csv", dir / "svg");
  EXPECT_EQ(first, slurp(dir / "svg" / "residual.svg"));
}

TEST(Plot, EmptyResultsRejected) {
  const fs::path dir = scratch_dir("plots_empty");
  {
    std::ofstream out(dir / "results.csv", std::ios::binary);
    write_results(out, {});
  }
  EXPECT_THROW(emit_plots(dir / "results.csv", dir), ConfigError);
}

TEST(Plot, BarChart) {
  const std::string svg = render_bar_chart("timing", "seconds", {{"snapshot", 0.5}, {"online", 0.01}});
  EXPECT_NE(svg.find("snapshot"), std::string::npos);
  EXPECT_NE(svg.find("<rect"), std::string::npos);
}
