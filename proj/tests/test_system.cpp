#include <chrono>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "subapsnap/matrix_market.hpp"
#include "subapsnap/problems.hpp"
#include "support.hpp"

using namespace subapsnap;
using namespace subapsnap::testing;
namespace fs = std::filesystem;

namespace {

template <class Scalar>
Matrix<Scalar> dense_row(const ParametricSystem<Scalar>& sys, const Parameter& p, Index i) {
  const std::vector<Index> idx{i};
  return Matrix<Scalar>(assemble_rows(sys, p, idx));
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("subapsnap_test_" + name);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST(Domain, AlongAndContains) {
  const Box box(cdouble(0, 1), cdouble(0, 100));
  EXPECT_EQ(box.along(0, 0.5), cdouble(0, 50.5));
  EXPECT_TRUE(box.contains(make_parameter(cdouble(0, 10))));
  EXPECT_FALSE(box.contains(make_parameter(cdouble(0, 200))));
  EXPECT_FALSE(box.is_real());
  EXPECT_TRUE(Box(-10.0, -9.0).is_real());
}

TEST(Domain, CoveringRadiusOneDimensional) {
  const Box box(0.0, 1.0);
  EXPECT_NEAR(covering_radius(box, line_points(0.0, 1.0, 3)), 0.25, 1e-15);
  EXPECT_NEAR(covering_radius(box, {make_parameter(0.0)}), 1.0, 1e-15);
}

TEST(Domain, NearestPointFirstOnTies) {
  const auto pts = line_points(0.0, 1.0, 3);
  EXPECT_EQ(nearest_point(pts, make_parameter(0.25)), 0);
  EXPECT_EQ(nearest_point(pts, make_parameter(0.9)), 2);
}

TEST(Parameter, Format) {
  EXPECT_EQ(format_parameter(make_parameter(-9.5)), "-9.5");
  EXPECT_EQ(format_parameter(make_parameter(cdouble(0, 1000))), "1000i");
  EXPECT_EQ(format_parameter(make_parameter({1e-5, 0.1})), "1e-05;0.1");
}

TEST(Tridiag, MatrixAndRhs) {
  TridiagSpec spec;
  spec.n = 5;
  spec.lo = -1;
  spec.hi = 1;
  const auto sys = build_problem<double>(spec);
  const auto a = assemble_dense(*sys, make_parameter(0.0));
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  for (Index i = 0; i < 5; ++i) {
    expected(i, i) = 2;
    if (i > 0) expected(i, i - 1) = -1;
    if (i < 4) expected(i, i + 1) = -1;
  }
  EXPECT_EQ(a, expected);
  EXPECT_EQ(assemble_dense(*sys, make_parameter(0.5)), expected - 0.5 * Eigen::MatrixXd::Identity(5, 5));

  Rng rng(spec.seed);
  const Parameter p = make_parameter(0.7);
  for (Index i = 0; i < 5; ++i) {
    const double b0 = rng.normal();
    EXPECT_NEAR(sys->rhs(p, i), std::exp(b0 * std::sin(0.07) * 0.7), 1e-15);
  }
}

TEST(Tridiag, StencilRowAndRhsAtZero) {
  TridiagSpec spec;
  spec.n = 5;
  spec.lo = -1;
  spec.hi = 1;
  const auto sys = build_problem<double>(spec);
  Eigen::MatrixXd expected(1, 5);
  expected << 0, -1, 2, -1, 0;
  EXPECT_EQ(dense_row(*sys, make_parameter(0.0), 2), expected);
  const std::vector<Index> idx{0, 3};
  EXPECT_EQ(assemble_rhs(*sys, make_parameter(0.0), idx), Eigen::VectorXd::Ones(2));
}

TEST(AssembleRows, EmptyIndices) {
  const auto sys = build_problem<double>(TridiagSpec{});
  const auto rows = assemble_rows(*sys, make_parameter(-9.5), std::span<const Index>{});
  EXPECT_EQ(rows.rows(), 0);
  EXPECT_EQ(rows.cols(), 1000);
}

TEST(AssembleRows, OutOfRange) {
  const auto sys = build_problem<double>(TridiagSpec{});
  const std::vector<Index> idx{1000};
  EXPECT_THROW(assemble_rows(*sys, make_parameter(-9.5), idx), DimensionError);
}

TEST(Heat2d, LaplacianAndDiskSupport) {
  Heat2dSpec spec;
  spec.grid = 4;
  const auto sys = build_problem<double>(spec);
  ASSERT_EQ(sys->size(), 16);
  const Eigen::MatrixXd a0 = assemble_dense(*sys, make_parameter(0.0));
  const double h = 2.0 / 5.0;
  for (Index k = 0; k < 16; ++k) {
    EXPECT_NEAR(a0(k, k), 4 / (h * h), 1e-12);
    for (Index l = 0; l < 16; ++l) {
      if (l == k) continue;
      const Index ik = k % 4, jk = k / 4, il = l % 4, jl = l / 4;
      const bool adjacent = std::abs(ik - il) + std::abs(jk - jl) == 1;
      EXPECT_NEAR(a0(k, l), adjacent ? -1 / (h * h) : 0.0, 1e-12);
    }
  }
  const Eigen::MatrixXd disk = assemble_dense(*sys, make_parameter(1.0)) - a0;
  EXPECT_GT(disk.norm(), 0.0);
  for (Index k = 0; k < 16; ++k) {
    const double x = -1 + (k % 4 + 1) * h, y = -1 + (k / 4 + 1) * h;
    // a stencil entry can only touch the disk through an edge midpoint within h/2 of the point
    if (std::hypot(x, y) > 1.0 + h / 2) EXPECT_EQ(disk.row(k).norm(), 0.0) << "row " << k;
  }
}

TEST(Delay, Matrices) {
  DelaySpec spec;
  spec.n = 10;
  const auto sys = build_problem<cdouble>(spec);
  const auto& terms = sys->affine_terms();
  ASSERT_EQ(terms.size(), 3u);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(10, 10);
  for (Index i = 0; i + 1 < 10; ++i) t(i, i + 1) = t(i + 1, i) = 1;
  t(0, 0) = t(9, 9) = 1;
  EXPECT_EQ(Eigen::MatrixXd(delay_t_matrix(10)), t);
  const Eigen::MatrixXd a1 = (t - 2.1 * Eigen::MatrixXd::Identity(10, 10)) / 0.1;
  const Parameter p = make_parameter(cdouble(0, 3));
  const Eigen::MatrixXcd expected = p(0) * Eigen::MatrixXcd::Identity(10, 10) - 3.0 * a1.cast<cdouble>() -
                                    std::exp(0.1 * p(0)) * a1.cast<cdouble>();
  EXPECT_LE((assemble_dense(*sys, p) - expected).norm(), 1e-12 * expected.norm());
  ASSERT_TRUE(sys->output().has_value());
}

TEST(Delay, RhsIsFixed) {
  DelaySpec spec;
  spec.n = 50;
  const auto sys = build_problem<cdouble>(spec);
  const auto full = sys->rhs_vector(make_parameter(cdouble(0, 1)));
  const std::vector<Index> idx{3, 17, 42};
  const auto part = assemble_rhs(*sys, make_parameter(cdouble(0, 500)), idx);
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(part(static_cast<Index>(k)), full(idx[k]));
}

TEST(Krr, RowsMatchKernel) {
  KrrSpec spec;
  spec.n_train = 50;
  spec.n_test = 10;
  const auto data = make_krr_data(spec);
  const auto sys = build_krr(spec, data);
  const Parameter p = make_parameter({0.3, 1.7});
  const Eigen::MatrixXd k = kernel_matrix(data.t_train, data.t_train, 1.7);
  for (Index i : {0, 13, 49}) {
    const Eigen::MatrixXd row = dense_row(*sys, p, i);
    for (Index j = 0; j < 50; ++j) {
      const double expected =
          std::exp(-std::pow(data.t_train(i) - data.t_train(j), 2) / (2 * 1.7 * 1.7)) + (i == j ? 0.3 : 0.0);
      EXPECT_NEAR(row(0, j), expected, 1e-14);
      EXPECT_NEAR(k(i, j) + (i == j ? 0.3 : 0.0), expected, 1e-14);
    }
  }
  const std::vector<Index> idx{4, 9};
  const auto rhs = assemble_rhs(*sys, p, idx);
  EXPECT_EQ(rhs(0), data.y_train(4));
  EXPECT_EQ(rhs(1), data.y_train(9));
}

TEST(Krr, DataLayout) {
  KrrSpec spec;
  spec.n_train = 100;
  spec.n_test = 20;
  spec.noise = 0.0;
  const auto data = make_krr_data(spec);
  EXPECT_EQ(data.t_train.size(), 100);
  EXPECT_EQ(data.t_test.size(), 20);
  EXPECT_GE(data.t_train.minCoeff(), 0.0);
  EXPECT_LE(data.t_train.maxCoeff(), 10.0);
  EXPECT_LE((data.y_train - data.t_train.array().sin().matrix()).norm(), 1e-14);
}

TEST(Krr, PositiveDefinite) {
  KrrSpec spec;
  spec.n_train = 200;
  const auto data = make_krr_data(spec);
  const auto sys = build_krr(spec, data);
  const Eigen::MatrixXd a = assemble_dense(*sys, make_parameter({1e-5, 10.0}));
  EXPECT_LE((a - a.transpose()).norm(), 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_TRUE(sys->hermitian_positive_definite());
}

TEST(Krr, RowOracleCostScalesWithRows) {
  KrrSpec spec;
  spec.n_train = 4000;
  const auto data = make_krr_data(spec);
  const auto sys = build_krr(spec, data);
  const Parameter p = make_parameter({1e-2, 1.0});
  std::vector<Index> idx;
  for (Index i = 0; i < 100; ++i) idx.push_back(i * 40);
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const auto full = kernel_matrix(data.t_train, data.t_train, 1.0);
  const double t_full = std::chrono::duration<double>(clock::now() - t0).count();
  t0 = clock::now();
  Row<double> row;
  double checksum = 0.0;
  for (Index i : idx) {
    sys->row(p, i, row);
    checksum += row.vals[static_cast<std::size_t>(i)];
  }
  const double t_rows = std::chrono::duration<double>(clock::now() - t0).count();
  EXPECT_NEAR(checksum, 100 * (1.0 + 1e-2), 1e-9);
  EXPECT_GT(full.norm(), 0.0);
  EXPECT_LT(t_rows, 2.0 * 100.0 / 4000.0 * t_full);
}

TEST(Affine, TermsMatchRowOracle) {
  Rng rng(31);
  std::vector<std::pair<ProblemSpec, bool>> specs{{TridiagSpec{}, false}, {Heat2dSpec{}, false},
                                                  {ConvDiffSpec{}, true}, {DelaySpec{}, true}};
  for (const auto& [spec, complex] : specs) {
    const auto any = build_any_problem(spec);
    std::visit(
        [&](const auto& sys) {
          using Scalar = typename std::decay_t<decltype(*sys)>::scalar_type;
          ASSERT_TRUE(sys->is_affine());
          const Box& box = sys->domain();
          for (int trial = 0; trial < 100; ++trial) {
            Parameter p = make_parameter(box.along(0, rng.uniform()));
            const Index i = static_cast<Index>(rng.uniform() * static_cast<double>(sys->size()));
            Row<Scalar> row;
            sys->row(p, i, row);
            Vector<Scalar> direct = Vector<Scalar>::Zero(sys->size());
            for (std::size_t k = 0; k < row.vals.size(); ++k) {
              direct(row.dense ? static_cast<Index>(k) : row.cols[k]) += row.vals[k];
            }
            Vector<Scalar> summed = Vector<Scalar>::Zero(sys->size());
            for (const auto& term : sys->affine_terms()) {
              summed += term.coefficient(p) * Vector<Scalar>(term.matrix.row(i).transpose());
            }
            ASSERT_LE((direct - summed).norm(), 1e-13 * summed.norm()) << sys->name();
          }
        },
        any);
    EXPECT_EQ(std::holds_alternative<SystemPtr<cdouble>>(any), complex);
  }
}

TEST(FullSolve, IdentityReturnsRhs) {
  const auto sys = identity_system(20, [](const Parameter& p, Index i) { return p(0).real() + i; });
  const auto x = full_solve(*sys, make_parameter(0.5));
  for (Index i = 0; i < 20; ++i) EXPECT_EQ(x(i), 0.5 + i);
}

TEST(FullSolve, TridiagResidual) {
  TridiagSpec spec;
  spec.n = 100;
  const auto sys = build_problem<double>(spec);
  const Parameter p = make_parameter(-10.0);
  EXPECT_LE(relative_residual(*sys, p, full_solve(*sys, p)), 1e-10);
}

TEST(FullSolve, HeatMatchesDense) {
  Heat2dSpec spec;
  spec.grid = 20;
  const auto sys = build_problem<double>(spec);
  const Parameter p = make_parameter(0.0);
  const Eigen::VectorXd x = full_solve(*sys, p);
  const Eigen::VectorXd ref = assemble_dense(*sys, p).partialPivLu().solve(sys->rhs_vector(p));
  EXPECT_LE((x - ref).norm(), 1e-9 * ref.norm());
}

TEST(FullSolve, SingularThrows) {
  TridiagSpec spec;
  spec.n = 3;
  spec.lo = 0;
  spec.hi = 4;
  const auto sys = build_problem<double>(spec);
  // eigenvalues of tridiag(-1,2,-1) with n=3 include 2
  EXPECT_THROW(full_solve(*sys, make_parameter(2.0)), NumericalError);
}

TEST(FullSolve, TridiagonalHelper) {
  Eigen::VectorXd lower(2), diag(3), upper(2), rhs(3);
  lower << 1, 1;
  diag << 0, 4, 4;
  upper << 1, 1;
  rhs << 1, 6, 9;
  const auto x = solve_tridiagonal<double>(lower, diag, upper, rhs);
  Eigen::MatrixXd a(3, 3);
  a << 0, 1, 0, 1, 4, 1, 0, 1, 4;
  EXPECT_LE((a * x - rhs).norm(), 1e-14);
}

TEST(DifferenceNorm, TridiagIsDistance) {
  const auto sys = build_problem<double>(TridiagSpec{});
  EXPECT_NEAR(difference_norm(*sys, make_parameter(-9.2), make_parameter(-9.7)), 0.5, 1e-12);
}

TEST(Coefficient, Parse) {
  const Parameter p = make_parameter({2.0, 3.0});
  EXPECT_EQ(parse_coefficient("1")(p), cdouble(1));
  EXPECT_EQ(parse_coefficient("-p")(p), cdouble(-2));
  EXPECT_EQ(parse_coefficient("2.5*p")(p), cdouble(5));
  EXPECT_EQ(parse_coefficient("p[1]")(p), cdouble(3));
  EXPECT_NEAR(std::abs(parse_coefficient("exp(0.1*p)")(p) - std::exp(0.2)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(parse_coefficient("-3*exp(-2*p[0])")(p) + 3 * std::exp(-4.0)), 0.0, 1e-15);
  EXPECT_THROW(parse_coefficient("sin(p)"), ConfigError);
  EXPECT_THROW(parse_coefficient(""), ConfigError);
}

TEST(Problems, Validation) {
  DelaySpec delay;
  delay.kappa = 2.0;
  EXPECT_THROW(validate_problem(delay), ConfigError);
  delay.kappa = 2.1;
  delay.tau = 0.0;
  EXPECT_THROW(validate_problem(delay), ConfigError);
  TridiagSpec tri;
  tri.n = 1;
  EXPECT_THROW(validate_problem(tri), ConfigError);
  EXPECT_FALSE(problem_is_complex(TridiagSpec{}));
  EXPECT_TRUE(problem_is_complex(ConvDiffSpec{}));
  EXPECT_EQ(problem_kind(KrrSpec{}), "krr");
}

TEST(MatrixMarket, RoundTripReal) {
  const fs::path dir = scratch_dir("mm_real");
  Rng rng(32);
  Eigen::MatrixXd dense = gaussian(6, 6, rng);
  dense = (dense.array().abs() > 0.8).select(dense, 0.0);
  const SparseMatrix<double> a = dense.sparseView();
  write_matrix_market((dir / "a.mtx").string(), a);
  EXPECT_EQ(Eigen::MatrixXd(read_matrix_market<double>((dir / "a.mtx").string())), dense);
  const Eigen::VectorXd v = gaussian_vector(6, rng);
  write_matrix_market_vector((dir / "v.mtx").string(), v);
  EXPECT_EQ(read_matrix_market_vector<double>((dir / "v.mtx").string()), v);
}

TEST(MatrixMarket, RoundTripComplex) {
  const fs::path dir = scratch_dir("mm_complex");
  Rng rng(33);
  const Eigen::MatrixXcd dense = gaussian<cdouble>(4, 4, rng);
  write_matrix_market((dir / "a.mtx").string(), SparseMatrix<cdouble>(dense.sparseView()));
  EXPECT_EQ(Eigen::MatrixXcd(read_matrix_market<cdouble>((dir / "a.mtx").string())), dense);
  EXPECT_EQ(read_matrix_market_header((dir / "a.mtx").string()).field, "complex");
}

TEST(MatrixMarket, SymmetricExpanded) {
  const fs::path dir = scratch_dir("mm_sym");
  write_text(dir / "s.mtx",
             "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 4\n1 1 2\n2 1 -1\n3 2 -1\n3 3 5\n");
  Eigen::MatrixXd expected(3, 3);
  expected << 2, -1, 0, -1, 0, -1, 0, -1, 5;
  EXPECT_EQ(Eigen::MatrixXd(read_matrix_market<double>((dir / "s.mtx").string())), expected);
}

TEST(MatrixMarket, ArrayFormat) {
  const fs::path dir = scratch_dir("mm_array");
  write_text(dir / "b.mtx", "%%MatrixMarket matrix array real general\n3 1\n1.5\n-2\n4e-3\n");
  Eigen::VectorXd expected(3);
  expected << 1.5, -2, 4e-3;
  EXPECT_EQ(read_matrix_market_vector<double>((dir / "b.mtx").string()), expected);
}

TEST(MatrixMarket, MalformedReportsLine) {
  const fs::path dir = scratch_dir("mm_bad");
  write_text(dir / "bad.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n");
  try {
    read_matrix_market<double>((dir / "bad.mtx").string());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  write_text(dir / "trunc.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
  EXPECT_THROW(read_matrix_market<double>((dir / "trunc.mtx").string()), ParseError);
  write_text(dir / "banner.mtx", "%%NotMatrixMarket\n1 1 1\n");
  EXPECT_THROW(read_matrix_market<double>((dir / "banner.mtx").string()), ParseError);
  EXPECT_THROW(read_matrix_market<double>((dir / "missing.mtx").string()), ConfigError);
}

TEST(MatrixMarket, BuildsAffineSystem) {
  const fs::path dir = scratch_dir("mm_system");
  write_matrix_market((dir / "k.mtx").string(), SparseMatrix<double>(laplacian_1d(8)));
  SparseMatrix<double> eye(8, 8);
  eye.setIdentity();
  write_matrix_market((dir / "i.mtx").string(), eye);
  write_matrix_market_vector((dir / "b.mtx").string(), Eigen::VectorXd(Eigen::VectorXd::Ones(8)));
  MatrixMarketSpec spec;
  spec.terms = {{(dir / "k.mtx").string(), "1"}, {(dir / "i.mtx").string(), "-p"}};
  spec.rhs_path = (dir / "b.mtx").string();
  spec.domain = Box(-1.0, 1.0);
  const auto sys = build_problem<double>(spec);
  const Eigen::MatrixXd expected = Eigen::MatrixXd(laplacian_1d(8)) - 0.5 * Eigen::MatrixXd::Identity(8, 8);
  EXPECT_LE((assemble_dense(*sys, make_parameter(0.5)) - expected).norm(), 1e-15);
}
