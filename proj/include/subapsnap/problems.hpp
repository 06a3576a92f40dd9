#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "subapsnap/parametric_system.hpp"

namespace subapsnap {

/// A(p) = A0 - p I with A0 = tridiag(-1, 2, -1), b(p) = exp(b0 sin(p/10) p).
struct TridiagSpec {
  Index n = 1000;
  std::uint64_t seed = 1;
  double lo = -10.0;
  double hi = -9.0;
};

/// -div(sigma_p grad u) = 1 on [-1,1]^2, u = 0 on the boundary,
/// sigma_p = 1 + p inside the unit disk. `grid` interior points per side.
struct Heat2dSpec {
  Index grid = 50;
  double lo = 0.0;
  double hi = 5.0;
};

/// (pI - A) x = b on the unit square, A = -(diffusion + upwind convection).
/// p runs over i[lo, hi].
struct ConvDiffSpec {
  Index grid = 50;
  double convection = 10.0;
  double lo = 1.0;
  double hi = 1e6;
};

enum class VectorKind { ones, first, gaussian };

/// (pI - A0 - e^{tau p} A1) x = b, p over i[lo, hi].
struct DelaySpec {
  Index n = 1000;
  double tau = 0.1;
  double kappa = 2.1;
  double lo = 1.0;
  double hi = 1e4;
  VectorKind b = VectorKind::gaussian;
  VectorKind c = VectorKind::gaussian;
  std::uint64_t seed = 1;
};

/// (K(sigma) + lambda I) x = y_train with p = (lambda, sigma).
struct KrrSpec {
  Index n_train = 2000;
  Index n_test = 200;
  double noise = 0.3;
  std::uint64_t seed = 1;
  double lambda_lo = 1e-5;
  double lambda_hi = 1e2;
  double sigma_lo = 0.1;
  double sigma_hi = 10.0;
};

/// f(p) = factor, factor*p[axis] or factor*exp(rate*p[axis]).
struct Coefficient {
  enum class Kind { constant, linear, exponential };
  Kind kind = Kind::constant;
  cdouble factor{1.0, 0.0};
  cdouble rate{0.0, 0.0};
  Index axis = 0;
  std::string text;

  cdouble operator()(const Parameter& p) const;
};

/// Parses "1", "-p", "2.5*p", "p[1]", "exp(0.1*p)", "-3*exp(-2*p[0])".
Coefficient parse_coefficient(const std::string& text);

struct MatrixTerm {
  std::string path;
  std::string coefficient;
};

/// A(p) = sum_k f_k(p) A_k from Matrix Market files.
struct MatrixMarketSpec {
  std::vector<MatrixTerm> terms;
  std::string rhs_path;
  std::string output_path;  // optional
  Box domain;
  bool complex = false;
};

using ProblemSpec =
    std::variant<TridiagSpec, Heat2dSpec, ConvDiffSpec, DelaySpec, KrrSpec, MatrixMarketSpec>;

std::string problem_kind(const ProblemSpec& spec);

/// True when the problem needs complex arithmetic.
bool problem_is_complex(const ProblemSpec& spec);

/// Throws ConfigError when a size or constant is out of range.
void validate_problem(const ProblemSpec& spec);

/// Default parameter domain of the problem.
Box problem_domain(const ProblemSpec& spec);

template <class Scalar>
SystemPtr<Scalar> build_problem(const ProblemSpec& spec);

using AnySystem = std::variant<SystemPtr<double>, SystemPtr<cdouble>>;

/// Builds in the scalar field the problem requires.
AnySystem build_any_problem(const ProblemSpec& spec);

// Building blocks, exposed for tests and for the KRR grid search.

SparseRowMatrix<double> laplacian_1d(Index n);
SparseRowMatrix<double> delay_t_matrix(Index n);
Eigen::VectorXd make_vector(VectorKind kind, Index n, std::uint64_t seed);

struct KrrData {
  Eigen::VectorXd t_train;
  Eigen::VectorXd y_train;
  Eigen::VectorXd t_test;
  Eigen::VectorXd y_test;
};

KrrData make_krr_data(const KrrSpec& spec);

/// exp(-(a_i - b_j)^2 / (2 sigma^2))
Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma);

SystemPtr<double> build_krr(const KrrSpec& spec, const KrrData& data);

}  // namespace subapsnap
