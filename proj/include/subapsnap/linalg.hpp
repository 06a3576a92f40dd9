#pragma once

#include <span>
#include <vector>

#include "subapsnap/types.hpp"

/// Dense factorizations and pivoting primitives, generic over real and
/// complex doubles. All functions are pure.
namespace subapsnap::linalg {

inline constexpr double default_rtol = 1e-12;

template <class Scalar>
struct QrFactors {
  Matrix<Scalar> q;  // n x r, orthonormal columns
  Matrix<Scalar> r;  // r x r, upper triangular with real nonnegative diagonal
};

template <class Scalar>
struct SvdFactors {
  Matrix<Scalar> left;              // n x k
  Eigen::VectorXd singular_values;  // k, descending
  Matrix<Scalar> right;             // r x k
};

template <class Scalar>
struct PolarFactors {
  Matrix<Scalar> unitary;    // n x r, orthonormal columns
  Matrix<Scalar> hermitian;  // r x r, Hermitian positive semidefinite
};

/// Householder thin QR. Throws RankDeficientError when a diagonal entry of R
/// drops below rtol times the largest one.
template <class Scalar>
QrFactors<Scalar> thin_qr(const Matrix<Scalar>& m, double rtol = default_rtol);

/// Thin SVD, k = min(rows, cols). Tall inputs are reduced by QR first and the
/// small triangular factor goes through one-sided Jacobi.
template <class Scalar>
SvdFactors<Scalar> thin_svd(const Matrix<Scalar>& m);

template <class Scalar>
Eigen::VectorXd singular_values(const Matrix<Scalar>& m);

/// Unitary polar factor U = W V^H and Hermitian factor H = V diag(s) V^H.
template <class Scalar>
PolarFactors<Scalar> polar_unitary(const Matrix<Scalar>& m, double rtol = default_rtol);

/// argmin_c || diag(weights) (m c - rhs) ||_2 by Householder QR. An empty
/// weight span means unweighted.
template <class Scalar>
Vector<Scalar> solve_ls(const Matrix<Scalar>& m, const Vector<Scalar>& rhs,
                        std::span<const double> weights = {}, double rtol = default_rtol);

/// First cols(m) pivot rows of Gaussian elimination with partial pivoting.
template <class Scalar>
std::vector<Index> lupp_row_pivots(const Matrix<Scalar>& m);

/// Businger-Golub column pivots of m^T, i.e. greedy selection of the row with
/// the largest residual norm after projecting out the rows already chosen.
/// `count` defaults to cols(m).
template <class Scalar>
std::vector<Index> cpqr_row_pivots(const Matrix<Scalar>& m, Index count = -1);

/// Rows `indices` of m, each scaled by the matching weight (if any).
template <class Scalar>
Matrix<Scalar> weighted_rows(const Matrix<Scalar>& m, std::span<const Index> indices,
                             std::span<const double> weights = {});

template <class Scalar>
Vector<Scalar> weighted_entries(const Vector<Scalar>& v, std::span<const Index> indices,
                                std::span<const double> weights = {});

}  // namespace subapsnap::linalg
