#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "subapsnap/domain.hpp"
#include "subapsnap/types.hpp"

namespace subapsnap {

template <class Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>;

template <class Scalar>
using SparseRowMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

/// Hint for the reference solver.
enum class Structure { sparse, tridiagonal, dense };

/// One row of A(p). Sparse rows carry column indices; dense rows leave
/// `cols` empty and hold all n values.
template <class Scalar>
struct Row {
  std::vector<Index> cols;
  std::vector<Scalar> vals;
  bool dense = false;

  void clear() {
    cols.clear();
    vals.clear();
    dense = false;
  }
};

/// f_k(p) * A_k
template <class Scalar>
struct AffineTerm {
  std::string label;
  std::function<Scalar(const Parameter&)> coefficient;
  SparseRowMatrix<Scalar> matrix;
};

template <class Scalar>
using RowOracle = std::function<void(const Parameter&, Index, Row<Scalar>&)>;

template <class Scalar>
using RhsOracle = std::function<Scalar(const Parameter&, Index)>;

/// Everything needed to construct a ParametricSystem. When `affine_terms`
/// is non-empty and `row_oracle` is empty, rows are derived from the terms.
template <class Scalar>
struct SystemDefinition {
  std::string name;
  Index n = 0;
  Box domain;
  Structure structure = Structure::sparse;
  bool hermitian_positive_definite = false;
  RowOracle<Scalar> row_oracle;
  RhsOracle<Scalar> rhs_oracle;
  std::vector<AffineTerm<Scalar>> affine_terms;
  std::optional<Vector<Scalar>> output;
};

/// Oracle-style description of A(p) x(p) = b(p). Immutable after
/// construction; all member functions are safe to call concurrently.
template <class Scalar>
class ParametricSystem {
 public:
  using scalar_type = Scalar;

  explicit ParametricSystem(SystemDefinition<Scalar> def);

  const std::string& name() const { return def_.name; }
  Index size() const { return def_.n; }
  Index parameter_dim() const { return def_.domain.dim(); }
  const Box& domain() const { return def_.domain; }
  Structure structure() const { return def_.structure; }
  bool hermitian_positive_definite() const { return def_.hermitian_positive_definite; }

  bool is_affine() const { return !def_.affine_terms.empty(); }
  const std::vector<AffineTerm<Scalar>>& affine_terms() const { return def_.affine_terms; }
  std::vector<Scalar> coefficients(const Parameter& p) const;

  const std::optional<Vector<Scalar>>& output() const { return def_.output; }

  /// Row i of A(p), written into `out` (cleared first).
  void row(const Parameter& p, Index i, Row<Scalar>& out) const;
  Scalar rhs(const Parameter& p, Index i) const;
  Vector<Scalar> rhs_vector(const Parameter& p) const;

 private:
  void affine_row(const Parameter& p, Index i, Row<Scalar>& out) const;
  void check_parameter(const Parameter& p) const;

  SystemDefinition<Scalar> def_;
};

template <class Scalar>
using SystemPtr = std::shared_ptr<const ParametricSystem<Scalar>>;

/// Rows `indices` of A(p) as an s x n sparse matrix; touches only s rows.
template <class Scalar>
SparseRowMatrix<Scalar> assemble_rows(const ParametricSystem<Scalar>& sys, const Parameter& p,
                                      std::span<const Index> indices);

template <class Scalar>
Vector<Scalar> assemble_rhs(const ParametricSystem<Scalar>& sys, const Parameter& p,
                            std::span<const Index> indices);

/// (S A(p)) Q streamed row by row without storing S A(p).
template <class Scalar>
Matrix<Scalar> rows_times(const ParametricSystem<Scalar>& sys, const Parameter& p,
                          std::span<const Index> indices, const Matrix<Scalar>& q);

template <class Scalar>
SparseMatrix<Scalar> assemble_sparse(const ParametricSystem<Scalar>& sys, const Parameter& p);

template <class Scalar>
Matrix<Scalar> assemble_dense(const ParametricSystem<Scalar>& sys, const Parameter& p);

/// A(p) x
template <class Scalar>
Vector<Scalar> apply(const ParametricSystem<Scalar>& sys, const Parameter& p,
                     const Vector<Scalar>& x);

/// A(p) Q for a dense block Q.
template <class Scalar>
Matrix<Scalar> apply_block(const ParametricSystem<Scalar>& sys, const Parameter& p,
                           const Matrix<Scalar>& q);

/// ||A(p) x - b(p)|| / ||b(p)||
template <class Scalar>
double relative_residual(const ParametricSystem<Scalar>& sys, const Parameter& p,
                         const Vector<Scalar>& x);

struct SolveOptions {
  /// Accept when ||r|| / ||b|| is below this.
  double residual_tol = 1e-10;
  /// Also accept when the normwise backward error ||r|| / (||A||_F ||x|| + ||b||)
  /// is below this, i.e. the residual is explained by rounding.
  double backward_error_tol = 1e-13;
};

/// Reference solve of A(p) x = b(p): banded LU for tridiagonal systems,
/// sparse LU for sparse ones, Cholesky (falling back to LU) for dense ones.
template <class Scalar>
Vector<Scalar> full_solve(const ParametricSystem<Scalar>& sys, const Parameter& p,
                          const SolveOptions& options = {});

/// Tridiagonal solve with partial pivoting. `lower` and `upper` have n-1
/// entries.
template <class Scalar>
Vector<Scalar> solve_tridiagonal(const Vector<Scalar>& lower, const Vector<Scalar>& diag,
                                 const Vector<Scalar>& upper, const Vector<Scalar>& rhs);

/// Power-iteration estimate of ||A(p) - A(q)||_2. Dense SVD for n <= 2000.
template <class Scalar>
double difference_norm(const ParametricSystem<Scalar>& sys, const Parameter& p,
                       const Parameter& q, int iterations = 50);

}  // namespace subapsnap
