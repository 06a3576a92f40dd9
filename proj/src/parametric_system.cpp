#include "subapsnap/parametric_system.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "subapsnap/rng.hpp"

namespace subapsnap {

template <class Scalar>
ParametricSystem<Scalar>::ParametricSystem(SystemDefinition<Scalar> def) : def_(std::move(def)) {
  if (def_.n < 1) throw DimensionError("system dimension must be positive");
  if (def_.domain.empty()) throw DimensionError("system needs a parameter domain");
  if (!def_.rhs_oracle) throw DimensionError("system needs a right-hand side oracle");
  if (!def_.row_oracle && def_.affine_terms.empty()) {
    throw DimensionError("system needs a row oracle or affine terms");
  }
  for (const auto& term : def_.affine_terms) {
    if (term.matrix.rows() != def_.n || term.matrix.cols() != def_.n) {
      throw DimensionError("affine term '" + term.label + "' has the wrong shape");
    }
    if (!term.coefficient) throw DimensionError("affine term '" + term.label + "' lacks f_k");
  }
  if (def_.output && def_.output->size() != def_.n) {
    throw DimensionError("output functional has the wrong length");
  }
}

template <class Scalar>
void ParametricSystem<Scalar>::check_parameter(const Parameter& p) const {
  if (p.size() != parameter_dim()) {
    throw DimensionError("parameter has dimension " + std::to_string(p.size()) + ", system '" +
                         def_.name + "' expects " + std::to_string(parameter_dim()));
  }
}

template <class Scalar>
std::vector<Scalar> ParametricSystem<Scalar>::coefficients(const Parameter& p) const {
  check_parameter(p);
  std::vector<Scalar> out;
  out.reserve(def_.affine_terms.size());
  for (const auto& term : def_.affine_terms) out.push_back(term.coefficient(p));
  return out;
}

template <class Scalar>
void ParametricSystem<Scalar>::affine_row(const Parameter& p, Index i, Row<Scalar>& out) const {
  std::vector<std::pair<Index, Scalar>> entries;
  for (const auto& term : def_.affine_terms) {
    const Scalar f = term.coefficient(p);
    for (typename SparseRowMatrix<Scalar>::InnerIterator it(term.matrix, i); it; ++it) {
      entries.emplace_back(it.col(), f * it.value());
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [col, val] : entries) {
    if (!out.cols.empty() && out.cols.back() == col) {
      out.vals.back() += val;
    } else {
      out.cols.push_back(col);
      out.vals.push_back(val);
    }
  }
}

template <class Scalar>
void ParametricSystem<Scalar>::row(const Parameter& p, Index i, Row<Scalar>& out) const {
  check_parameter(p);
  if (i < 0 || i >= def_.n) {
    throw DimensionError("row index " + std::to_string(i) + " out of range for n=" +
                         std::to_string(def_.n));
  }
  out.clear();
  if (def_.row_oracle) {
    def_.row_oracle(p, i, out);
  } else {
    affine_row(p, i, out);
  }
}

template <class Scalar>
Scalar ParametricSystem<Scalar>::rhs(const Parameter& p, Index i) const {
  check_parameter(p);
  if (i < 0 || i >= def_.n) {
    throw DimensionError("rhs index " + std::to_string(i) + " out of range for n=" +
                         std::to_string(def_.n));
  }
  return def_.rhs_oracle(p, i);
}

template <class Scalar>
Vector<Scalar> ParametricSystem<Scalar>::rhs_vector(const Parameter& p) const {
  check_parameter(p);
  Vector<Scalar> b(def_.n);
  for (Index i = 0; i < def_.n; ++i) b(i) = def_.rhs_oracle(p, i);
  return b;
}

template <class Scalar>
SparseRowMatrix<Scalar> assemble_rows(const ParametricSystem<Scalar>& sys, const Parameter& p,
                                      std::span<const Index> indices) {
  const Index n = sys.size();
  const Index s = static_cast<Index>(indices.size());
  SparseRowMatrix<Scalar> out(s, n);
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  Row<Scalar> row;
  for (Index j = 0; j < s; ++j) {
    sys.row(p, indices[j], row);
    if (row.dense) {
      for (Index c = 0; c < n; ++c) triplets.emplace_back(j, c, row.vals[c]);
    } else {
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        triplets.emplace_back(j, row.cols[k], row.vals[k]);
      }
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

template <class Scalar>
Vector<Scalar> assemble_rhs(const ParametricSystem<Scalar>& sys, const Parameter& p,
                            std::span<const Index> indices) {
  Vector<Scalar> out(static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) out(static_cast<Index>(j)) = sys.rhs(p, indices[j]);
  return out;
}

template <class Scalar>
Matrix<Scalar> rows_times(const ParametricSystem<Scalar>& sys, const Parameter& p,
                          std::span<const Index> indices, const Matrix<Scalar>& q) {
  if (q.rows() != sys.size()) throw DimensionError("rows_times: basis has the wrong row count");
  Matrix<Scalar> out(static_cast<Index>(indices.size()), q.cols());
  Row<Scalar> row;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    sys.row(p, indices[j], row);
    if (row.dense) {
      const Eigen::Map<const Vector<Scalar>> v(row.vals.data(), sys.size());
      out.row(static_cast<Index>(j)).noalias() = v.transpose() * q;
    } else {
      auto dst = out.row(static_cast<Index>(j));
      dst.setZero();
      for (std::size_t k = 0; k < row.cols.size(); ++k) dst += row.vals[k] * q.row(row.cols[k]);
    }
  }
  return out;
}

template <class Scalar>
SparseMatrix<Scalar> assemble_sparse(const ParametricSystem<Scalar>& sys, const Parameter& p) {
  const Index n = sys.size();
  SparseMatrix<Scalar> a(n, n);
  if (sys.is_affine()) {
    const auto f = sys.coefficients(p);
    for (std::size_t k = 0; k < f.size(); ++k) {
      SparseMatrix<Scalar> term = sys.affine_terms()[k].matrix;
      a += f[k] * term;
    }
    a.makeCompressed();
    return a;
  }
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  Row<Scalar> row;
  for (Index i = 0; i < n; ++i) {
    sys.row(p, i, row);
    if (row.dense) {
      for (Index c = 0; c < n; ++c) triplets.emplace_back(i, c, row.vals[c]);
    } else {
      for (std::size_t k = 0; k < row.cols.size(); ++k) triplets.emplace_back(i, row.cols[k], row.vals[k]);
    }
  }
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

template <class Scalar>
Matrix<Scalar> assemble_dense(const ParametricSystem<Scalar>& sys, const Parameter& p) {
  const Index n = sys.size();
  Matrix<Scalar> a = Matrix<Scalar>::Zero(n, n);
  if (sys.is_affine()) {
    const auto f = sys.coefficients(p);
    for (std::size_t k = 0; k < f.size(); ++k) a += f[k] * Matrix<Scalar>(sys.affine_terms()[k].matrix);
    return a;
  }
  Row<Scalar> row;
  for (Index i = 0; i < n; ++i) {
    sys.row(p, i, row);
    if (row.dense) {
      a.row(i) = Eigen::Map<const Vector<Scalar>>(row.vals.data(), n).transpose();
    } else {
      for (std::size_t k = 0; k < row.cols.size(); ++k) a(i, row.cols[k]) += row.vals[k];
    }
  }
  return a;
}

template <class Scalar>
Vector<Scalar> apply(const ParametricSystem<Scalar>& sys, const Parameter& p,
                     const Vector<Scalar>& x) {
  const Index n = sys.size();
  if (x.size() != n) throw DimensionError("apply: vector has the wrong length");
  Vector<Scalar> y = Vector<Scalar>::Zero(n);
  if (sys.is_affine()) {
    const auto f = sys.coefficients(p);
    for (std::size_t k = 0; k < f.size(); ++k) y.noalias() += f[k] * (sys.affine_terms()[k].matrix * x);
    return y;
  }
  Row<Scalar> row;
  for (Index i = 0; i < n; ++i) {
    sys.row(p, i, row);
    Scalar acc(0);
    if (row.dense) {
      acc = Eigen::Map<const Vector<Scalar>>(row.vals.data(), n).cwiseProduct(x).sum();
    } else {
      for (std::size_t k = 0; k < row.cols.size(); ++k) acc += row.vals[k] * x(row.cols[k]);
    }
    y(i) = acc;
  }
  return y;
}

template <class Scalar>
Matrix<Scalar> apply_block(const ParametricSystem<Scalar>& sys, const Parameter& p,
                           const Matrix<Scalar>& q) {
  const Index n = sys.size();
  if (q.rows() != n) throw DimensionError("apply_block: block has the wrong row count");
  if (sys.is_affine()) {
    Matrix<Scalar> y = Matrix<Scalar>::Zero(n, q.cols());
    const auto f = sys.coefficients(p);
    for (std::size_t k = 0; k < f.size(); ++k) y.noalias() += f[k] * (sys.affine_terms()[k].matrix * q);
    return y;
  }
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[i] = i;
  return rows_times(sys, p, std::span<const Index>(all), q);
}

template <class Scalar>
double relative_residual(const ParametricSystem<Scalar>& sys, const Parameter& p,
                         const Vector<Scalar>& x) {
  const Vector<Scalar> b = sys.rhs_vector(p);
  const double bn = b.norm();
  const double rn = (apply(sys, p, x) - b).norm();
  return bn > 0.0 ? rn / bn : rn;
}

template <class Scalar>
Vector<Scalar> solve_tridiagonal(const Vector<Scalar>& lower, const Vector<Scalar>& diag,
                                 const Vector<Scalar>& upper, const Vector<Scalar>& rhs) {
  const Index n = diag.size();
  if (rhs.size() != n || (n > 0 && (lower.size() != n - 1 || upper.size() != n - 1))) {
    throw DimensionError("solve_tridiagonal: inconsistent band lengths");
  }
  if (n == 0) return Vector<Scalar>();
  Vector<Scalar> d = diag;
  Vector<Scalar> x = rhs;
  // dl holds the second superdiagonal fill after elimination.
  Vector<Scalar> dl = n > 1 ? Vector<Scalar>(lower) : Vector<Scalar>(1);
  Vector<Scalar> du = n > 1 ? Vector<Scalar>(upper) : Vector<Scalar>(1);
  if (n == 1) {
    dl(0) = Scalar(0);
    du(0) = Scalar(0);
  }
  auto singular = [](Index i) {
    return SolveError("solve_tridiagonal: matrix is singular (zero pivot at row " +
                      std::to_string(i) + ")");
  };
  for (Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d(i)) >= std::abs(dl(i))) {
      if (d(i) == Scalar(0)) throw singular(i);
      const Scalar fact = dl(i) / d(i);
      d(i + 1) -= fact * du(i);
      x(i + 1) -= fact * x(i);
      dl(i) = Scalar(0);
    } else {
      const Scalar fact = d(i) / dl(i);
      d(i) = dl(i);
      const Scalar temp = d(i + 1);
      d(i + 1) = du(i) - fact * temp;
      if (i + 2 < n) {
        dl(i) = du(i + 1);
        du(i + 1) = -fact * dl(i);
      } else {
        dl(i) = Scalar(0);
      }
      du(i) = temp;
      const Scalar tb = x(i);
      x(i) = x(i + 1);
      x(i + 1) = tb - fact * x(i + 1);
    }
  }
  if (d(n - 1) == Scalar(0)) throw singular(n - 1);
  x(n - 1) /= d(n - 1);
  if (n > 1) x(n - 2) = (x(n - 2) - du(n - 2) * x(n - 1)) / d(n - 2);
  for (Index i = n - 3; i >= 0; --i) {
    x(i) = (x(i) - du(i) * x(i + 1) - dl(i) * x(i + 2)) / d(i);
  }
  return x;
}

namespace {

template <class Scalar>
void check_solution(const std::string& name, const Parameter& p, double rnorm, double bnorm,
                    double anorm, double xnorm, const SolveOptions& options) {
  if (!std::isfinite(rnorm) || !std::isfinite(xnorm)) {
    throw SolveError("full_solve(" + name + ", p=" + format_parameter(p) +
                     "): solution is not finite (singular matrix?)");
  }
  const double rel = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  const double backward = rnorm / (anorm * xnorm + bnorm);
  if (rel <= options.residual_tol || backward <= options.backward_error_tol) return;
  throw SolveError("full_solve(" + name + ", p=" + format_parameter(p) +
                   "): relative residual " + std::to_string(rel) + " above tolerance");
}

}  // namespace

template <class Scalar>
Vector<Scalar> full_solve(const ParametricSystem<Scalar>& sys, const Parameter& p,
                          const SolveOptions& options) {
  const Vector<Scalar> b = sys.rhs_vector(p);
  const Index n = sys.size();
  if (sys.structure() == Structure::dense) {
    const Matrix<Scalar> a = assemble_dense(sys, p);
    Vector<Scalar> x;
    bool done = false;
    if (sys.hermitian_positive_definite()) {
      Eigen::LLT<Matrix<Scalar>> llt(a);
      if (llt.info() == Eigen::Success) {
        x = llt.solve(b);
        done = true;
      }
    }
    if (!done) x = Eigen::PartialPivLU<Matrix<Scalar>>(a).solve(b);
    check_solution<Scalar>(sys.name(), p, (a * x - b).norm(), b.norm(), a.norm(), x.norm(), options);
    return x;
  }

  const SparseMatrix<Scalar> a = assemble_sparse(sys, p);
  Vector<Scalar> x;
  if (sys.structure() == Structure::tridiagonal) {
    Vector<Scalar> lower = Vector<Scalar>::Zero(std::max<Index>(n - 1, 0));
    Vector<Scalar> diag = Vector<Scalar>::Zero(n);
    Vector<Scalar> upper = Vector<Scalar>::Zero(std::max<Index>(n - 1, 0));
    for (Index c = 0; c < a.outerSize(); ++c) {
      for (typename SparseMatrix<Scalar>::InnerIterator it(a, c); it; ++it) {
        const Index i = it.row();
        if (i == c) {
          diag(i) += it.value();
        } else if (i == c + 1) {
          lower(c) += it.value();
        } else if (i + 1 == c) {
          upper(i) += it.value();
        } else if (it.value() != Scalar(0)) {
          throw SolveError("full_solve: system '" + sys.name() +
                           "' is flagged tridiagonal but has entries outside the band");
        }
      }
    }
    x = solve_tridiagonal(lower, diag, upper, b);
  } else {
    Eigen::SparseLU<SparseMatrix<Scalar>, Eigen::COLAMDOrdering<Index>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
      throw SolveError("full_solve(" + sys.name() + ", p=" + format_parameter(p) +
                       "): sparse LU failed, matrix singular");
    }
    x = lu.solve(b);
  }
  check_solution<Scalar>(sys.name(), p, (a * x - b).norm(), b.norm(), a.norm(), x.norm(), options);
  return x;
}

template <class Scalar>
double difference_norm(const ParametricSystem<Scalar>& sys, const Parameter& p,
                       const Parameter& q, int iterations) {
  const Index n = sys.size();
  if (!sys.is_affine() && n <= 2000) {
    const Matrix<Scalar> d = assemble_dense(sys, p) - assemble_dense(sys, q);
    if (d.squaredNorm() == 0.0) return 0.0;
    Eigen::BDCSVD<Matrix<Scalar>> svd(d);
    return svd.singularValues()(0);
  }
  SparseMatrix<Scalar> d(n, n);
  if (sys.is_affine()) {
    const auto fp = sys.coefficients(p);
    const auto fq = sys.coefficients(q);
    for (std::size_t k = 0; k < fp.size(); ++k) {
      SparseMatrix<Scalar> term = sys.affine_terms()[k].matrix;
      d += (fp[k] - fq[k]) * term;
    }
  } else {
    d = assemble_sparse(sys, p) - assemble_sparse(sys, q);
  }
  if (d.squaredNorm() == 0.0) return 0.0;
  Rng rng(0x5eed);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(rng.normal());
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector<Scalar> w = d * v;
    const double prev = estimate;
    estimate = w.norm();
    Vector<Scalar> z = d.adjoint() * w;
    const double zn = z.norm();
    if (zn == 0.0) break;
    v = z / zn;
    if (it > 5 && std::abs(estimate - prev) <= 1e-13 * estimate) break;
  }
  return std::max(estimate, (d * v).norm());
}

#define SUBAPSNAP_INSTANTIATE(S)                                                                 \
  template class ParametricSystem<S>;                                                            \
  template SparseRowMatrix<S> assemble_rows<S>(const ParametricSystem<S>&, const Parameter&,     \
                                               std::span<const Index>);                          \
  template Vector<S> assemble_rhs<S>(const ParametricSystem<S>&, const Parameter&,               \
                                     std::span<const Index>);                                    \
  template Matrix<S> rows_times<S>(const ParametricSystem<S>&, const Parameter&,                 \
                                   std::span<const Index>, const Matrix<S>&);                    \
  template SparseMatrix<S> assemble_sparse<S>(const ParametricSystem<S>&, const Parameter&);     \
  template Matrix<S> assemble_dense<S>(const ParametricSystem<S>&, const Parameter&);            \
  template Vector<S> apply<S>(const ParametricSystem<S>&, const Parameter&, const Vector<S>&);   \
  template Matrix<S> apply_block<S>(const ParametricSystem<S>&, const Parameter&,                \
                                    const Matrix<S>&);                                           \
  template double relative_residual<S>(const ParametricSystem<S>&, const Parameter&,             \
                                       const Vector<S>&);                                        \
  template Vector<S> solve_tridiagonal<S>(const Vector<S>&, const Vector<S>&, const Vector<S>&,  \
                                          const Vector<S>&);                                     \
  template Vector<S> full_solve<S>(const ParametricSystem<S>&, const Parameter&,                 \
                                   const SolveOptions&);                                         \
  template double difference_norm<S>(const ParametricSystem<S>&, const Parameter&,               \
                                     const Parameter&, int);

SUBAPSNAP_INSTANTIATE(double)
SUBAPSNAP_INSTANTIATE(cdouble)

#undef SUBAPSNAP_INSTANTIATE

}  // namespace subapsnap
