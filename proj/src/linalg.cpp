#include "subapsnap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace subapsnap::linalg {

namespace {

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

void require_weights(std::span<const double> weights, Index rows) {
  if (!weights.empty() && static_cast<Index>(weights.size()) != rows) {
    throw DimensionError("weights length " + std::to_string(weights.size()) +
                         " does not match " + std::to_string(rows) + " rows");
  }
}

}  // namespace

template <class Scalar>
QrFactors<Scalar> thin_qr(const Matrix<Scalar>& m, double rtol) {
  const Index n = m.rows();
  const Index r = m.cols();
  if (n < r || r == 0) {
    throw DimensionError("thin_qr needs rows >= cols >= 1, got " + std::to_string(n) + "x" +
                         std::to_string(r));
  }
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m);
  Matrix<Scalar> rf = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(n, r);

  const Eigen::VectorXd diag = rf.diagonal().cwiseAbs();
  const double dmax = diag.maxCoeff();
  for (Index j = 0; j < r; ++j) {
    if (!(diag(j) > rtol * dmax) || dmax == 0.0) {
      throw RankDeficientError("thin_qr: input is numerically rank deficient at column " +
                                   std::to_string(j),
                               j);
    }
  }
  // Fix the phase so that diag(R) is real and positive.
  for (Index j = 0; j < r; ++j) {
    const Scalar d = rf(j, j) / diag(j);
    q.col(j) *= d;
    rf.row(j) *= Eigen::numext::conj(d);
  }
  return {std::move(q), std::move(rf)};
}

template <class Scalar>
SvdFactors<Scalar> thin_svd(const Matrix<Scalar>& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DimensionError("thin_svd: empty matrix");
  if (!all_finite(m)) throw NumericalError("thin_svd: non-finite input");
  if (m.rows() < m.cols()) {
    Matrix<Scalar> mt = m.adjoint();
    auto t = thin_svd<Scalar>(mt);
    return {std::move(t.right), std::move(t.singular_values), std::move(t.left)};
  }
  const Index n = m.rows();
  const Index r = m.cols();
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m);
  Matrix<Scalar> rf = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(rf, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!all_finite(svd.singularValues()) || !all_finite(svd.matrixU()) ||
      !all_finite(svd.matrixV())) {
    throw ConvergenceError("thin_svd: Jacobi iteration did not converge");
  }
  Matrix<Scalar> left = qr.householderQ() * Matrix<Scalar>::Identity(n, r);
  left = left * svd.matrixU();
  return {std::move(left), svd.singularValues(), svd.matrixV()};
}

template <class Scalar>
Eigen::VectorXd singular_values(const Matrix<Scalar>& m) {
  if (m.rows() == 0 || m.cols() == 0) return Eigen::VectorXd();
  if (!all_finite(m)) throw NumericalError("singular_values: non-finite input");
  if (m.rows() < m.cols()) {
    Matrix<Scalar> mt = m.adjoint();
    return singular_values<Scalar>(mt);
  }
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m);
  Matrix<Scalar> rf = qr.matrixQR().topRows(m.cols()).template triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(rf);
  if (!all_finite(svd.singularValues())) {
    throw ConvergenceError("singular_values: Jacobi iteration did not converge");
  }
  return svd.singularValues();
}

template <class Scalar>
PolarFactors<Scalar> polar_unitary(const Matrix<Scalar>& m, double rtol) {
  if (m.rows() < m.cols()) throw DimensionError("polar_unitary needs rows >= cols");
  auto svd = thin_svd<Scalar>(m);
  const auto& s = svd.singular_values;
  const Index r = s.size();
  if (!(s(r - 1) > rtol * s(0))) {
    throw RankDeficientError("polar_unitary: rank deficient input, unitary factor not unique",
                             r - 1);
  }
  Matrix<Scalar> u = svd.left * svd.right.adjoint();
  Matrix<Scalar> h = svd.right * s.template cast<Scalar>().asDiagonal() * svd.right.adjoint();
  Matrix<Scalar> hs = (h + h.adjoint()) / Scalar(2);
  return {std::move(u), std::move(hs)};
}

template <class Scalar>
Vector<Scalar> solve_ls(const Matrix<Scalar>& m, const Vector<Scalar>& rhs,
                        std::span<const double> weights, double rtol) {
  const Index rows = m.rows();
  const Index r = m.cols();
  if (rhs.size() != rows) throw DimensionError("solve_ls: rhs length does not match rows");
  if (rows < r || r == 0) throw DimensionError("solve_ls: needs rows >= cols >= 1");
  require_weights(weights, rows);

  Matrix<Scalar> mw = m;
  Vector<Scalar> bw = rhs;
  if (!weights.empty()) {
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), rows);
    mw = w.template cast<Scalar>().asDiagonal() * m;
    bw = w.template cast<Scalar>().asDiagonal() * rhs;
  }
  Eigen::HouseholderQR<Matrix<Scalar>> qr(mw);
  const auto& packed = qr.matrixQR();
  const Eigen::VectorXd diag = packed.diagonal().cwiseAbs();
  const double dmax = diag.maxCoeff();
  for (Index j = 0; j < r; ++j) {
    if (!(diag(j) > rtol * dmax) || dmax == 0.0) {
      throw RankDeficientError("solve_ls: coefficient matrix is rank deficient at column " +
                                   std::to_string(j),
                               j);
    }
  }
  Vector<Scalar> qtb = qr.householderQ().adjoint() * bw;
  Vector<Scalar> c = packed.topLeftCorner(r, r).template triangularView<Eigen::Upper>().solve(
      qtb.head(r));
  return c;
}

template <class Scalar>
std::vector<Index> lupp_row_pivots(const Matrix<Scalar>& m) {
  const Index n = m.rows();
  const Index r = m.cols();
  if (n < r || r == 0) throw DimensionError("lupp_row_pivots needs rows >= cols >= 1");
  Matrix<Scalar> w = m;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index k = 0; k < r; ++k) {
    Index at = 0;
    const double pivot = w.col(k).tail(n - k).cwiseAbs().maxCoeff(&at);
    if (pivot == 0.0) {
      throw RankDeficientError("lupp_row_pivots: zero pivot column " + std::to_string(k), k);
    }
    at += k;
    if (at != k) {
      w.row(k).swap(w.row(at));
      std::swap(perm[k], perm[at]);
    }
    if (k + 1 < r && k + 1 < n) {
      const Vector<Scalar> l = w.col(k).tail(n - k - 1) / w(k, k);
      w.bottomRightCorner(n - k - 1, r - k - 1).noalias() -= l * w.row(k).tail(r - k - 1);
    }
  }
  perm.resize(static_cast<std::size_t>(r));
  return perm;
}

template <class Scalar>
std::vector<Index> cpqr_row_pivots(const Matrix<Scalar>& m, Index count) {
  const Index n = m.rows();
  const Index r = m.cols();
  if (count < 0) count = r;
  if (count > r || count > n || r == 0) {
    throw DimensionError("cpqr_row_pivots: cannot select " + std::to_string(count) +
                         " rows from a " + std::to_string(n) + "x" + std::to_string(r) +
                         " matrix");
  }
  Matrix<Scalar> w = m;
  Eigen::VectorXd norms2 = w.rowwise().squaredNorm();
  const double scale = std::sqrt(norms2.maxCoeff());
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<Index> pivots;
  pivots.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    Index best = -1;
    double best_norm2 = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (!taken[i] && norms2(i) > best_norm2) {
        best_norm2 = norms2(i);
        best = i;
      }
    }
    const double best_norm = std::sqrt(std::max(best_norm2, 0.0));
    if (best < 0 || scale == 0.0 || !(best_norm > 1e-14 * scale)) {
      throw RankDeficientError("cpqr_row_pivots: no residual left at step " + std::to_string(k),
                               k);
    }
    pivots.push_back(best);
    taken[best] = 1;
    const Vector<Scalar> q = w.row(best).adjoint() / Scalar(best_norm);
    const Vector<Scalar> proj = w * q;
    w.noalias() -= proj * q.adjoint();
    w.row(best).setZero();
    norms2 = w.rowwise().squaredNorm();
  }
  return pivots;
}

template <class Scalar>
Matrix<Scalar> weighted_rows(const Matrix<Scalar>& m, std::span<const Index> indices,
                             std::span<const double> weights) {
  if (!weights.empty() && weights.size() != indices.size()) {
    throw DimensionError("weighted_rows: weights and indices differ in length");
  }
  Matrix<Scalar> out(static_cast<Index>(indices.size()), m.cols());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Index i = indices[j];
    if (i < 0 || i >= m.rows()) throw DimensionError("weighted_rows: index out of range");
    out.row(static_cast<Index>(j)) = m.row(i);
    if (!weights.empty()) out.row(static_cast<Index>(j)) *= Scalar(weights[j]);
  }
  return out;
}

template <class Scalar>
Vector<Scalar> weighted_entries(const Vector<Scalar>& v, std::span<const Index> indices,
                                std::span<const double> weights) {
  if (!weights.empty() && weights.size() != indices.size()) {
    throw DimensionError("weighted_entries: weights and indices differ in length");
  }
  Vector<Scalar> out(static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const Index i = indices[j];
    if (i < 0 || i >= v.size()) throw DimensionError("weighted_entries: index out of range");
    out(static_cast<Index>(j)) = weights.empty() ? v(i) : Scalar(weights[j]) * v(i);
  }
  return out;
}

#define SUBAPSNAP_INSTANTIATE(S)                                                               \
  template QrFactors<S> thin_qr<S>(const Matrix<S>&, double);                                  \
  template SvdFactors<S> thin_svd<S>(const Matrix<S>&);                                        \
  template Eigen::VectorXd singular_values<S>(const Matrix<S>&);                               \
  template PolarFactors<S> polar_unitary<S>(const Matrix<S>&, double);                         \
  template Vector<S> solve_ls<S>(const Matrix<S>&, const Vector<S>&, std::span<const double>,  \
                                 double);                                                      \
  template std::vector<Index> lupp_row_pivots<S>(const Matrix<S>&);                            \
  template std::vector<Index> cpqr_row_pivots<S>(const Matrix<S>&, Index);                     \
  template Matrix<S> weighted_rows<S>(const Matrix<S>&, std::span<const Index>,                \
                                      std::span<const double>);                                \
  template Vector<S> weighted_entries<S>(const Vector<S>&, std::span<const Index>,             \
                                         std::span<const double>);

SUBAPSNAP_INSTANTIATE(double)
SUBAPSNAP_INSTANTIATE(cdouble)

#undef SUBAPSNAP_INSTANTIATE

}  // namespace subapsnap::linalg
