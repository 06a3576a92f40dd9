#pragma once

#include <memory>
#include <vector>

#include "subapsnap/parametric_system.hpp"
#include "subapsnap/rng.hpp"
#include "subapsnap/snapshot.hpp"

namespace subapsnap::testing {

template <class Scalar>
Scalar draw(Rng& rng) {
  if constexpr (is_complex_v<Scalar>) {
    return {rng.normal(), rng.normal()};
  } else {
    return rng.normal();
  }
}

template <class Scalar = double>
Matrix<Scalar> gaussian(Index rows, Index cols, Rng& rng) {
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = draw<Scalar>(rng);
  return m;
}

template <class Scalar = double>
Vector<Scalar> gaussian_vector(Index n, Rng& rng) {
  return gaussian<Scalar>(n, 1, rng).col(0);
}

template <class Scalar = double>
Matrix<Scalar> orthonormal(Index rows, Index cols, Rng& rng) {
  Eigen::HouseholderQR<Matrix<Scalar>> qr(gaussian<Scalar>(rows, cols, rng));
  return qr.householderQ() * Matrix<Scalar>::Identity(rows, cols);
}

template <class Scalar>
SparseRowMatrix<Scalar> sparse(const Matrix<Scalar>& m) {
  return m.sparseView(0.0, 0.0);
}

template <class Scalar>
AffineTerm<Scalar> constant_term(const std::string& label, SparseRowMatrix<Scalar> m) {
  return {label, [](const Parameter&) { return Scalar(1); }, std::move(m)};
}

template <class Scalar>
AffineTerm<Scalar> linear_term(const std::string& label, SparseRowMatrix<Scalar> m) {
  return {label, [](const Parameter& p) { return from_complex<Scalar>(p(0)); }, std::move(m)};
}

/// A(p) = A0 + p A1 with A0 diagonally dominant, b(p) = b0 + p b1, p in [0, 1].
template <class Scalar = double>
SystemPtr<Scalar> random_affine_system(Index n, Rng& rng, double coupling = 1.0) {
  Matrix<Scalar> a0 = gaussian<Scalar>(n, n, rng);
  a0.diagonal().array() += Scalar(3.0 * std::sqrt(static_cast<double>(n)));
  const Matrix<Scalar> a1 = coupling * gaussian<Scalar>(n, n, rng);
  auto b0 = std::make_shared<Vector<Scalar>>(gaussian_vector<Scalar>(n, rng));
  auto b1 = std::make_shared<Vector<Scalar>>(gaussian_vector<Scalar>(n, rng));
  SystemDefinition<Scalar> def;
  def.name = "random-affine";
  def.n = n;
  def.domain = Box(0.0, 1.0);
  def.structure = Structure::dense;
  def.affine_terms.push_back(constant_term<Scalar>("A0", sparse(a0)));
  def.affine_terms.push_back(linear_term<Scalar>("A1", sparse(a1)));
  def.rhs_oracle = [b0, b1](const Parameter& p, Index i) {
    return (*b0)(i) + from_complex<Scalar>(p(0)) * (*b1)(i);
  };
  return std::make_shared<const ParametricSystem<Scalar>>(std::move(def));
}

/// A(p) = I with b(p) given; the DEIM setting.
inline SystemPtr<double> identity_system(Index n, std::function<double(const Parameter&, Index)> rhs,
                                         Box domain = Box(0.0, 1.0)) {
  SparseRowMatrix<double> eye(n, n);
  eye.setIdentity();
  SystemDefinition<double> def;
  def.name = "identity";
  def.n = n;
  def.domain = std::move(domain);
  def.affine_terms.push_back(constant_term<double>("I", eye));
  def.rhs_oracle = std::move(rhs);
  return std::make_shared<const ParametricSystem<double>>(std::move(def));
}

inline std::vector<Parameter> line_points(double lo, double hi, Index count) {
  std::vector<Parameter> out;
  for (Index k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(count - 1);
    out.push_back(make_parameter(lo + t * (hi - lo)));
  }
  return out;
}

}  // namespace subapsnap::testing
