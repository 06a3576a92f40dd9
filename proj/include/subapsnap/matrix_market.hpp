#pragma once

#include <string>

#include "subapsnap/parametric_system.hpp"

namespace subapsnap {

/// Banner of a Matrix Market file, lower-cased.
struct MatrixMarketHeader {
  std::string object;    // matrix
  std::string format;    // coordinate | array
  std::string field;     // real | complex | integer | pattern
  std::string symmetry;  // general | symmetric | skew-symmetric | hermitian
};

MatrixMarketHeader read_matrix_market_header(const std::string& path);

/// Reads a coordinate or array file into a sparse matrix, expanding
/// symmetric storage. Malformed input raises ParseError with the line number.
template <class Scalar>
SparseMatrix<Scalar> read_matrix_market(const std::string& path);

/// Reads an n x 1 (or 1 x n) file as a vector.
template <class Scalar>
Vector<Scalar> read_matrix_market_vector(const std::string& path);

/// Writes `general` coordinate format with 17 significant digits.
template <class Scalar>
void write_matrix_market(const std::string& path, const SparseMatrix<Scalar>& a);

template <class Scalar>
void write_matrix_market_vector(const std::string& path, const Vector<Scalar>& v);

}  // namespace subapsnap
