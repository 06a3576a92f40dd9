#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace subapsnap {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class T>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

/// Converts a complex number into the scalar field of a system. Real systems
/// read only the real part of the parameter.
template <class Scalar>
Scalar from_complex(cdouble z) {
  if constexpr (is_complex_v<Scalar>) {
    return z;
  } else {
    return z.real();
  }
}

/// A point of the parameter domain. Coordinates are complex so that
/// frequency sweeps along the imaginary axis share the same type as real
/// parameters; real problems ignore the imaginary part.
using Parameter = Eigen::VectorXcd;

Parameter make_parameter(cdouble value);
Parameter make_parameter(std::initializer_list<cdouble> values);
std::string format_parameter(const Parameter& p);
double parameter_distance(const Parameter& a, const Parameter& b);

// Error hierarchy. Numerical failures derive from NumericalError so that the
// CLI can map them onto a single exit status.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, Index column)
      : NumericalError(what), column_(column) {}
  Index column() const noexcept { return column_; }

 private:
  Index column_;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolveError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, long line)
      : ConfigError(what + " (line " + std::to_string(line) + ")"), detail_(what), line_(line) {}
  long line() const noexcept { return line_; }
  /// Message without the line suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  long line_;
};

}  // namespace subapsnap
