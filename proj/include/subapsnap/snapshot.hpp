#pragma once

#include <memory>
#include <string>
#include <vector>

#include "subapsnap/parametric_system.hpp"

namespace subapsnap {

enum class BasisMode { qr, pod, none };
enum class PointLayout { equispaced, log_spaced, chebyshev };

std::string to_string(BasisMode mode);
std::string to_string(PointLayout layout);
BasisMode parse_basis_mode(const std::string& text);
PointLayout parse_point_layout(const std::string& text);

struct SnapshotOptions {
  BasisMode mode = BasisMode::qr;
  /// pod keeps sigma_i > pod_tol * sigma_1.
  double pod_tol = 1e-10;
  int workers = 1;
  /// Keep the raw snapshot matrix X. Large runs may drop it after
  /// orthonormalization to halve memory.
  bool keep_raw = true;
  SolveOptions solve;
};

template <class Scalar>
struct SnapshotBasis {
  std::vector<Parameter> points;
  Matrix<Scalar> raw;               // n x r, empty when dropped
  Matrix<Scalar> q;                 // n x r', orthonormal (raw copy for mode none)
  Eigen::VectorXd singular_values;  // of raw X, descending
  BasisMode mode = BasisMode::qr;
  double pod_tol = 0.0;

  Index size() const { return q.rows(); }
  Index rank() const { return q.cols(); }
};

template <class Scalar>
using BasisPtr = std::shared_ptr<const SnapshotBasis<Scalar>>;

/// Deterministic point sets. Multi-dimensional boxes get a tensor grid with
/// ceil(r^(1/d)) points per axis, so the result may hold more than r points.
std::vector<Parameter> default_snapshot_points(const Box& domain, Index r, PointLayout layout);
std::vector<Parameter> default_snapshot_points(const Box& domain, Index r,
                                               const std::vector<PointLayout>& per_axis);

/// Points on one axis, as fractions or values along the segment lo..hi.
std::vector<cdouble> axis_points(cdouble lo, cdouble hi, Index count, PointLayout layout);

/// Solves at every point (in parallel when workers > 1) and orthonormalizes.
template <class Scalar>
SnapshotBasis<Scalar> build_snapshot(const ParametricSystem<Scalar>& system,
                                     std::vector<Parameter> points,
                                     const SnapshotOptions& options = {});

/// Orthonormalizes a given raw snapshot matrix.
template <class Scalar>
SnapshotBasis<Scalar> basis_from_snapshots(std::vector<Parameter> points, Matrix<Scalar> raw,
                                           const SnapshotOptions& options = {});

}  // namespace subapsnap
