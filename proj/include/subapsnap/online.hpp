#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subapsnap/parametric_system.hpp"
#include "subapsnap/snapshot.hpp"
#include "subapsnap/subsample.hpp"

namespace subapsnap {

/// Precomputed pieces of S A(p) Q. With affine terms A(p) = sum_k f_k(p) A_k
/// the blocks S A_k Q make each online solve independent of n.
template <class Scalar>
struct OnlinePlan {
  SystemPtr<Scalar> system;
  BasisPtr<Scalar> basis;
  RowSelector selector;
  std::vector<Matrix<Scalar>> blocks;           // S A_k Q, s x r'
  Matrix<Scalar> sq;                            // S Q
  std::optional<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> output_projection;  // c^H Q
  bool fallback = false;

  Index rank() const { return basis->rank(); }
};

/// Builds the plan, touching only the selected rows. Checks the summed
/// blocks against a direct row evaluation at the domain center.
template <class Scalar>
OnlinePlan<Scalar> precompute_online(SystemPtr<Scalar> system, BasisPtr<Scalar> basis,
                                     RowSelector selector);

/// S A(p) Q, from the blocks or (fallback) by evaluating the selected rows.
template <class Scalar>
Matrix<Scalar> reduced_matrix(const OnlinePlan<Scalar>& plan, const Parameter& p);

struct ResidualEstimate {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double eps = 0.0;
};

/// eps = r ln(r) / s clamped to [0, 0.99].
double interval_epsilon(Index r, Index s);

template <class Scalar>
struct OnlineSolution {
  Parameter p;
  Vector<Scalar> coefficients;
  double sampled_residual = 0.0;  // ||W (S B c - S b)||
  std::optional<ResidualEstimate> interval;
  std::optional<Scalar> output;   // c^H Q c_hat
};

/// Weighted least squares on the s sampled rows. Throws RankDeficientError
/// naming p when S A(p) Q loses rank.
template <class Scalar>
OnlineSolution<Scalar> solve_online(const OnlinePlan<Scalar>& plan, const Parameter& p,
                                    bool want_interval = false);

/// x = Q c_hat, O(n r').
template <class Scalar>
Vector<Scalar> lift(const OnlinePlan<Scalar>& plan, const OnlineSolution<Scalar>& solution);

template <class Scalar>
ResidualEstimate estimate_residual(const OnlinePlan<Scalar>& plan,
                                   const OnlineSolution<Scalar>& solution);

template <class Scalar>
struct ApSnapSolution {
  Vector<Scalar> coefficients;
  double residual = 0.0;      // ||A(p) Q c - b(p)||
  double rhs_norm = 0.0;
  double relative_residual() const { return rhs_norm > 0.0 ? residual / rhs_norm : residual; }
};

/// Full least squares over all n rows (reference).
template <class Scalar>
ApSnapSolution<Scalar> solve_apsnap(const ParametricSystem<Scalar>& system,
                                    const SnapshotBasis<Scalar>& basis, const Parameter& p);

/// Plans for several anchors; each p uses the plan of its nearest anchor.
template <class Scalar>
struct PlanSet {
  std::vector<OnlinePlan<Scalar>> plans;
  std::vector<Parameter> anchors;

  const OnlinePlan<Scalar>& for_point(const Parameter& p) const;
};

template <class Scalar>
PlanSet<Scalar> precompute_plans(SystemPtr<Scalar> system, BasisPtr<Scalar> basis,
                                 std::vector<RowSelector> selectors);

struct BatchOptions {
  bool want_interval = false;
  int workers = 1;
};

/// Columnar results, in input order.
template <class Scalar>
struct BatchResult {
  std::vector<Parameter> points;
  std::vector<Vector<Scalar>> coefficients;
  std::vector<double> sampled_residual;
  std::vector<double> lower;      // NaN without interval
  std::vector<double> upper;
  std::vector<std::optional<Scalar>> output;
  std::vector<double> wall_time;  // seconds per point
  std::vector<std::string> error; // empty on success
  double busy_time = 0.0;         // summed worker time, >= sum of wall_time
  double elapsed = 0.0;

  std::size_t size() const { return points.size(); }
};

template <class Scalar>
BatchResult<Scalar> solve_batch(const PlanSet<Scalar>& plans, const std::vector<Parameter>& points,
                                const BatchOptions& options = {});

}  // namespace subapsnap
