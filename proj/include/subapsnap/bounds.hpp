#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "subapsnap/parametric_system.hpp"
#include "subapsnap/snapshot.hpp"
#include "subapsnap/subsample.hpp"

namespace subapsnap {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct LemmaBounds {
  double bound_a = infinity;   // ||S||_2 / sigma_min(S U)
  double bound_ab = infinity;  // kappa_2(S U~)
  bool a_applicable = false;
  bool ab_applicable = false;
};

/// U = polar factor of B, U~ = polar factor of [B b]. A bound whose
/// sampled factor loses rank is reported as infinite and inapplicable.
template <class Scalar>
LemmaBounds lemma_bounds(const Matrix<Scalar>& b, const Vector<Scalar>& rhs,
                         const RowSelector& selector);

/// sigma_min(S_w M), zero when S_w M has fewer rows than columns.
template <class Scalar>
double sampled_sigma_min(const Matrix<Scalar>& m, const RowSelector& selector);

struct ResidualRatio {
  double subapsnap = 0.0;  // ||B c_hat - b||
  double apsnap = 0.0;     // ||B c - b||
  double rhs_norm = 0.0;
  double ratio = infinity;
  bool defined = false;
};

/// The ratio is undefined (reported as infinity) when the ApSnap residual
/// is at rounding level, below floor * ||b||.
template <class Scalar>
ResidualRatio residual_ratio(const Matrix<Scalar>& b, const Vector<Scalar>& rhs,
                             const RowSelector& selector, double floor = 1e-12);

struct PerturbationBound {
  double value = infinity;
  bool applicable = false;
  double c = 0.0;          // 3 / sigma_min(A(p0) Q)
  double delta = 0.0;
  double sigma_su = 0.0;   // sigma_min(S U(p0))
};

/// ||S|| / (sigma_min(S U(p0)) - C ||S|| delta) when the denominator is
/// positive. With an unweighted selector ||S|| = 1. delta defaults to an
/// estimate of ||A(p*) - A(p0)||_2.
template <class Scalar>
PerturbationBound theorem_bound(const ParametricSystem<Scalar>& system,
                                const SnapshotBasis<Scalar>& basis, const RowSelector& selector,
                                const Parameter& p0, const Parameter& p,
                                std::optional<double> delta = std::nullopt);

struct CorollaryBounds {
  PerturbationBound closest;  // nearest snapshot point
  PerturbationBound global;   // worst snapshot point and covering radius
  Index nearest = 0;
  double h = 0.0;
};

template <class Scalar>
CorollaryBounds corollary_bounds(const ParametricSystem<Scalar>& system,
                                 const SnapshotBasis<Scalar>& basis, const RowSelector& selector,
                                 const Parameter& p, double lipschitz,
                                 std::optional<double> h = std::nullopt);

struct LipschitzEstimate {
  double value = 0.0;
  Index pairs = 0;
  std::string method;
};

/// Exact for affine systems where one coefficient is linear in p and the
/// others constant; otherwise the largest difference quotient between
/// consecutive probe points.
template <class Scalar>
LipschitzEstimate estimate_lipschitz(const ParametricSystem<Scalar>& system,
                                     const std::vector<Parameter>& probes);

/// Power-iteration estimate of ||A||_2 (dense SVD when n <= 200).
template <class Scalar>
double spectral_norm(const SparseRowMatrix<Scalar>& a, int iterations = 200);

struct BoundReport {
  Parameter p;
  ResidualRatio ratio;
  LemmaBounds lemma;
  std::optional<PerturbationBound> theorem;
  std::optional<PerturbationBound> cor_closest;
  std::optional<PerturbationBound> cor_global;

  /// Applicable bounds joined by '|', e.g. "ratio|A|Ab|thm|cor_closest|cor_global".
  std::string flags() const;
};

/// Per-snapshot quantities cached for bound sweeps.
template <class Scalar>
class BoundContext {
 public:
  struct Options {
    std::optional<double> lipschitz;  // corollaries need it
    std::optional<Parameter> p0;      // theorem anchor; default selector anchor
    bool theorem = true;
    double rounding_floor = 1e-12;
  };

  BoundContext(SystemPtr<Scalar> system, BasisPtr<Scalar> basis, RowSelector selector,
               Options options);

  BoundReport evaluate(const Parameter& p) const;

  double covering_radius() const { return h_; }
  const std::vector<double>& sigma_aq() const { return sigma_aq_; }
  const std::vector<double>& sigma_su() const { return sigma_su_; }

 private:
  PerturbationBound perturbation(double sigma_su, double sigma_aq, double delta) const;

  SystemPtr<Scalar> system_;
  BasisPtr<Scalar> basis_;
  RowSelector selector_;
  Options options_;
  double s_norm_ = 1.0;
  double h_ = 0.0;
  std::vector<double> sigma_aq_;
  std::vector<double> sigma_su_;
  Parameter p0_;
  double p0_sigma_aq_ = 0.0;
  double p0_sigma_su_ = 0.0;
};

}  // namespace subapsnap
