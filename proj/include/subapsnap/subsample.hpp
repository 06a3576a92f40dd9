#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subapsnap/parametric_system.hpp"
#include "subapsnap/rng.hpp"
#include "subapsnap/snapshot.hpp"

namespace subapsnap {

enum class Strategy { random, lupp, cpqr, leverage, arp, full };
enum class AnchorChoice { median, nearest, union_of };

std::string to_string(Strategy strategy);
std::string to_string(AnchorChoice anchor);
Strategy parse_strategy(const std::string& text);
AnchorChoice parse_anchor_choice(const std::string& text);

struct SelectorConfig {
  Strategy strategy = Strategy::leverage;
  /// s = ceil(oversample * r) for random and leverage.
  double oversample = 4.0;
  /// Pivot or sample on [B b] instead of B.
  bool augment_with_rhs = true;
  AnchorChoice anchor = AnchorChoice::median;
  /// Number of anchors for AnchorChoice::union_of.
  Index union_count = 3;
  std::uint64_t seed = 0;
};

/// The matrix S: s row indices with optional weights. Weighted selectors
/// stand for diag(weights) * I(indices, :).
struct RowSelector {
  Index n = 0;
  std::vector<Index> indices;
  std::vector<double> weights;  // empty when unweighted
  Strategy strategy = Strategy::full;
  std::uint64_t seed = 0;
  std::vector<Parameter> anchors;

  Index size() const { return static_cast<Index>(indices.size()); }
  bool weighted() const { return !weights.empty(); }

  /// ||S_w||_2. Repeated indices add up in quadrature.
  double operator_norm() const;

  /// Rows of a dense matrix (or vector), scaled by the weights.
  template <class Derived>
  auto apply(const Eigen::MatrixBase<Derived>& m) const {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime> out(size(), m.cols());
    for (Index j = 0; j < size(); ++j) {
      out.row(j) = m.row(indices[j]);
      if (weighted()) out.row(j) *= Scalar(weights[j]);
    }
    return out;
  }
};

/// Squared row norms of an orthonormal Q.
template <class Scalar>
Eigen::VectorXd leverage_scores(const Matrix<Scalar>& q);

/// Row selection on B (and optionally the right-hand side).
template <class Scalar>
RowSelector select_rows(const Matrix<Scalar>& b, const Vector<Scalar>* rhs,
                        const SelectorConfig& config, Rng& rng);

/// All n rows, unweighted.
RowSelector full_selector(Index n);

/// Sorted union of unweighted selectors.
RowSelector merge_selectors(std::span<const RowSelector> selectors);

/// Index of the median snapshot point: lower median along the real axis for
/// real one-dimensional domains, by modulus for complex ones, and the point
/// nearest the coordinate-wise median otherwise.
Index median_point(const std::vector<Parameter>& points);

/// Selector(s) from B = A(anchor) Q. One selector for median or union anchors,
/// one per snapshot point for nearest-point switching.
template <class Scalar>
std::vector<RowSelector> build_selectors(const ParametricSystem<Scalar>& system,
                                         const SnapshotBasis<Scalar>& basis,
                                         const SelectorConfig& config);

}  // namespace subapsnap
