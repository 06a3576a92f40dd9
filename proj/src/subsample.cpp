#include "subapsnap/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "subapsnap/linalg.hpp"

namespace subapsnap {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::random:
      return "random";
    case Strategy::lupp:
      return "lupp";
    case Strategy::cpqr:
      return "cpqr";
    case Strategy::leverage:
      return "leverage";
    case Strategy::arp:
      return "arp";
    case Strategy::full:
      return "full";
  }
  return "?";
}

std::string to_string(AnchorChoice anchor) {
  switch (anchor) {
    case AnchorChoice::median:
      return "median";
    case AnchorChoice::nearest:
      return "nearest";
    case AnchorChoice::union_of:
      return "union";
  }
  return "?";
}

Strategy parse_strategy(const std::string& text) {
  if (text == "random") return Strategy::random;
  if (text == "lupp" || text == "lu") return Strategy::lupp;
  if (text == "cpqr" || text == "qr") return Strategy::cpqr;
  if (text == "leverage" || text == "lev") return Strategy::leverage;
  if (text == "arp") return Strategy::arp;
  if (text == "full") return Strategy::full;
  throw ConfigError("unknown selector strategy '" + text + "'");
}

AnchorChoice parse_anchor_choice(const std::string& text) {
  if (text == "median") return AnchorChoice::median;
  if (text == "nearest") return AnchorChoice::nearest;
  if (text == "union") return AnchorChoice::union_of;
  throw ConfigError("unknown anchor choice '" + text + "'");
}

double RowSelector::operator_norm() const {
  if (indices.empty()) return 0.0;
  if (!weighted()) return 1.0;
  std::map<Index, double> sq;
  for (std::size_t j = 0; j < indices.size(); ++j) sq[indices[j]] += weights[j] * weights[j];
  double best = 0.0;
  for (const auto& [i, v] : sq) best = std::max(best, v);
  return std::sqrt(best);
}

template <class Scalar>
Eigen::VectorXd leverage_scores(const Matrix<Scalar>& q) {
  const Index r = q.cols();
  const Matrix<Scalar> gram = q.adjoint() * q;
  const double err = (gram - Matrix<Scalar>::Identity(r, r)).norm();
  if (!(err <= 1e-8)) {
    throw NumericalError("leverage_scores: input columns are not orthonormal (||Q^H Q - I|| = " +
                         std::to_string(err) + ")");
  }
  return q.rowwise().squaredNorm();
}

namespace {

template <class Scalar>
Matrix<Scalar> augmented(const Matrix<Scalar>& b, const Vector<Scalar>* rhs) {
  if (rhs == nullptr) return b;
  if (rhs->size() != b.rows()) throw DimensionError("select_rows: rhs length does not match B");
  // Skip the rhs when it already lies in range(B); [B b] would be singular.
  const auto qr = linalg::thin_qr<Scalar>(b);
  const Vector<Scalar> resid = *rhs - qr.q * (qr.q.adjoint() * *rhs);
  if (!(resid.norm() > 1e-10 * rhs->norm())) return b;
  Matrix<Scalar> out(b.rows(), b.cols() + 1);
  out << b, *rhs;
  return out;
}

template <class Scalar>
std::vector<Index> arp_pivots(const Matrix<Scalar>& q, Rng& rng) {
  const Index n = q.rows();
  const Index r = q.cols();
  Matrix<Scalar> w = q;
  Eigen::VectorXd norms2 = w.rowwise().squaredNorm();
  const double floor2 = std::pow(1e-14 * std::sqrt(norms2.maxCoeff()), 2);
  std::vector<Index> picks;
  for (Index k = 0; k < r; ++k) {
    for (Index i = 0; i < n; ++i) {
      if (norms2(i) <= floor2) norms2(i) = 0.0;
    }
    if (!(norms2.sum() > 0.0)) {
      throw RankDeficientError("arp: residual vanished after " + std::to_string(k) + " picks", k);
    }
    std::discrete_distribution<Index> dist(norms2.data(), norms2.data() + n);
    const Index pick = dist(rng.engine());
    picks.push_back(pick);
    const Vector<Scalar> v = w.row(pick).adjoint() / Scalar(std::sqrt(norms2(pick)));
    const Vector<Scalar> proj = w * v;
    w.noalias() -= proj * v.adjoint();
    w.row(pick).setZero();
    norms2 = w.rowwise().squaredNorm();
  }
  return picks;
}

}  // namespace

RowSelector full_selector(Index n) {
  RowSelector s;
  s.n = n;
  s.indices.resize(static_cast<std::size_t>(n));
  std::iota(s.indices.begin(), s.indices.end(), Index{0});
  s.strategy = Strategy::full;
  return s;
}

template <class Scalar>
RowSelector select_rows(const Matrix<Scalar>& b, const Vector<Scalar>* rhs,
                        const SelectorConfig& config, Rng& rng) {
  const Index n = b.rows();
  const Index r = b.cols();
  if (r < 1 || n < r) throw DimensionError("select_rows: B must be tall with at least one column");
  if (!(config.oversample >= 1.0)) throw ConfigError("oversample factor must be at least 1");
  RowSelector sel;
  sel.n = n;
  sel.strategy = config.strategy;
  sel.seed = config.seed;
  const Index s = std::min<Index>(
      static_cast<Index>(std::ceil(config.oversample * static_cast<double>(r) - 1e-12)),
      config.strategy == Strategy::random ? n : std::numeric_limits<Index>::max());
  const Vector<Scalar>* use_rhs = config.augment_with_rhs ? rhs : nullptr;

  switch (config.strategy) {
    case Strategy::full:
      return full_selector(n);
    case Strategy::random: {
      std::vector<Index> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), Index{0});
      // Partial Fisher-Yates keeps the draw order.
      for (Index k = 0; k < s; ++k) {
        std::uniform_int_distribution<Index> pick(k, n - 1);
        std::swap(all[k], all[pick(rng.engine())]);
      }
      sel.indices.assign(all.begin(), all.begin() + s);
      break;
    }
    case Strategy::lupp:
      sel.indices = linalg::lupp_row_pivots<Scalar>(augmented(b, use_rhs));
      break;
    case Strategy::cpqr:
      sel.indices = linalg::cpqr_row_pivots<Scalar>(augmented(b, use_rhs));
      break;
    case Strategy::leverage: {
      const auto q = linalg::thin_qr<Scalar>(augmented(b, use_rhs)).q;
      const Eigen::VectorXd scores = leverage_scores<Scalar>(q);
      const double total = scores.sum();
      if (!(total > 0.0)) throw NumericalError("leverage: all scores are zero");
      std::discrete_distribution<Index> dist(scores.data(), scores.data() + n);
      sel.indices.reserve(static_cast<std::size_t>(s));
      sel.weights.reserve(static_cast<std::size_t>(s));
      for (Index k = 0; k < s; ++k) {
        const Index i = dist(rng.engine());
        const double pi = scores(i) / total;
        sel.indices.push_back(i);
        sel.weights.push_back(1.0 / std::sqrt(static_cast<double>(s) * pi));
      }
      break;
    }
    case Strategy::arp: {
      const auto q = linalg::thin_qr<Scalar>(augmented(b, use_rhs)).q;
      sel.indices = arp_pivots<Scalar>(q, rng);
      break;
    }
  }
  return sel;
}

RowSelector merge_selectors(std::span<const RowSelector> selectors) {
  if (selectors.empty()) throw DimensionError("merge_selectors: nothing to merge");
  RowSelector out;
  out.n = selectors[0].n;
  out.strategy = selectors[0].strategy;
  out.seed = selectors[0].seed;
  for (const auto& s : selectors) {
    if (s.weighted()) throw ConfigError("merge_selectors: weighted selectors cannot be merged");
    if (s.n != out.n) throw DimensionError("merge_selectors: selectors over different n");
    out.indices.insert(out.indices.end(), s.indices.begin(), s.indices.end());
    out.anchors.insert(out.anchors.end(), s.anchors.begin(), s.anchors.end());
  }
  std::sort(out.indices.begin(), out.indices.end());
  out.indices.erase(std::unique(out.indices.begin(), out.indices.end()), out.indices.end());
  return out;
}

namespace {

double sort_key(const Parameter& p, bool real) { return real ? p(0).real() : std::abs(p(0)); }

// Snapshot indices sorted along the median key.
std::vector<Index> sorted_points(const std::vector<Parameter>& points) {
  bool real = true;
  for (const auto& p : points) real = real && p(0).imag() == 0.0;
  std::vector<Index> order(points.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return sort_key(points[a], real) < sort_key(points[b], real);
  });
  return order;
}

}  // namespace

Index median_point(const std::vector<Parameter>& points) {
  if (points.empty()) throw DimensionError("median_point: no points");
  const Index d = points[0].size();
  if (d == 1) {
    const auto order = sorted_points(points);
    return order[(order.size() - 1) / 2];
  }
  Parameter med(d);
  for (Index a = 0; a < d; ++a) {
    std::vector<cdouble> v;
    for (const auto& p : points) v.push_back(p(a));
    const bool real = std::all_of(v.begin(), v.end(), [](cdouble z) { return z.imag() == 0.0; });
    std::sort(v.begin(), v.end(), [&](cdouble x, cdouble y) {
      return real ? x.real() < y.real() : std::abs(x) < std::abs(y);
    });
    med(a) = v[(v.size() - 1) / 2];
  }
  return nearest_point(points, med);
}

template <class Scalar>
std::vector<RowSelector> build_selectors(const ParametricSystem<Scalar>& system,
                                         const SnapshotBasis<Scalar>& basis,
                                         const SelectorConfig& config) {
  if (basis.size() != system.size()) throw DimensionError("basis and system sizes differ");
  if (config.strategy == Strategy::full) {
    RowSelector s = full_selector(system.size());
    s.anchors.push_back(basis.points[median_point(basis.points)]);
    return {s};
  }
  Rng rng(config.seed);
  auto at = [&](Index i, std::uint64_t key) {
    const Parameter& p = basis.points[i];
    const Matrix<Scalar> b = apply_block(system, p, basis.q);
    const Vector<Scalar> rhs = system.rhs_vector(p);
    Rng child = rng.split(key);
    RowSelector s = select_rows<Scalar>(b, &rhs, config, child);
    s.anchors = {p};
    return s;
  };
  const Index r = static_cast<Index>(basis.points.size());
  switch (config.anchor) {
    case AnchorChoice::median:
      return {at(median_point(basis.points), 0)};
    case AnchorChoice::nearest: {
      std::vector<RowSelector> out;
      for (Index i = 0; i < r; ++i) out.push_back(at(i, static_cast<std::uint64_t>(i)));
      return out;
    }
    case AnchorChoice::union_of: {
      if (config.strategy == Strategy::leverage) {
        throw ConfigError("union anchors need an unweighted strategy");
      }
      const Index t = std::clamp<Index>(config.union_count, 1, r);
      const auto order = sorted_points(basis.points);
      std::vector<RowSelector> parts;
      for (Index k = 0; k < t; ++k) {
        // Spread the anchors evenly over the sorted points.
        const Index pos = t == 1 ? (r - 1) / 2
                                 : static_cast<Index>(std::llround(static_cast<double>(k) *
                                                                   static_cast<double>(r - 1) /
                                                                   static_cast<double>(t - 1)));
        parts.push_back(at(order[pos], static_cast<std::uint64_t>(k)));
      }
      return {merge_selectors(parts)};
    }
  }
  return {};
}

#define SUBAPSNAP_INSTANTIATE(S)                                                             \
  template Eigen::VectorXd leverage_scores<S>(const Matrix<S>&);                             \
  template RowSelector select_rows<S>(const Matrix<S>&, const Vector<S>*, const SelectorConfig&, \
                                      Rng&);                                                 \
  template std::vector<RowSelector> build_selectors<S>(const ParametricSystem<S>&,           \
                                                       const SnapshotBasis<S>&,              \
                                                       const SelectorConfig&);

SUBAPSNAP_INSTANTIATE(double)
SUBAPSNAP_INSTANTIATE(cdouble)

#undef SUBAPSNAP_INSTANTIATE

}  // namespace subapsnap
