#include "subapsnap/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "subapsnap/linalg.hpp"
#include "subapsnap/rng.hpp"

namespace subapsnap {

template <class Scalar>
double sampled_sigma_min(const Matrix<Scalar>& m, const RowSelector& selector) {
  const Matrix<Scalar> sm = selector.apply(m);
  if (sm.rows() < sm.cols() || sm.cols() == 0) return 0.0;
  const Eigen::VectorXd sv = linalg::singular_values<Scalar>(sm);
  return sv(sv.size() - 1);
}

template <class Scalar>
LemmaBounds lemma_bounds(const Matrix<Scalar>& b, const Vector<Scalar>& rhs,
                         const RowSelector& selector) {
  LemmaBounds out;
  const double s_norm = selector.operator_norm();
  try {
    const auto u = linalg::polar_unitary<Scalar>(b).unitary;
    const double sigma = sampled_sigma_min(u, selector);
    if (sigma > 1e-14 * s_norm) {
      out.bound_a = s_norm / sigma;
      out.a_applicable = true;
    }
  } catch (const RankDeficientError&) {
  }
  try {
    Matrix<Scalar> bb(b.rows(), b.cols() + 1);
    bb << b, rhs;
    const auto ut = linalg::polar_unitary<Scalar>(bb).unitary;
    const Matrix<Scalar> su = selector.apply(ut);
    if (su.rows() >= su.cols()) {
      const Eigen::VectorXd sv = linalg::singular_values<Scalar>(su);
      const double lo = sv(sv.size() - 1);
      if (lo > 1e-14 * sv(0)) {
        out.bound_ab = sv(0) / lo;
        out.ab_applicable = true;
      }
    }
  } catch (const RankDeficientError&) {
  }
  return out;
}

template <class Scalar>
ResidualRatio residual_ratio(const Matrix<Scalar>& b, const Vector<Scalar>& rhs,
                             const RowSelector& selector, double floor) {
  ResidualRatio out;
  const Vector<Scalar> c = linalg::solve_ls<Scalar>(b, rhs);
  const Vector<Scalar> chat = linalg::solve_ls<Scalar>(
      selector.apply(b), selector.apply(rhs).eval(), std::span<const double>());
  out.apsnap = (b * c - rhs).norm();
  out.subapsnap = (b * chat - rhs).norm();
  out.rhs_norm = rhs.norm();
  out.defined = out.apsnap > floor * out.rhs_norm && out.apsnap > 1e-300;
  out.ratio = out.defined ? out.subapsnap / out.apsnap : infinity;
  return out;
}

namespace {

PerturbationBound make_bound(double sigma_su, double sigma_aq, double delta, double s_norm) {
  PerturbationBound out;
  out.sigma_su = sigma_su;
  out.delta = delta;
  out.c = sigma_aq > 0.0 ? 3.0 / sigma_aq : infinity;
  const double denom = sigma_su - out.c * s_norm * delta;
  if (std::isfinite(out.c) && denom > 0.0) {
    out.value = s_norm / denom;
    out.applicable = true;
  }
  return out;
}

template <class Scalar>
std::pair<double, double> snapshot_sigmas(const ParametricSystem<Scalar>& system,
                                          const SnapshotBasis<Scalar>& basis,
                                          const RowSelector& selector, const Parameter& p) {
  const Matrix<Scalar> b = apply_block(system, p, basis.q);
  const Eigen::VectorXd sv = linalg::singular_values<Scalar>(b);
  const double sigma_aq = sv(sv.size() - 1);
  double sigma_su = 0.0;
  try {
    sigma_su = sampled_sigma_min(linalg::polar_unitary<Scalar>(b).unitary, selector);
  } catch (const RankDeficientError&) {
  }
  return {sigma_aq, sigma_su};
}

}  // namespace

template <class Scalar>
PerturbationBound theorem_bound(const ParametricSystem<Scalar>& system,
                                const SnapshotBasis<Scalar>& basis, const RowSelector& selector,
                                const Parameter& p0, const Parameter& p,
                                std::optional<double> delta) {
  const auto [sigma_aq, sigma_su] = snapshot_sigmas(system, basis, selector, p0);
  const double d = delta ? *delta : difference_norm(system, p, p0);
  return make_bound(sigma_su, sigma_aq, d, selector.operator_norm());
}

template <class Scalar>
CorollaryBounds corollary_bounds(const ParametricSystem<Scalar>& system,
                                 const SnapshotBasis<Scalar>& basis, const RowSelector& selector,
                                 const Parameter& p, double lipschitz, std::optional<double> h) {
  if (!(lipschitz >= 0.0)) throw ConfigError("Lipschitz constant must be nonnegative");
  CorollaryBounds out;
  out.h = h ? *h : covering_radius(system.domain(), basis.points);
  out.nearest = nearest_point(basis.points, p);
  double min_aq = infinity;
  double min_su = infinity;
  double near_aq = 0.0;
  double near_su = 0.0;
  for (std::size_t i = 0; i < basis.points.size(); ++i) {
    const auto [aq, su] = snapshot_sigmas(system, basis, selector, basis.points[i]);
    min_aq = std::min(min_aq, aq);
    min_su = std::min(min_su, su);
    if (static_cast<Index>(i) == out.nearest) {
      near_aq = aq;
      near_su = su;
    }
  }
  const double s_norm = selector.operator_norm();
  const double dist = parameter_distance(p, basis.points[out.nearest]);
  out.closest = make_bound(near_su, near_aq, lipschitz * dist, s_norm);
  out.global = make_bound(min_su, min_aq, lipschitz * out.h, s_norm);
  return out;
}

template <class Scalar>
double spectral_norm(const SparseRowMatrix<Scalar>& a, int iterations) {
  const Index n = a.cols();
  if (a.nonZeros() == 0) return 0.0;
  if (n <= 200 && a.rows() <= 200) {
    const Matrix<Scalar> d(a);
    return Eigen::JacobiSVD<Matrix<Scalar>>(d).singularValues()(0);
  }
  Rng rng(0x5eed);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) v(i) = Scalar(rng.normal());
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vector<Scalar> w = a * v;
    const double prev = est;
    est = w.norm();
    const Vector<Scalar> z = a.adjoint() * w;
    const double zn = z.norm();
    if (zn == 0.0) break;
    v = z / zn;
    if (it > 5 && std::abs(est - prev) <= 1e-13 * est) break;
  }
  return std::max(est, (a * v).norm());
}

template <class Scalar>
LipschitzEstimate estimate_lipschitz(const ParametricSystem<Scalar>& system,
                                     const std::vector<Parameter>& probes) {
  if (probes.size() < 2) throw ConfigError("estimate_lipschitz needs at least two probe points");
  for (std::size_t j = 0; j + 1 < probes.size(); ++j) {
    if (parameter_distance(probes[j], probes[j + 1]) == 0.0) {
      throw ConfigError("estimate_lipschitz: identical consecutive probe points");
    }
  }
  LipschitzEstimate out;
  out.pairs = static_cast<Index>(probes.size() - 1);

  if (system.is_affine() && system.parameter_dim() == 1) {
    const auto& terms = system.affine_terms();
    std::vector<std::vector<Scalar>> f;
    for (const auto& p : probes) f.push_back(system.coefficients(p));
    Index varying = -1;
    bool linear = true;
    Scalar slope(0);
    for (std::size_t k = 0; k < terms.size(); ++k) {
      bool constant = true;
      for (std::size_t j = 1; j < probes.size(); ++j) {
        if (std::abs(f[j][k] - f[0][k]) > 1e-14 * (1.0 + std::abs(f[0][k]))) constant = false;
      }
      if (constant) continue;
      if (varying >= 0) {
        linear = false;
        break;
      }
      varying = static_cast<Index>(k);
      const Scalar dp = from_complex<Scalar>(probes[1](0) - probes[0](0));
      slope = (f[1][k] - f[0][k]) / dp;
      for (std::size_t j = 2; j < probes.size(); ++j) {
        const Scalar pred = f[0][k] + slope * from_complex<Scalar>(probes[j](0) - probes[0](0));
        if (std::abs(pred - f[j][k]) > 1e-12 * (std::abs(f[j][k]) + std::abs(f[0][k]) + 1.0)) {
          linear = false;
        }
      }
    }
    if (linear) {
      out.method = "affine-exact";
      out.value = varying < 0 ? 0.0 : std::abs(slope) * spectral_norm(terms[varying].matrix);
      return out;
    }
  }
  out.method = "difference-quotient";
  for (std::size_t j = 0; j + 1 < probes.size(); ++j) {
    const double d = difference_norm(system, probes[j + 1], probes[j]);
    out.value = std::max(out.value, d / parameter_distance(probes[j], probes[j + 1]));
  }
  return out;
}

std::string BoundReport::flags() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(ratio.defined, "ratio");
  add(lemma.a_applicable, "A");
  add(lemma.ab_applicable, "Ab");
  add(theorem && theorem->applicable, "thm");
  add(cor_closest && cor_closest->applicable, "cor_closest");
  add(cor_global && cor_global->applicable, "cor_global");
  return out;
}

template <class Scalar>
BoundContext<Scalar>::BoundContext(SystemPtr<Scalar> system, BasisPtr<Scalar> basis,
                                   RowSelector selector, Options options)
    : system_(std::move(system)),
      basis_(std::move(basis)),
      selector_(std::move(selector)),
      options_(std::move(options)) {
  s_norm_ = selector_.operator_norm();
  h_ = subapsnap::covering_radius(system_->domain(), basis_->points);
  for (const auto& p : basis_->points) {
    const auto [aq, su] = snapshot_sigmas(*system_, *basis_, selector_, p);
    sigma_aq_.push_back(aq);
    sigma_su_.push_back(su);
  }
  if (options_.p0) {
    p0_ = *options_.p0;
  } else if (!selector_.anchors.empty()) {
    p0_ = selector_.anchors.front();
  } else {
    p0_ = basis_->points[median_point(basis_->points)];
  }
  const auto [aq, su] = snapshot_sigmas(*system_, *basis_, selector_, p0_);
  p0_sigma_aq_ = aq;
  p0_sigma_su_ = su;
}

template <class Scalar>
PerturbationBound BoundContext<Scalar>::perturbation(double sigma_su, double sigma_aq,
                                                     double delta) const {
  return make_bound(sigma_su, sigma_aq, delta, s_norm_);
}

template <class Scalar>
BoundReport BoundContext<Scalar>::evaluate(const Parameter& p) const {
  BoundReport rep;
  rep.p = p;
  const Matrix<Scalar> b = apply_block(*system_, p, basis_->q);
  const Vector<Scalar> rhs = system_->rhs_vector(p);
  rep.ratio = residual_ratio(b, rhs, selector_, options_.rounding_floor);
  rep.lemma = lemma_bounds(b, rhs, selector_);
  if (options_.theorem) {
    rep.theorem = perturbation(p0_sigma_su_, p0_sigma_aq_, difference_norm(*system_, p, p0_));
  }
  if (options_.lipschitz) {
    const double lip = *options_.lipschitz;
    const Index i = nearest_point(basis_->points, p);
    rep.cor_closest = perturbation(sigma_su_[i], sigma_aq_[i],
                                   lip * parameter_distance(p, basis_->points[i]));
    rep.cor_global = perturbation(*std::min_element(sigma_su_.begin(), sigma_su_.end()),
                                  *std::min_element(sigma_aq_.begin(), sigma_aq_.end()), lip * h_);
  }
  return rep;
}

#define SUBAPSNAP_INSTANTIATE(S)                                                                 \
  template double sampled_sigma_min<S>(const Matrix<S>&, const RowSelector&);                    \
  template LemmaBounds lemma_bounds<S>(const Matrix<S>&, const Vector<S>&, const RowSelector&);  \
  template ResidualRatio residual_ratio<S>(const Matrix<S>&, const Vector<S>&,                   \
                                           const RowSelector&, double);                          \
  template PerturbationBound theorem_bound<S>(const ParametricSystem<S>&, const SnapshotBasis<S>&, \
                                              const RowSelector&, const Parameter&,              \
                                              const Parameter&, std::optional<double>);          \
  template CorollaryBounds corollary_bounds<S>(const ParametricSystem<S>&,                       \
                                               const SnapshotBasis<S>&, const RowSelector&,      \
                                               const Parameter&, double, std::optional<double>); \
  template LipschitzEstimate estimate_lipschitz<S>(const ParametricSystem<S>&,                   \
                                                   const std::vector<Parameter>&);               \
  template double spectral_norm<S>(const SparseRowMatrix<S>&, int);                              \
  template class BoundContext<S>;

SUBAPSNAP_INSTANTIATE(double)
SUBAPSNAP_INSTANTIATE(cdouble)

#undef SUBAPSNAP_INSTANTIATE

}  // namespace subapsnap
