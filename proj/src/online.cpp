#include "subapsnap/online.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "subapsnap/linalg.hpp"

namespace subapsnap {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

template <class Scalar>
OnlinePlan<Scalar> precompute_online(SystemPtr<Scalar> system, BasisPtr<Scalar> basis,
                                     RowSelector selector) {
  if (!system || !basis) throw DimensionError("precompute_online: missing system or basis");
  const Index n = system->size();
  if (basis->size() != n) {
    throw DimensionError("precompute_online: basis has " + std::to_string(basis->size()) +
                         " rows, system has n=" + std::to_string(n));
  }
  if (selector.n != n) throw DimensionError("precompute_online: selector built for another n");
  for (Index i : selector.indices) {
    if (i < 0 || i >= n) throw DimensionError("precompute_online: selector index out of range");
  }
  if (selector.weighted() && selector.weights.size() != selector.indices.size()) {
    throw DimensionError("precompute_online: weights and indices differ in length");
  }

  OnlinePlan<Scalar> plan;
  plan.system = system;
  plan.basis = basis;
  plan.selector = std::move(selector);
  const auto& idx = plan.selector.indices;
  const Matrix<Scalar>& q = basis->q;
  const Index s = plan.selector.size();
  const Index r = q.cols();

  plan.sq.resize(s, r);
  for (Index j = 0; j < s; ++j) plan.sq.row(j) = q.row(idx[j]);
  if (system->output()) plan.output_projection = system->output()->adjoint() * q;

  plan.fallback = !system->is_affine();
  if (plan.fallback) return plan;

  for (const auto& term : system->affine_terms()) {
    Matrix<Scalar> block = Matrix<Scalar>::Zero(s, r);
    for (Index j = 0; j < s; ++j) {
      for (typename SparseRowMatrix<Scalar>::InnerIterator it(term.matrix, idx[j]); it; ++it) {
        block.row(j) += it.value() * q.row(it.col());
      }
    }
    plan.blocks.push_back(std::move(block));
  }

  // Spot check against the row oracle.
  if (s > 0) {
    const Parameter p = system->domain().center();
    const auto f = system->coefficients(p);
    Matrix<Scalar> summed = Matrix<Scalar>::Zero(s, r);
    double scale = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      summed += f[k] * plan.blocks[k];
      scale += std::abs(f[k]) * plan.blocks[k].norm();
    }
    const Matrix<Scalar> direct = rows_times(*system, p, std::span<const Index>(idx), q);
    const double err = (summed - direct).norm();
    if (err > 1e-13 * std::max(scale, std::numeric_limits<double>::min())) {
      throw NumericalError("precompute_online: affine blocks disagree with the row oracle (" +
                           std::to_string(err / scale) + " relative)");
    }
  }
  return plan;
}

template <class Scalar>
Matrix<Scalar> reduced_matrix(const OnlinePlan<Scalar>& plan, const Parameter& p) {
  if (plan.fallback) {
    return rows_times(*plan.system, p, std::span<const Index>(plan.selector.indices), plan.basis->q);
  }
  const auto f = plan.system->coefficients(p);
  Matrix<Scalar> m = f[0] * plan.blocks[0];
  for (std::size_t k = 1; k < f.size(); ++k) m.noalias() += f[k] * plan.blocks[k];
  return m;
}

double interval_epsilon(Index r, Index s) {
  if (r < 1 || s < 1) return 0.0;
  const double rd = static_cast<double>(r);
  return std::clamp(rd * std::log(rd) / static_cast<double>(s), 0.0, 0.99);
}

template <class Scalar>
OnlineSolution<Scalar> solve_online(const OnlinePlan<Scalar>& plan, const Parameter& p,
                                    bool want_interval) {
  const auto& sel = plan.selector;
  const Matrix<Scalar> m = reduced_matrix(plan, p);
  const Vector<Scalar> rhs = assemble_rhs(*plan.system, p, std::span<const Index>(sel.indices));
  const std::span<const double> w(sel.weights);
  OnlineSolution<Scalar> sol;
  sol.p = p;
  try {
    sol.coefficients = linalg::solve_ls<Scalar>(m, rhs, w);
  } catch (const RankDeficientError& e) {
    throw RankDeficientError("solve_online at p=" + format_parameter(p) +
                                 ": sampled matrix S A(p) Q is rank deficient at column " +
                                 std::to_string(e.column()),
                             e.column());
  } catch (const DimensionError& e) {
    throw DimensionError("solve_online at p=" + format_parameter(p) + ": " + e.what());
  }
  Vector<Scalar> res = m * sol.coefficients - rhs;
  if (sel.weighted()) {
    for (Index j = 0; j < res.size(); ++j) res(j) *= sel.weights[j];
  }
  sol.sampled_residual = res.norm();
  if (plan.output_projection) sol.output = (*plan.output_projection * sol.coefficients)(0);
  if (want_interval && sel.weighted()) sol.interval = estimate_residual(plan, sol);
  return sol;
}

template <class Scalar>
Vector<Scalar> lift(const OnlinePlan<Scalar>& plan, const OnlineSolution<Scalar>& solution) {
  return plan.basis->q * solution.coefficients;
}

template <class Scalar>
ResidualEstimate estimate_residual(const OnlinePlan<Scalar>& plan,
                                   const OnlineSolution<Scalar>& solution) {
  if (!plan.selector.weighted()) {
    throw ConfigError(
        "residual estimation needs a sampling selector with weights; interpolating selectors "
        "fit the sampled rows exactly");
  }
  ResidualEstimate est;
  est.estimate = solution.sampled_residual;
  est.eps = interval_epsilon(plan.rank(), plan.selector.size());
  est.lower = est.estimate / (1.0 + est.eps);
  est.upper = est.estimate / (1.0 - est.eps);
  return est;
}

template <class Scalar>
ApSnapSolution<Scalar> solve_apsnap(const ParametricSystem<Scalar>& system,
                                    const SnapshotBasis<Scalar>& basis, const Parameter& p) {
  const Matrix<Scalar> b = apply_block(system, p, basis.q);
  const Vector<Scalar> rhs = system.rhs_vector(p);
  ApSnapSolution<Scalar> out;
  try {
    out.coefficients = linalg::solve_ls<Scalar>(b, rhs);
  } catch (const RankDeficientError& e) {
    throw RankDeficientError("solve_apsnap at p=" + format_parameter(p) + ": " + e.what(),
                             e.column());
  }
  out.residual = (b * out.coefficients - rhs).norm();
  out.rhs_norm = rhs.norm();
  return out;
}

template <class Scalar>
const OnlinePlan<Scalar>& PlanSet<Scalar>::for_point(const Parameter& p) const {
  if (plans.empty()) throw DimensionError("empty plan set");
  if (plans.size() == 1) return plans[0];
  return plans[nearest_point(anchors, p)];
}

template <class Scalar>
PlanSet<Scalar> precompute_plans(SystemPtr<Scalar> system, BasisPtr<Scalar> basis,
                                 std::vector<RowSelector> selectors) {
  PlanSet<Scalar> set;
  for (auto& sel : selectors) {
    if (sel.anchors.empty()) throw DimensionError("precompute_plans: selector without anchor");
    set.anchors.push_back(sel.anchors.front());
    set.plans.push_back(precompute_online(system, basis, std::move(sel)));
  }
  return set;
}

template <class Scalar>
BatchResult<Scalar> solve_batch(const PlanSet<Scalar>& plans, const std::vector<Parameter>& points,
                                const BatchOptions& options) {
  const std::size_t count = points.size();
  BatchResult<Scalar> out;
  out.points = points;
  out.coefficients.resize(count);
  out.sampled_residual.assign(count, std::numeric_limits<double>::quiet_NaN());
  out.lower.assign(count, std::numeric_limits<double>::quiet_NaN());
  out.upper.assign(count, std::numeric_limits<double>::quiet_NaN());
  out.output.resize(count);
  out.wall_time.assign(count, 0.0);
  out.error.resize(count);

  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(count)));
  std::vector<double> busy(static_cast<std::size_t>(workers), 0.0);
  auto work = [&](int id) {
    const auto start = Clock::now();
    for (std::size_t i = next++; i < count; i = next++) {
      const auto t0 = Clock::now();
      try {
        auto sol = solve_online(plans.for_point(points[i]), points[i], options.want_interval);
        out.coefficients[i] = std::move(sol.coefficients);
        out.sampled_residual[i] = sol.sampled_residual;
        if (sol.interval) {
          out.lower[i] = sol.interval->lower;
          out.upper[i] = sol.interval->upper;
        }
        out.output[i] = sol.output;
      } catch (const Error& e) {
        out.error[i] = e.what();
      }
      out.wall_time[i] = seconds_since(t0);
    }
    busy[id] = seconds_since(start);
  };
  const auto t0 = Clock::now();
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  out.elapsed = seconds_since(t0);
  for (double b : busy) out.busy_time += b;
  return out;
}

#define SUBAPSNAP_INSTANTIATE(S)                                                                 \
  template struct PlanSet<S>;                                                                    \
  template OnlinePlan<S> precompute_online<S>(SystemPtr<S>, BasisPtr<S>, RowSelector);           \
  template Matrix<S> reduced_matrix<S>(const OnlinePlan<S>&, const Parameter&);                  \
  template OnlineSolution<S> solve_online<S>(const OnlinePlan<S>&, const Parameter&, bool);      \
  template Vector<S> lift<S>(const OnlinePlan<S>&, const OnlineSolution<S>&);                    \
  template ResidualEstimate estimate_residual<S>(const OnlinePlan<S>&, const OnlineSolution<S>&); \
  template ApSnapSolution<S> solve_apsnap<S>(const ParametricSystem<S>&, const SnapshotBasis<S>&, \
                                             const Parameter&);                                  \
  template PlanSet<S> precompute_plans<S>(SystemPtr<S>, BasisPtr<S>, std::vector<RowSelector>);  \
  template BatchResult<S> solve_batch<S>(const PlanSet<S>&, const std::vector<Parameter>&,       \
                                         const BatchOptions&);

SUBAPSNAP_INSTANTIATE(double)
SUBAPSNAP_INSTANTIATE(cdouble)

#undef SUBAPSNAP_INSTANTIATE

}  // namespace subapsnap
