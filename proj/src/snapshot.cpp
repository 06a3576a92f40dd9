#include "subapsnap/snapshot.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "subapsnap/linalg.hpp"

namespace subapsnap {

std::string to_string(BasisMode mode) {
  switch (mode) {
    case BasisMode::qr:
      return "qr";
    case BasisMode::pod:
      return "pod";
    case BasisMode::none:
      return "none";
  }
  return "?";
}

std::string to_string(PointLayout layout) {
  switch (layout) {
    case PointLayout::equispaced:
      return "equispaced";
    case PointLayout::log_spaced:
      return "log-spaced";
    case PointLayout::chebyshev:
      return "chebyshev";
  }
  return "?";
}

BasisMode parse_basis_mode(const std::string& text) {
  if (text == "qr") return BasisMode::qr;
  if (text == "pod") return BasisMode::pod;
  if (text == "none") return BasisMode::none;
  throw ConfigError("unknown basis mode '" + text + "' (expected qr, pod or none)");
}

PointLayout parse_point_layout(const std::string& text) {
  if (text == "equispaced") return PointLayout::equispaced;
  if (text == "log-spaced" || text == "log") return PointLayout::log_spaced;
  if (text == "chebyshev") return PointLayout::chebyshev;
  throw ConfigError("unknown point layout '" + text + "'");
}

std::vector<cdouble> axis_points(cdouble lo, cdouble hi, Index count, PointLayout layout) {
  if (count < 1) throw ConfigError("need at least one point per axis");
  std::vector<cdouble> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    if (layout == PointLayout::log_spaced) {
      out.push_back(std::sqrt(lo * hi));
    } else {
      out.push_back(0.5 * (lo + hi));
    }
    return out;
  }
  const double last = static_cast<double>(count - 1);
  switch (layout) {
    case PointLayout::equispaced:
      for (Index k = 0; k < count; ++k) out.push_back(lo + (static_cast<double>(k) / last) * (hi - lo));
      break;
    case PointLayout::chebyshev:
      for (Index k = 0; k < count; ++k) {
        const double t = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) / last));
        out.push_back(lo + t * (hi - lo));
      }
      break;
    case PointLayout::log_spaced: {
      // Both endpoints on the same ray from the origin: positive reals or
      // the positive imaginary axis.
      cdouble dir;
      if (lo.imag() == 0.0 && hi.imag() == 0.0 && lo.real() > 0.0 && hi.real() > 0.0) {
        dir = 1.0;
      } else if (lo.real() == 0.0 && hi.real() == 0.0 && lo.imag() > 0.0 && hi.imag() > 0.0) {
        dir = cdouble(0.0, 1.0);
      } else {
        throw ConfigError("log-spaced points need strictly positive or positive imaginary endpoints");
      }
      const double a = std::log(std::abs(lo));
      const double b = std::log(std::abs(hi));
      for (Index k = 0; k < count; ++k) {
        double v = std::exp(a + (static_cast<double>(k) / last) * (b - a));
        if (k == 0) v = std::abs(lo);
        if (k == count - 1) v = std::abs(hi);
        out.push_back(dir * v);
      }
      break;
    }
  }
  return out;
}

std::vector<Parameter> default_snapshot_points(const Box& domain, Index r,
                                               const std::vector<PointLayout>& per_axis) {
  const Index d = domain.dim();
  if (d == 0) throw ConfigError("empty domain");
  if (r < 1) throw ConfigError("need at least one snapshot point");
  if (static_cast<Index>(per_axis.size()) != d) {
    throw ConfigError("expected " + std::to_string(d) + " axis layouts, got " +
                      std::to_string(per_axis.size()));
  }
  Index m = r;
  if (d > 1) {
    m = static_cast<Index>(std::ceil(std::pow(static_cast<double>(r), 1.0 / static_cast<double>(d)) - 1e-9));
  }
  std::vector<std::vector<cdouble>> axes;
  for (Index a = 0; a < d; ++a) axes.push_back(axis_points(domain.lo[a], domain.hi[a], m, per_axis[a]));
  Index total = 1;
  for (Index a = 0; a < d; ++a) total *= m;
  std::vector<Parameter> out;
  out.reserve(static_cast<std::size_t>(total));
  // First axis varies slowest.
  for (Index k = 0; k < total; ++k) {
    Parameter p(d);
    Index rem = k;
    for (Index a = d - 1; a >= 0; --a) {
      p(a) = axes[a][rem % m];
      rem /= m;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Parameter> default_snapshot_points(const Box& domain, Index r, PointLayout layout) {
  return default_snapshot_points(domain, r, std::vector<PointLayout>(domain.dim(), layout));
}

template <class Scalar>
SnapshotBasis<Scalar> basis_from_snapshots(std::vector<Parameter> points, Matrix<Scalar> raw,
                                           const SnapshotOptions& options) {
  if (raw.cols() != static_cast<Index>(points.size())) {
    throw DimensionError("snapshot matrix has " + std::to_string(raw.cols()) + " columns for " +
                         std::to_string(points.size()) + " points");
  }
  if (raw.cols() > raw.rows()) throw DimensionError("more snapshot points than unknowns");
  SnapshotBasis<Scalar> basis;
  basis.points = std::move(points);
  basis.mode = options.mode;
  basis.pod_tol = options.pod_tol;
  switch (options.mode) {
    case BasisMode::qr: {
      auto qr = linalg::thin_qr<Scalar>(raw);
      basis.singular_values = linalg::singular_values<Scalar>(qr.r);
      basis.q = std::move(qr.q);
      break;
    }
    case BasisMode::pod: {
      auto svd = linalg::thin_svd<Scalar>(raw);
      basis.singular_values = svd.singular_values;
      const double s1 = svd.singular_values.size() ? svd.singular_values(0) : 0.0;
      Index keep = 0;
      while (keep < svd.singular_values.size() && svd.singular_values(keep) > options.pod_tol * s1) {
        ++keep;
      }
      if (keep == 0) throw RankDeficientError("pod: snapshot matrix is zero", 0);
      basis.q = svd.left.leftCols(keep);
      break;
    }
    case BasisMode::none:
      basis.singular_values = linalg::singular_values<Scalar>(raw);
      basis.q = raw;
      break;
  }
  if (options.keep_raw) basis.raw = std::move(raw);
  return basis;
}

template <class Scalar>
SnapshotBasis<Scalar> build_snapshot(const ParametricSystem<Scalar>& system,
                                     std::vector<Parameter> points, const SnapshotOptions& options) {
  const Index r = static_cast<Index>(points.size());
  if (r < 1) throw ConfigError("need at least one snapshot point");
  if (r > system.size()) throw DimensionError("more snapshot points than unknowns");
  for (Index i = 0; i < r; ++i) {
    if (!system.domain().contains(points[i], 1e-9)) {
      throw ConfigError("snapshot point " + format_parameter(points[i]) + " lies outside " +
                        format_box(system.domain()));
    }
    for (Index j = 0; j < i; ++j) {
      if (parameter_distance(points[i], points[j]) == 0.0) {
        throw ConfigError("duplicate snapshot point " + format_parameter(points[i]));
      }
    }
  }
  Matrix<Scalar> raw(system.size(), r);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(r));
  std::atomic<Index> next{0};
  auto work = [&] {
    for (Index i = next++; i < r; i = next++) {
      try {
        raw.col(i) = full_solve(system, points[i], options.solve);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(r)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (Index i = 0; i < r; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const SolveError&) {
      throw;
    } catch (const std::exception& e) {
      throw SolveError("snapshot solve at p=" + format_parameter(points[i]) + " failed: " + e.what());
    }
  }
  return basis_from_snapshots<Scalar>(std::move(points), std::move(raw), options);
}

template SnapshotBasis<double> basis_from_snapshots<double>(std::vector<Parameter>, Matrix<double>,
                                                            const SnapshotOptions&);
template SnapshotBasis<cdouble> basis_from_snapshots<cdouble>(std::vector<Parameter>, Matrix<cdouble>,
                                                              const SnapshotOptions&);
template SnapshotBasis<double> build_snapshot<double>(const ParametricSystem<double>&,
                                                      std::vector<Parameter>, const SnapshotOptions&);
template SnapshotBasis<cdouble> build_snapshot<cdouble>(const ParametricSystem<cdouble>&,
                                                        std::vector<Parameter>, const SnapshotOptions&);

}  // namespace subapsnap
