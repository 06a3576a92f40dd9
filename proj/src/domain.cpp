#include "subapsnap/domain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace subapsnap {

Parameter make_parameter(cdouble value) {
  Parameter p(1);
  p(0) = value;
  return p;
}

Parameter make_parameter(std::initializer_list<cdouble> values) {
  Parameter p(static_cast<Index>(values.size()));
  Index i = 0;
  for (const auto& v : values) p(i++) = v;
  return p;
}

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

std::string format_complex(cdouble z) {
  if (z.imag() == 0.0) return shortest(z.real());
  if (z.real() == 0.0) return shortest(z.imag()) + 'i';
  return shortest(z.real()) + (z.imag() < 0 ? "" : "+") + shortest(z.imag()) + 'i';
}

}  // namespace

std::string format_parameter(const Parameter& p) {
  std::string out;
  for (Index i = 0; i < p.size(); ++i) {
    if (i) out += ';';
    out += format_complex(p(i));
  }
  return out;
}

double parameter_distance(const Parameter& a, const Parameter& b) {
  if (a.size() != b.size()) throw DimensionError("parameter dimension mismatch");
  return (a - b).norm();
}

Box::Box(std::vector<cdouble> lo_values, std::vector<cdouble> hi_values)
    : lo(std::move(lo_values)), hi(std::move(hi_values)) {
  if (lo.size() != hi.size()) throw DimensionError("box bounds have different dimensions");
}

cdouble Box::along(Index axis, double t) const {
  return lo[axis] + t * (hi[axis] - lo[axis]);
}

double Box::fraction(Index axis, cdouble z) const {
  const cdouble d = hi[axis] - lo[axis];
  const double len2 = std::norm(d);
  if (len2 == 0.0) return 0.0;
  return std::real((z - lo[axis]) * std::conj(d)) / len2;
}

bool Box::contains(const Parameter& p, double tol) const {
  if (p.size() != dim()) return false;
  for (Index a = 0; a < dim(); ++a) {
    const double scale = std::max({std::abs(lo[a]), std::abs(hi[a]), 1.0});
    const double t = fraction(a, p(a));
    const double len = std::abs(hi[a] - lo[a]);
    const double slack = tol * scale / std::max(len, tol * scale);
    if (t < -slack || t > 1.0 + slack) return false;
    const cdouble proj = along(a, std::clamp(t, 0.0, 1.0));
    if (std::abs(proj - p(a)) > tol * scale) return false;
  }
  return true;
}

Parameter Box::center() const {
  Parameter c(dim());
  for (Index a = 0; a < dim(); ++a) c(a) = along(a, 0.5);
  return c;
}

bool Box::is_real() const {
  for (Index a = 0; a < dim(); ++a) {
    if (lo[a].imag() != 0.0 || hi[a].imag() != 0.0) return false;
  }
  return true;
}

std::string format_box(const Box& box) {
  std::string out;
  for (Index a = 0; a < box.dim(); ++a) {
    if (a) out += ", ";
    out += "[" + format_complex(box.lo[a]) + ", " + format_complex(box.hi[a]) + "]";
  }
  return out;
}

Index nearest_point(const std::vector<Parameter>& points, const Parameter& p) {
  if (points.empty()) throw DimensionError("nearest_point: empty point set");
  Index best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = parameter_distance(points[i], p);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<Index>(i);
    }
  }
  return best;
}

double covering_radius(const Box& box, const std::vector<Parameter>& points) {
  if (points.empty()) throw DimensionError("covering_radius: empty point set");
  if (box.dim() == 1) {
    // Sort the projections; the farthest point of the segment is an endpoint
    // or a midpoint between consecutive projections.
    std::vector<double> t;
    t.reserve(points.size());
    for (const auto& p : points) t.push_back(box.fraction(0, p(0)));
    std::sort(t.begin(), t.end());
    std::vector<double> candidates{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < t.size(); ++i) candidates.push_back(0.5 * (t[i] + t[i + 1]));
    double h = 0.0;
    for (double c : candidates) {
      const Parameter q = make_parameter(box.along(0, std::clamp(c, 0.0, 1.0)));
      h = std::max(h, parameter_distance(q, points[nearest_point(points, q)]));
    }
    return h;
  }
  const Index per_axis = std::max<Index>(
      3, static_cast<Index>(std::ceil(std::pow(20000.0, 1.0 / static_cast<double>(box.dim())))));
  Index total = 1;
  for (Index a = 0; a < box.dim(); ++a) total *= per_axis;
  double h = 0.0;
  Parameter q(box.dim());
  for (Index k = 0; k < total; ++k) {
    Index rem = k;
    for (Index a = 0; a < box.dim(); ++a) {
      const Index j = rem % per_axis;
      rem /= per_axis;
      q(a) = box.along(a, static_cast<double>(j) / static_cast<double>(per_axis - 1));
    }
    h = std::max(h, parameter_distance(q, points[nearest_point(points, q)]));
  }
  return h;
}

}  // namespace subapsnap
