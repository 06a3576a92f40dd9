#pragma once

#include <string>
#include <vector>

#include "subapsnap/types.hpp"

namespace subapsnap {

/// Parameter domain as a product of segments in the complex plane. A real
/// interval [a, b] is the segment from a to b; a frequency band i[1, 1e6]
/// is the segment from 1i to 1e6i.
struct Box {
  std::vector<cdouble> lo;
  std::vector<cdouble> hi;

  Box() = default;
  Box(cdouble lo_value, cdouble hi_value) : lo{lo_value}, hi{hi_value} {}
  Box(std::vector<cdouble> lo_values, std::vector<cdouble> hi_values);

  Index dim() const { return static_cast<Index>(lo.size()); }
  bool empty() const { return lo.empty(); }

  /// Point at fraction t in [0, 1] along the given axis.
  cdouble along(Index axis, double t) const;

  /// Fraction of the projection of z onto the axis segment.
  double fraction(Index axis, cdouble z) const;

  bool contains(const Parameter& p, double tol = 1e-12) const;
  Parameter center() const;
  bool is_real() const;
};

std::string format_box(const Box& box);

/// Largest distance from a point of the box to the nearest of `points`.
/// Exact for one-dimensional boxes; estimated on a dense tensor grid
/// otherwise.
double covering_radius(const Box& box, const std::vector<Parameter>& points);

/// Index of the point in `points` closest to p (first on ties).
Index nearest_point(const std::vector<Parameter>& points, const Parameter& p);

}  // namespace subapsnap
