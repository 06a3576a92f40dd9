#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace subapsnap {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  bool log_y = true;
  std::vector<Series> series;
};

/// SVG text. Points that cannot be drawn (nonpositive on a log axis,
/// non-finite) split the polyline. A series with one drawable point is
/// drawn as a marker.
std::string render_line_plot(const LinePlot& plot);

struct Bar {
  std::string label;
  double value = 0.0;
};

std::string render_bar_chart(const std::string& title, const std::string& ylabel,
                             const std::vector<Bar>& bars);

/// Reads results.csv (plus singular_values.csv and timing.csv next to it,
/// when present) and writes residual.svg, singular_values.svg, timing.svg.
/// Returns the files written. Throws ConfigError on an empty result set.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& results_csv,
                                              const std::filesystem::path& out_dir);

}  // namespace subapsnap
