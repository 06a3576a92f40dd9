#include "subapsnap/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "subapsnap/config.hpp"
#include "subapsnap/csv.hpp"
#include "subapsnap/types.hpp"

namespace subapsnap {

namespace {

constexpr double width = 760;
constexpr double height = 460;
constexpr double left = 84;
constexpr double right = 200;
constexpr double top = 44;
constexpr double bottom = 64;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Axis {
  double lo = 0;
  double hi = 1;
  bool log = false;
  std::vector<double> ticks;

  double unit(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
};

Axis make_axis(std::vector<double> values, bool log) {
  Axis ax;
  ax.log = log;
  if (values.empty()) values = log ? std::vector<double>{1.0, 10.0} : std::vector<double>{0.0, 1.0};
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (log) {
    lo = std::floor(std::log10(lo));
    hi = std::ceil(std::log10(hi));
    if (hi <= lo) hi = lo + 1;
    const int decades = static_cast<int>(hi - lo);
    const int step = std::max(1, (decades + 7) / 8);
    for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += step) {
      ax.ticks.push_back(std::pow(10.0, e));
    }
  } else {
    if (hi <= lo) {
      const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    }
    lo = std::floor(lo / step) * step;
    hi = std::ceil(hi / step) * step;
    for (double t = lo; t <= hi + 0.5 * step; t += step) ax.ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  ax.lo = lo;
  ax.hi = hi;
  return ax;
}

bool drawable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
     << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height)
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(left + (width - left - right) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-size=\"15\">" << escape(title) << "</text>\n";
}

}  // namespace

std::string render_line_plot(const LinePlot& plot) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : plot.series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (drawable(s.x[k], plot.log_x) && drawable(s.y[k], plot.log_y)) {
        xs.push_back(s.x[k]);
        ys.push_back(s.y[k]);
      }
    }
  }
  const Axis ax = make_axis(xs, plot.log_x);
  const Axis ay = make_axis(ys, plot.log_y);
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](double v) { return left + ax.unit(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.unit(v)) * ph; };

  std::ostringstream os;
  header(os, plot.title);
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
     << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks) {
    os << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(t))
       << "\" y2=\"" << fmt(top + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(top + ph + 19)
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ay.ticks) {
    os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << fmt(left + pw)
       << "\" y2=\"" << fmt(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(t) + 4)
       << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(height - 18)
     << "\" text-anchor=\"middle\">" << escape(plot.xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << fmt(top + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.ylabel) << "</text>\n";

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = palette[si % std::size(palette)];
    std::vector<std::vector<std::pair<double, double>>> runs(1);
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (drawable(s.x[k], plot.log_x) && drawable(s.y[k], plot.log_y)) {
        runs.back().emplace_back(px(s.x[k]), py(s.y[k]));
      } else if (!runs.back().empty()) {
        runs.emplace_back();
      }
    }
    for (const auto& run : runs) {
      if (run.size() == 1) {
        os << "<circle cx=\"" << fmt(run[0].first) << "\" cy=\"" << fmt(run[0].second)
           << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      } else if (run.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s.dashed) os << " stroke-dasharray=\"5,3\"";
        os << " points=\"";
        for (std::size_t k = 0; k < run.size(); ++k) {
          if (k) os << ' ';
          os << fmt(run[k].first) << ',' << fmt(run[k].second);
        }
        os << "\"/>\n";
      }
    }
    const double ly = top + 12 + 20 * static_cast<double>(si);
    const double lx = left + pw + 14;
    os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 24)
       << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"5,3\"";
    os << "/>\n";
    os << "<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_bar_chart(const std::string& title, const std::string& ylabel,
                             const std::vector<Bar>& bars) {
  std::vector<double> vals{0.0};
  for (const auto& b : bars) {
    if (std::isfinite(b.value)) vals.push_back(b.value);
  }
  const Axis ay = make_axis(vals, false);
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto py = [&](double v) { return top + (1.0 - ay.unit(v)) * ph; };

  std::ostringstream os;
  header(os, title);
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
     << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ay.ticks) {
    os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << fmt(left + pw)
       << "\" y2=\"" << fmt(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(t) + 4)
       << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text transform=\"translate(18," << fmt(top + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
  const double slot = bars.empty() ? pw : pw / static_cast<double>(bars.size());
  for (std::size_t k = 0; k < bars.size(); ++k) {
    const double v = std::isfinite(bars[k].value) ? std::max(bars[k].value, 0.0) : 0.0;
    const double x = left + slot * (static_cast<double>(k) + 0.15);
    os << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(py(v)) << "\" width=\"" << fmt(slot * 0.7)
       << "\" height=\"" << fmt(py(0.0) - py(v)) << "\" fill=\"" << palette[k % std::size(palette)]
       << "\"/>\n";
    os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << fmt(top + ph + 19)
       << "\" text-anchor=\"middle\">" << escape(bars[k].label) << "</text>\n";
    os << "<text x=\"" << fmt(x + slot * 0.35) << "\" y=\"" << fmt(py(v) - 4)
       << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(bars[k].value) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// x coordinate of a one-parameter point: the imaginary part for frequency
// sweeps, the real part otherwise.
std::vector<double> sweep_axis(const std::vector<std::string>& ps, bool& imaginary, bool& multi) {
  std::vector<cdouble> zs;
  multi = false;
  for (const auto& p : ps) {
    if (p.find(';') != std::string::npos) multi = true;
    zs.push_back(multi ? cdouble() : parse_complex(p));
  }
  std::vector<double> x;
  if (multi) {
    for (std::size_t k = 0; k < ps.size(); ++k) x.push_back(static_cast<double>(k));
    return x;
  }
  imaginary = std::all_of(zs.begin(), zs.end(), [](cdouble z) { return z.real() == 0.0 && z.imag() != 0.0; });
  for (auto z : zs) x.push_back(imaginary ? z.imag() : z.real());
  return x;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& results_csv,
                                              const std::filesystem::path& out_dir) {
  std::ifstream in(results_csv, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + results_csv.string() + "'");
  const auto rows = read_results(in);
  if (rows.empty()) throw ConfigError("empty result set in '" + results_csv.string() + "'");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  // Group rows by method, keeping first-seen order.
  std::vector<std::string> methods;
  std::map<std::string, std::vector<const ResultRow*>> by_method;
  for (const auto& r : rows) {
    if (!by_method.count(r.method)) methods.push_back(r.method);
    by_method[r.method].push_back(&r);
  }

  LinePlot plot;
  plot.title = "Relative residual over the test sweep";
  plot.ylabel = "||A(p)x - b(p)|| / ||b(p)||";
  const ResultRow* const* apsnap = nullptr;
  std::size_t apsnap_count = 0;
  if (by_method.count("apsnap")) {
    apsnap = by_method["apsnap"].data();
    apsnap_count = by_method["apsnap"].size();
  }
  for (const auto& m : methods) {
    const auto& group = by_method[m];
    std::vector<std::string> ps;
    for (auto* r : group) ps.push_back(r->p);
    bool imaginary = false;
    bool multi = false;
    const auto x = sweep_axis(ps, imaginary, multi);
    plot.xlabel = multi ? "test point index" : imaginary ? "Im p" : "p";
    const bool positive = std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0; });
    if (!multi && positive && x.size() > 1) {
      const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
      plot.log_x = *hi / *lo > 100.0;
    }
    Series s{m, x, {}, false};
    for (auto* r : group) s.y.push_back(r->relative_residual);
    plot.series.push_back(s);

    const bool has_interval = std::any_of(group.begin(), group.end(), [](auto* r) { return r->est_lower.has_value(); });
    if (has_interval) {
      Series lo{m + " est. lower", x, {}, true};
      Series hi{m + " est. upper", x, {}, true};
      for (auto* r : group) {
        lo.y.push_back(r->est_lower.value_or(std::nan("")));
        hi.y.push_back(r->est_upper.value_or(std::nan("")));
      }
      plot.series.push_back(lo);
      plot.series.push_back(hi);
    }

    const bool has_bounds = std::any_of(group.begin(), group.end(), [](auto* r) { return r->cor_closest.has_value(); });
    if (has_bounds && apsnap && apsnap_count == group.size()) {
      Series closest{"bound (nearest snapshot) x apsnap", x, {}, true};
      Series global{"bound (covering radius) x apsnap", x, {}, true};
      for (std::size_t k = 0; k < group.size(); ++k) {
        const double base = apsnap[k]->relative_residual;
        closest.y.push_back(group[k]->cor_closest ? *group[k]->cor_closest * base : std::nan(""));
        global.y.push_back(group[k]->cor_global ? *group[k]->cor_global * base : std::nan(""));
      }
      plot.series.push_back(closest);
      plot.series.push_back(global);
    }
  }
  write_text(out_dir / "residual.svg", render_line_plot(plot));
  written.push_back(out_dir / "residual.svg");

  const auto dir = results_csv.parent_path();
  if (std::ifstream sv(dir / "singular_values.csv", std::ios::binary); sv) {
    const auto table = read_csv(sv);
    LinePlot p;
    p.title = "Singular values of the snapshot matrix";
    p.xlabel = "index";
    p.ylabel = "sigma_i";
    Series s{"sigma_i", {}, {}, false};
    for (std::size_t k = 1; k < table.size(); ++k) {
      if (table[k].size() < 2) continue;
      s.x.push_back(std::stod(table[k][0]));
      s.y.push_back(std::stod(table[k][1]));
    }
    p.series.push_back(s);
    write_text(out_dir / "singular_values.svg", render_line_plot(p));
    written.push_back(out_dir / "singular_values.svg");
  }
  if (std::ifstream tm(dir / "timing.csv", std::ios::binary); tm) {
    const auto table = read_csv(tm);
    std::vector<Bar> bars;
    for (std::size_t k = 1; k < table.size(); ++k) {
      if (table[k].size() < 2) continue;
      bars.push_back({table[k][0], std::stod(table[k][1])});
    }
    write_text(out_dir / "timing.svg", render_bar_chart("Phase totals (median of repetitions)", "seconds", bars));
    written.push_back(out_dir / "timing.svg");
  }
  return written;
}

}  // namespace subapsnap
