#include "subapsnap/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

#include "subapsnap/types.hpp"

namespace subapsnap {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

double parse_number(const std::string& s, long line) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

std::optional<double> parse_opt(const std::string& s, long line) {
  if (s.empty()) return std::nullopt;
  return parse_number(s, line);
}

}  // namespace

const std::vector<std::string>& result_header() {
  static const std::vector<std::string> header{
      "method",      "p",         "relative_residual", "output_error", "sampled_residual",
      "est_lower",   "est_upper", "wall_time_s",       "actual_ratio", "bound_A",
      "bound_Ab",    "thm",       "cor_closest",       "cor_global",   "flags"};
  return header;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out << ',';
    const std::string& f = fields[k];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << "\r\n";
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  bool any = false;
  long line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) throw ParseError("stray quote in unquoted field", line);
        quoted = was_quoted = any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        if (in.peek() != '\n') throw ParseError("bare carriage return", line);
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (was_quoted) throw ParseError("text after closing quote", line);
        field += c;
        any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line);
  if (any || !field.empty()) end_row();
  return rows;
}

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  write_csv_row(out, result_header());
  for (const auto& r : rows) {
    write_csv_row(out, {r.method, r.p, format_number(r.relative_residual), opt(r.output_error),
                        opt(r.sampled_residual), opt(r.est_lower), opt(r.est_upper),
                        format_number(r.wall_time_s), opt(r.actual_ratio), opt(r.bound_a),
                        opt(r.bound_ab), opt(r.thm), opt(r.cor_closest), opt(r.cor_global), r.flags});
  }
}

std::vector<ResultRow> read_results(std::istream& in) {
  const auto table = read_csv(in);
  if (table.empty()) throw ParseError("empty results file", 1);
  if (table[0] != result_header()) throw ParseError("unexpected results header", 1);
  std::vector<ResultRow> rows;
  for (std::size_t k = 1; k < table.size(); ++k) {
    const auto& f = table[k];
    const long line = static_cast<long>(k + 1);
    if (f.size() != result_header().size()) {
      throw ParseError("expected " + std::to_string(result_header().size()) + " fields, got " +
                           std::to_string(f.size()),
                       line);
    }
    ResultRow r;
    r.method = f[0];
    r.p = f[1];
    r.relative_residual = parse_number(f[2], line);
    r.output_error = parse_opt(f[3], line);
    r.sampled_residual = parse_opt(f[4], line);
    r.est_lower = parse_opt(f[5], line);
    r.est_upper = parse_opt(f[6], line);
    r.wall_time_s = parse_number(f[7], line);
    r.actual_ratio = parse_opt(f[8], line);
    r.bound_a = parse_opt(f[9], line);
    r.bound_ab = parse_opt(f[10], line);
    r.thm = parse_opt(f[11], line);
    r.cor_closest = parse_opt(f[12], line);
    r.cor_global = parse_opt(f[13], line);
    r.flags = f[14];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace subapsnap
