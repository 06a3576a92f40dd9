#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace subapsnap {

/// One line of results.csv.
struct ResultRow {
  std::string method;
  std::string p;
  double relative_residual = 0.0;
  std::optional<double> output_error;      // |H(p) - H_hat(p)|
  std::optional<double> sampled_residual;  // subapsnap only, relative to ||b(p)||
  std::optional<double> est_lower;
  std::optional<double> est_upper;
  double wall_time_s = 0.0;
  std::optional<double> actual_ratio;
  std::optional<double> bound_a;
  std::optional<double> bound_ab;
  std::optional<double> thm;
  std::optional<double> cor_closest;
  std::optional<double> cor_global;
  std::string flags;
};

const std::vector<std::string>& result_header();

/// RFC 4180: CRLF line ends, fields quoted when they hold a comma, quote
/// or line break. Numbers use 17 significant digits, "inf" for infinity,
/// and an empty field when absent.
void write_results(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results(std::istream& in);

std::string format_number(double v);

/// Generic table helpers.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
/// Reads all records; throws ParseError on an unterminated quote or a
/// stray quote inside an unquoted field.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

}  // namespace subapsnap
