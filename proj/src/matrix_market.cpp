#include "subapsnap/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>
#include <vector>

namespace subapsnap {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

template <class T>
T parse_number(std::string_view tok, long line, const char* what) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("Matrix Market: cannot parse " + std::string(what) + " '" + std::string(tok) + "'",
                     line);
  }
  return value;
}

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw ParseError("Matrix Market: cannot open '" + path + "'", 0);
  }

  MatrixMarketHeader header() {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("Matrix Market: empty file '" + path_ + "'", 1);
    line_no_ = 1;
    const auto t = tokens(line);
    if (t.size() != 5 || lower(std::string(t[0])) != "%%matrixmarket") {
      throw ParseError("Matrix Market: missing '%%MatrixMarket' banner in '" + path_ + "'", 1);
    }
    MatrixMarketHeader h{lower(std::string(t[1])), lower(std::string(t[2])),
                         lower(std::string(t[3])), lower(std::string(t[4]))};
    if (h.object != "matrix") throw ParseError("Matrix Market: unsupported object '" + h.object + "'", 1);
    if (h.format != "coordinate" && h.format != "array") {
      throw ParseError("Matrix Market: unsupported format '" + h.format + "'", 1);
    }
    if (h.field != "real" && h.field != "complex" && h.field != "integer" && h.field != "pattern") {
      throw ParseError("Matrix Market: unsupported field '" + h.field + "'", 1);
    }
    if (h.symmetry != "general" && h.symmetry != "symmetric" && h.symmetry != "skew-symmetric" &&
        h.symmetry != "hermitian") {
      throw ParseError("Matrix Market: unsupported symmetry '" + h.symmetry + "'", 1);
    }
    if (h.format == "array" && h.field == "pattern") {
      throw ParseError("Matrix Market: array format cannot have pattern field", 1);
    }
    return h;
  }

  /// Next non-comment, non-blank line; false at end of file.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line[0] == '%') continue;
      if (blank(line)) continue;
      return true;
    }
    return false;
  }

  long line_no() const { return line_no_; }

 private:
  std::ifstream in_;
  std::string path_;
  long line_no_ = 0;
};

template <class Scalar>
Scalar read_value(const std::vector<std::string_view>& t, std::size_t offset,
                  const MatrixMarketHeader& h, long line) {
  if (h.field == "pattern") return Scalar(1);
  const double re = parse_number<double>(t[offset], line, "value");
  if (h.field == "complex") {
    const double im = parse_number<double>(t[offset + 1], line, "imaginary part");
    if constexpr (is_complex_v<Scalar>) {
      return Scalar(re, im);
    } else {
      throw ParseError("Matrix Market: complex entries cannot be read into a real matrix", line);
    }
  }
  return Scalar(re);
}

std::size_t values_per_entry(const MatrixMarketHeader& h) {
  if (h.field == "pattern") return 0;
  return h.field == "complex" ? 2 : 1;
}

template <class Scalar>
Scalar mirror(Scalar v, const MatrixMarketHeader& h) {
  if (h.symmetry == "skew-symmetric") return -v;
  if (h.symmetry == "hermitian") return Eigen::numext::conj(v);
  return v;
}

}  // namespace

MatrixMarketHeader read_matrix_market_header(const std::string& path) {
  Reader reader(path);
  return reader.header();
}

template <class Scalar>
SparseMatrix<Scalar> read_matrix_market(const std::string& path) {
  Reader reader(path);
  const MatrixMarketHeader h = reader.header();
  std::string line;
  if (!reader.next(line)) throw ParseError("Matrix Market: missing size line", reader.line_no());
  const auto size = tokens(line);
  const bool coord = h.format == "coordinate";
  if (size.size() != (coord ? 3u : 2u)) {
    throw ParseError("Matrix Market: malformed size line", reader.line_no());
  }
  const auto rows = parse_number<long long>(size[0], reader.line_no(), "row count");
  const auto cols = parse_number<long long>(size[1], reader.line_no(), "column count");
  if (rows < 0 || cols < 0) throw ParseError("Matrix Market: negative dimensions", reader.line_no());
  const bool general = h.symmetry == "general";
  if (!general && rows != cols) {
    throw ParseError("Matrix Market: symmetric storage requires a square matrix", reader.line_no());
  }

  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  const std::size_t nv = values_per_entry(h);
  if (coord) {
    const auto nnz = parse_number<long long>(size[2], reader.line_no(), "entry count");
    if (nnz < 0) throw ParseError("Matrix Market: negative entry count", reader.line_no());
    triplets.reserve(static_cast<std::size_t>(general ? nnz : 2 * nnz));
    for (long long k = 0; k < nnz; ++k) {
      if (!reader.next(line)) {
        throw ParseError("Matrix Market: expected " + std::to_string(nnz) + " entries, found " +
                             std::to_string(k),
                         reader.line_no());
      }
      const auto t = tokens(line);
      if (t.size() != 2 + nv) throw ParseError("Matrix Market: malformed entry", reader.line_no());
      const auto i = parse_number<long long>(t[0], reader.line_no(), "row index");
      const auto j = parse_number<long long>(t[1], reader.line_no(), "column index");
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw ParseError("Matrix Market: entry index out of range", reader.line_no());
      }
      if (!general && j > i) {
        throw ParseError("Matrix Market: symmetric storage must hold the lower triangle only",
                         reader.line_no());
      }
      const Scalar v = read_value<Scalar>(t, 2, h, reader.line_no());
      triplets.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
      if (!general && i != j) {
        triplets.emplace_back(static_cast<Index>(j - 1), static_cast<Index>(i - 1), mirror(v, h));
      }
    }
  } else {
    // Column-major; symmetric storage lists the lower triangle.
    for (long long j = 0; j < cols; ++j) {
      const long long first = general ? 0 : (h.symmetry == "skew-symmetric" ? j + 1 : j);
      for (long long i = first; i < rows; ++i) {
        if (!reader.next(line)) throw ParseError("Matrix Market: too few array entries", reader.line_no());
        const auto t = tokens(line);
        if (t.size() != nv) throw ParseError("Matrix Market: malformed array entry", reader.line_no());
        const Scalar v = read_value<Scalar>(t, 0, h, reader.line_no());
        if (v == Scalar(0)) continue;
        triplets.emplace_back(static_cast<Index>(i), static_cast<Index>(j), v);
        if (!general && i != j) triplets.emplace_back(static_cast<Index>(j), static_cast<Index>(i), mirror(v, h));
      }
    }
  }
  if (reader.next(line)) throw ParseError("Matrix Market: unexpected trailing data", reader.line_no());
  SparseMatrix<Scalar> a(static_cast<Index>(rows), static_cast<Index>(cols));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

template <class Scalar>
Vector<Scalar> read_matrix_market_vector(const std::string& path) {
  const SparseMatrix<Scalar> a = read_matrix_market<Scalar>(path);
  if (a.cols() == 1) return Vector<Scalar>(a.col(0));
  if (a.rows() == 1) return Vector<Scalar>(a.row(0).transpose());
  throw ParseError("Matrix Market: '" + path + "' is not a vector", 2);
}

template <class Scalar>
void write_matrix_market(const std::string& path, const SparseMatrix<Scalar>& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix coordinate " << (is_complex_v<Scalar> ? "complex" : "real")
      << " general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Index c = 0; c < a.outerSize(); ++c) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(a, c); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ';
      if constexpr (is_complex_v<Scalar>) {
        out << it.value().real() << ' ' << it.value().imag() << '\n';
      } else {
        out << it.value() << '\n';
      }
    }
  }
}

template <class Scalar>
void write_matrix_market_vector(const std::string& path, const Vector<Scalar>& v) {
  SparseMatrix<Scalar> a(v.size(), 1);
  std::vector<Eigen::Triplet<Scalar, Index>> t;
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != Scalar(0)) t.emplace_back(i, 0, v(i));
  }
  a.setFromTriplets(t.begin(), t.end());
  write_matrix_market(path, a);
}

template SparseMatrix<double> read_matrix_market<double>(const std::string&);
template SparseMatrix<cdouble> read_matrix_market<cdouble>(const std::string&);
template Vector<double> read_matrix_market_vector<double>(const std::string&);
template Vector<cdouble> read_matrix_market_vector<cdouble>(const std::string&);
template void write_matrix_market<double>(const std::string&, const SparseMatrix<double>&);
template void write_matrix_market<cdouble>(const std::string&, const SparseMatrix<cdouble>&);
template void write_matrix_market_vector<double>(const std::string&, const Vector<double>&);
template void write_matrix_market_vector<cdouble>(const std::string&, const Vector<cdouble>&);

}  // namespace subapsnap
