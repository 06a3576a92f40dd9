#include "subapsnap/problems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

#include "subapsnap/matrix_market.hpp"
#include "subapsnap/rng.hpp"

namespace subapsnap {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, Index>>;

SparseRowMatrix<double> from_triplets(Index n, const Triplets& t) {
  SparseRowMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SparseRowMatrix<double> identity(Index n) {
  SparseRowMatrix<double> m(n, n);
  m.setIdentity();
  return m;
}

template <class Scalar>
AffineTerm<Scalar> term(std::string label, std::function<Scalar(const Parameter&)> f,
                        const SparseRowMatrix<double>& m) {
  return {std::move(label), std::move(f), m.template cast<Scalar>()};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// --- tridiag --------------------------------------------------------------

template <class Scalar>
SystemPtr<Scalar> build_tridiag(const TridiagSpec& spec) {
  Rng rng(spec.seed);
  auto b0 = std::make_shared<Eigen::VectorXd>(spec.n);
  for (Index i = 0; i < spec.n; ++i) (*b0)(i) = rng.normal();

  SystemDefinition<Scalar> def;
  def.name = "tridiag";
  def.n = spec.n;
  def.domain = Box(spec.lo, spec.hi);
  def.structure = Structure::tridiagonal;
  def.affine_terms.push_back(term<Scalar>("A0", [](const Parameter&) { return Scalar(1); },
                                          laplacian_1d(spec.n)));
  def.affine_terms.push_back(term<Scalar>(
      "I", [](const Parameter& p) { return -from_complex<Scalar>(p(0)); }, identity(spec.n)));
  def.rhs_oracle = [b0](const Parameter& p, Index i) {
    const Scalar q = from_complex<Scalar>(p(0));
    return std::exp(Scalar((*b0)(i)) * std::sin(q / Scalar(10)) * q);
  };
  return std::make_shared<const ParametricSystem<Scalar>>(std::move(def));
}

// --- heat2d ---------------------------------------------------------------

template <class Scalar>
SystemPtr<Scalar> build_heat2d(const Heat2dSpec& spec) {
  const Index m = spec.grid;
  const Index n = m * m;
  const double h = 2.0 / static_cast<double>(m + 1);
  const double w = 1.0 / (h * h);
  Triplets base;
  Triplets disk;
  auto coord = [&](Index i) { return -1.0 + static_cast<double>(i + 1) * h; };
  const Index di[4] = {-1, 1, 0, 0};
  const Index dj[4] = {0, 0, -1, 1};
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Index k = i + m * j;
      for (int e = 0; e < 4; ++e) {
        const Index ni = i + di[e];
        const Index nj = j + dj[e];
        const double mx = 0.5 * (coord(i) + coord(ni));
        const double my = 0.5 * (coord(j) + coord(nj));
        const bool inside = mx * mx + my * my <= 1.0;
        const bool interior = ni >= 0 && ni < m && nj >= 0 && nj < m;
        base.emplace_back(k, k, w);
        if (inside) disk.emplace_back(k, k, w);
        if (interior) {
          base.emplace_back(k, ni + m * nj, -w);
          if (inside) disk.emplace_back(k, ni + m * nj, -w);
        }
      }
    }
  }
  SystemDefinition<Scalar> def;
  def.name = "heat2d";
  def.n = n;
  def.domain = Box(spec.lo, spec.hi);
  def.structure = Structure::sparse;
  def.affine_terms.push_back(
      term<Scalar>("A_base", [](const Parameter&) { return Scalar(1); }, from_triplets(n, base)));
  def.affine_terms.push_back(term<Scalar>(
      "A_disk", [](const Parameter& p) { return from_complex<Scalar>(p(0)); }, from_triplets(n, disk)));
  def.rhs_oracle = [](const Parameter&, Index) { return Scalar(1); };
  return std::make_shared<const ParametricSystem<Scalar>>(std::move(def));
}

// --- convdiff -------------------------------------------------------------

template <class Scalar>
SystemPtr<Scalar> build_convdiff(const ConvDiffSpec& spec) {
  const Index m = spec.grid;
  const Index n = m * m;
  const double h = 1.0 / static_cast<double>(m + 1);
  const double d = 1.0 / (h * h);
  const double c = spec.convection / h;
  Triplets t;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Index k = i + m * j;
      // A = -(diffusion + convection); store A itself.
      t.emplace_back(k, k, -(4.0 * d + 2.0 * c));
      if (i > 0) t.emplace_back(k, k - 1, d + c);
      if (i + 1 < m) t.emplace_back(k, k + 1, d);
      if (j > 0) t.emplace_back(k, k - m, d + c);
      if (j + 1 < m) t.emplace_back(k, k + m, d);
    }
  }
  SystemDefinition<Scalar> def;
  def.name = "convdiff";
  def.n = n;
  def.domain = Box(cdouble(0.0, spec.lo), cdouble(0.0, spec.hi));
  def.structure = Structure::sparse;
  def.affine_terms.push_back(
      term<Scalar>("E", [](const Parameter& p) { return from_complex<Scalar>(p(0)); }, identity(n)));
  def.affine_terms.push_back(
      term<Scalar>("A", [](const Parameter&) { return Scalar(-1); }, from_triplets(n, t)));
  def.rhs_oracle = [](const Parameter&, Index) { return Scalar(1); };
  def.output = make_vector(VectorKind::first, n, 0).cast<Scalar>();
  return std::make_shared<const ParametricSystem<Scalar>>(std::move(def));
}

// --- delay ----------------------------------------------------------------

template <class Scalar>
SystemPtr<Scalar> build_delay(const DelaySpec& spec) {
  const Index n = spec.n;
  const SparseRowMatrix<double> a1 = (delay_t_matrix(n) - spec.kappa * identity(n)) / spec.tau;
  const SparseRowMatrix<double> a0 = 3.0 * a1;
  auto b = std::make_shared<Eigen::VectorXd>(make_vector(spec.b, n, spec.seed));
  const double tau = spec.tau;

  SystemDefinition<Scalar> def;
  def.name = "delay";
  def.n = n;
  def.domain = Box(cdouble(0.0, spec.lo), cdouble(0.0, spec.hi));
  def.structure = Structure::tridiagonal;
  def.affine_terms.push_back(
      term<Scalar>("I", [](const Parameter& p) { return from_complex<Scalar>(p(0)); }, identity(n)));
  def.affine_terms.push_back(term<Scalar>("A0", [](const Parameter&) { return Scalar(-1); }, a0));
  def.affine_terms.push_back(term<Scalar>(
      "A1", [tau](const Parameter& p) { return -from_complex<Scalar>(std::exp(tau * p(0))); }, a1));
  def.rhs_oracle = [b](const Parameter&, Index i) { return Scalar((*b)(i)); };
  def.output = make_vector(spec.c, n, spec.seed + 1).cast<Scalar>();
  return std::make_shared<const ParametricSystem<Scalar>>(std::move(def));
}

// --- matrix market --------------------------------------------------------

template <class Scalar>
SystemPtr<Scalar> build_matrix_market(const MatrixMarketSpec& spec) {
  SystemDefinition<Scalar> def;
  def.name = "matrix-market";
  def.domain = spec.domain;
  def.structure = Structure::sparse;
  for (const auto& t : spec.terms) {
    const Coefficient f = parse_coefficient(t.coefficient);
    if (f.axis >= spec.domain.dim()) {
      throw ConfigError("coefficient '" + t.coefficient + "' refers to a missing parameter axis");
    }
    const SparseMatrix<Scalar> a = read_matrix_market<Scalar>(t.path);
    if (def.n == 0) def.n = a.rows();
    if (a.rows() != def.n || a.cols() != def.n) {
      throw DimensionError("matrix '" + t.path + "' does not match the first term's size");
    }
    def.affine_terms.push_back(
        {t.path, [f](const Parameter& p) { return from_complex<Scalar>(f(p)); },
         SparseRowMatrix<Scalar>(a)});
  }
  auto b = std::make_shared<Vector<Scalar>>(read_matrix_market_vector<Scalar>(spec.rhs_path));
  if (b->size() != def.n) throw DimensionError("right-hand side length does not match the matrices");
  def.rhs_oracle = [b](const Parameter&, Index i) { return (*b)(i); };
  if (!spec.output_path.empty()) {
    def.output = read_matrix_market_vector<Scalar>(spec.output_path);
  }
  return std::make_shared<const ParametricSystem<Scalar>>(std::move(def));
}

double parse_real(std::string_view s, const std::string& text) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("cannot parse coefficient '" + text + "'");
  }
  return v;
}

// Parses "p" or "p[k]"; returns false if `s` is not a parameter reference.
bool parse_param_ref(std::string_view s, Index& axis) {
  if (s == "p") {
    axis = 0;
    return true;
  }
  if (s.size() >= 4 && s[0] == 'p' && s[1] == '[' && s.back() == ']') {
    const auto inner = s.substr(2, s.size() - 3);
    long long k = 0;
    const auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), k);
    if (ec == std::errc() && ptr == inner.data() + inner.size() && k >= 0) {
      axis = static_cast<Index>(k);
      return true;
    }
  }
  return false;
}

}  // namespace

cdouble Coefficient::operator()(const Parameter& p) const {
  switch (kind) {
    case Kind::constant:
      return factor;
    case Kind::linear:
      return factor * p(axis);
    case Kind::exponential:
      return factor * std::exp(rate * p(axis));
  }
  return factor;
}

Coefficient parse_coefficient(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  }
  if (s.empty()) throw ConfigError("empty coefficient expression");
  Coefficient c;
  c.text = text;
  double sign = 1.0;
  std::string_view v(s);
  if (v[0] == '-' || v[0] == '+') {
    if (v[0] == '-') sign = -1.0;
    v.remove_prefix(1);
  }
  // Optional leading numeric factor "a*".
  double factor = 1.0;
  const auto star = v.find('*');
  if (star != std::string_view::npos && v.substr(0, 4) != "exp(") {
    factor = parse_real(v.substr(0, star), text);
    v.remove_prefix(star + 1);
  }
  c.factor = sign * factor;
  Index axis = 0;
  if (parse_param_ref(v, axis)) {
    c.kind = Coefficient::Kind::linear;
    c.axis = axis;
    return c;
  }
  if (v.size() > 5 && v.substr(0, 4) == "exp(" && v.back() == ')') {
    std::string_view inner = v.substr(4, v.size() - 5);
    double rate = 1.0;
    const auto s2 = inner.find('*');
    if (s2 != std::string_view::npos) {
      rate = parse_real(inner.substr(0, s2), text);
      inner.remove_prefix(s2 + 1);
    } else if (!inner.empty() && inner[0] == '-') {
      rate = -1.0;
      inner.remove_prefix(1);
    }
    if (!parse_param_ref(inner, axis)) throw ConfigError("cannot parse coefficient '" + text + "'");
    c.kind = Coefficient::Kind::exponential;
    c.rate = rate;
    c.axis = axis;
    return c;
  }
  if (star != std::string_view::npos) throw ConfigError("cannot parse coefficient '" + text + "'");
  c.kind = Coefficient::Kind::constant;
  c.factor = sign * parse_real(v, text);
  return c;
}

SparseRowMatrix<double> laplacian_1d(Index n) {
  Triplets t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
  }
  return from_triplets(n, t);
}

SparseRowMatrix<double> delay_t_matrix(Index n) {
  Triplets t;
  t.emplace_back(0, 0, 1.0);
  t.emplace_back(n - 1, n - 1, 1.0);
  for (Index i = 0; i + 1 < n; ++i) {
    t.emplace_back(i, i + 1, 1.0);
    t.emplace_back(i + 1, i, 1.0);
  }
  return from_triplets(n, t);
}

Eigen::VectorXd make_vector(VectorKind kind, Index n, std::uint64_t seed) {
  switch (kind) {
    case VectorKind::ones:
      return Eigen::VectorXd::Ones(n);
    case VectorKind::first:
      return Eigen::VectorXd::Unit(n, 0);
    case VectorKind::gaussian: {
      Rng rng(seed);
      Eigen::VectorXd v(n);
      for (Index i = 0; i < n; ++i) v(i) = rng.normal();
      return v;
    }
  }
  return Eigen::VectorXd::Zero(n);
}

KrrData make_krr_data(const KrrSpec& spec) {
  const Index total = spec.n_train + spec.n_test;
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(total, 0.0, 10.0);
  Rng rng(spec.seed);
  std::shuffle(t.data(), t.data() + total, rng.engine());
  Rng noise = rng.split(1);
  Eigen::VectorXd y(total);
  for (Index i = 0; i < total; ++i) y(i) = std::sin(t(i)) + spec.noise * noise.normal();
  return {t.head(spec.n_train), y.head(spec.n_train), t.tail(spec.n_test), y.tail(spec.n_test)};
}

Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma) {
  const double g = -1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd k(a.size(), b.size());
  for (Index j = 0; j < b.size(); ++j) {
    for (Index i = 0; i < a.size(); ++i) {
      const double d = a(i) - b(j);
      k(i, j) = std::exp(g * d * d);
    }
  }
  return k;
}

SystemPtr<double> build_krr(const KrrSpec& spec, const KrrData& data) {
  auto t = std::make_shared<Eigen::VectorXd>(data.t_train);
  auto y = std::make_shared<Eigen::VectorXd>(data.y_train);
  const Index n = t->size();
  SystemDefinition<double> def;
  def.name = "krr";
  def.n = n;
  def.domain = Box(std::vector<cdouble>{spec.lambda_lo, spec.sigma_lo}, std::vector<cdouble>{spec.lambda_hi, spec.sigma_hi});
  def.structure = Structure::dense;
  def.hermitian_positive_definite = true;
  def.row_oracle = [t, n](const Parameter& p, Index i, Row<double>& out) {
    const double lambda = p(0).real();
    const double sigma = p(1).real();
    const double g = -1.0 / (2.0 * sigma * sigma);
    out.dense = true;
    out.vals.resize(static_cast<std::size_t>(n));
    Eigen::Map<Eigen::ArrayXd> v(out.vals.data(), n);
    v = (g * (t->array() - (*t)(i)).square()).exp();
    out.vals[i] += lambda;
  };
  def.rhs_oracle = [y](const Parameter&, Index i) { return (*y)(i); };
  return std::make_shared<const ParametricSystem<double>>(std::move(def));
}

std::string problem_kind(const ProblemSpec& spec) {
  static const char* names[] = {"tridiag", "heat2d", "convdiff", "delay", "krr", "matrix-market"};
  return names[spec.index()];
}

bool problem_is_complex(const ProblemSpec& spec) {
  if (std::holds_alternative<ConvDiffSpec>(spec) || std::holds_alternative<DelaySpec>(spec)) {
    return true;
  }
  if (const auto* mm = std::get_if<MatrixMarketSpec>(&spec)) return mm->complex || !mm->domain.is_real();
  return false;
}

Box problem_domain(const ProblemSpec& spec) {
  return std::visit(
      [](const auto& s) -> Box {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConvDiffSpec> || std::is_same_v<T, DelaySpec>) {
          return Box(cdouble(0.0, s.lo), cdouble(0.0, s.hi));
        } else if constexpr (std::is_same_v<T, KrrSpec>) {
          return Box(std::vector<cdouble>{s.lambda_lo, s.sigma_lo}, std::vector<cdouble>{s.lambda_hi, s.sigma_hi});
        } else if constexpr (std::is_same_v<T, MatrixMarketSpec>) {
          return s.domain;
        } else {
          return Box(s.lo, s.hi);
        }
      },
      spec);
}

void validate_problem(const ProblemSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TridiagSpec>) {
          require(s.n >= 2, "tridiag: n must be at least 2");
          require(s.lo < s.hi, "tridiag: empty parameter interval");
        } else if constexpr (std::is_same_v<T, Heat2dSpec>) {
          require(s.grid >= 2, "heat2d: grid must be at least 2");
          require(s.lo < s.hi, "heat2d: empty parameter interval");
          require(s.lo > -1.0, "heat2d: conductivity 1+p must stay positive");
        } else if constexpr (std::is_same_v<T, ConvDiffSpec>) {
          require(s.grid >= 2, "convdiff: grid must be at least 2");
          require(s.convection >= 0.0, "convdiff: convection must be nonnegative");
          require(s.lo < s.hi, "convdiff: empty parameter interval");
        } else if constexpr (std::is_same_v<T, DelaySpec>) {
          require(s.n >= 2, "delay: n must be at least 2");
          require(s.tau > 0.0, "delay: tau must be positive");
          require(s.kappa > 2.0, "delay: kappa must exceed 2");
          require(s.lo < s.hi, "delay: empty parameter interval");
        } else if constexpr (std::is_same_v<T, KrrSpec>) {
          require(s.n_train >= 2, "krr: at least 2 training points");
          require(s.n_test >= 0, "krr: negative test size");
          require(s.noise >= 0.0, "krr: noise must be nonnegative");
          require(s.lambda_lo > 0.0 && s.lambda_lo < s.lambda_hi, "krr: lambda range must be positive");
          require(s.sigma_lo > 0.0 && s.sigma_lo < s.sigma_hi, "krr: sigma range must be positive");
        } else {
          require(!s.terms.empty(), "matrix-market: at least one term");
          require(!s.rhs_path.empty(), "matrix-market: rhs path missing");
          require(!s.domain.empty(), "matrix-market: domain missing");
        }
      },
      spec);
}

template <class Scalar>
SystemPtr<Scalar> build_problem(const ProblemSpec& spec) {
  validate_problem(spec);
  if constexpr (!is_complex_v<Scalar>) {
    if (problem_is_complex(spec)) {
      throw ConfigError("problem '" + problem_kind(spec) + "' needs complex arithmetic");
    }
  }
  return std::visit(
      [](const auto& s) -> SystemPtr<Scalar> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TridiagSpec>) {
          return build_tridiag<Scalar>(s);
        } else if constexpr (std::is_same_v<T, Heat2dSpec>) {
          return build_heat2d<Scalar>(s);
        } else if constexpr (std::is_same_v<T, ConvDiffSpec>) {
          return build_convdiff<Scalar>(s);
        } else if constexpr (std::is_same_v<T, DelaySpec>) {
          return build_delay<Scalar>(s);
        } else if constexpr (std::is_same_v<T, KrrSpec>) {
          if constexpr (is_complex_v<Scalar>) {
            throw ConfigError("krr: only real arithmetic is supported");
          } else {
            return build_krr(s, make_krr_data(s));
          }
        } else {
          return build_matrix_market<Scalar>(s);
        }
      },
      spec);
}

AnySystem build_any_problem(const ProblemSpec& spec) {
  if (problem_is_complex(spec)) return build_problem<cdouble>(spec);
  return build_problem<double>(spec);
}

template SystemPtr<double> build_problem<double>(const ProblemSpec&);
template SystemPtr<cdouble> build_problem<cdouble>(const ProblemSpec&);

}  // namespace subapsnap
