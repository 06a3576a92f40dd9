#include "subapsnap/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace subapsnap {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  auto space = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), space));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(what + ": '" + text + "' is not an integer");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(what + ": '" + text + "' is not a boolean");
}

// Section reader that remembers which keys were consumed, so leftovers can
// be reported as typos.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> get(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

  template <class T, class F>
  void read(const std::string& key, T& out, F parse) {
    if (auto v = get(key)) out = parse(*v, where(key));
  }

  void real(const std::string& key, double& out) { read(key, out, parse_real); }
  void flag(const std::string& key, bool& out) { read(key, out, parse_bool); }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    read(key, out, parse_int<Int>);
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    if (tree_) {
      for (const auto& kv : *tree_) out.push_back(kv.first);
    }
    return out;
  }

  void finish() const {
    for (const auto& k : keys()) {
      if (!used_.count(k)) throw ConfigError("unknown key " + where(k));
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

std::vector<PointLayout> parse_layouts(const std::string& text, const std::string&) {
  std::vector<PointLayout> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_point_layout(item));
  if (out.empty()) throw ConfigError("empty layout list");
  return out;
}

VectorKind parse_vector_kind(const std::string& text, const std::string& what) {
  if (text == "ones") return VectorKind::ones;
  if (text == "first") return VectorKind::first;
  if (text == "gaussian") return VectorKind::gaussian;
  throw ConfigError(what + ": expected ones, first or gaussian, got '" + text + "'");
}

// Real interval from a one-dimensional domain.
std::pair<double, double> real_interval(const Box& box, const std::string& what) {
  if (box.dim() != 1 || box.lo[0].imag() != 0.0 || box.hi[0].imag() != 0.0) {
    throw ConfigError(what + ": expected a real interval such as [0, 5]");
  }
  return {box.lo[0].real(), box.hi[0].real()};
}

std::pair<double, double> imaginary_band(const Box& box, const std::string& what) {
  if (box.dim() != 1 || box.lo[0].real() != 0.0 || box.hi[0].real() != 0.0) {
    throw ConfigError(what + ": expected a band on the imaginary axis such as i[1, 1e4]");
  }
  return {box.lo[0].imag(), box.hi[0].imag()};
}

ProblemSpec parse_problem(Section& s, const std::filesystem::path& base) {
  const auto kind = s.get("kind");
  if (!kind) throw ConfigError("missing " + s.where("kind"));
  auto domain = [&](auto assign) {
    if (auto v = s.get("domain")) assign(parse_domain(*v), s.where("domain"));
  };

  if (*kind == "tridiag") {
    TridiagSpec p;
    s.integer("n", p.n);
    s.integer("seed", p.seed);
    domain([&](const Box& b, const std::string& w) { std::tie(p.lo, p.hi) = real_interval(b, w); });
    return p;
  }
  if (*kind == "heat2d") {
    Heat2dSpec p;
    s.integer("grid", p.grid);
    domain([&](const Box& b, const std::string& w) { std::tie(p.lo, p.hi) = real_interval(b, w); });
    return p;
  }
  if (*kind == "convdiff") {
    ConvDiffSpec p;
    s.integer("grid", p.grid);
    s.real("convection", p.convection);
    domain([&](const Box& b, const std::string& w) { std::tie(p.lo, p.hi) = imaginary_band(b, w); });
    return p;
  }
  if (*kind == "delay") {
    DelaySpec p;
    s.integer("n", p.n);
    s.real("tau", p.tau);
    s.real("kappa", p.kappa);
    s.integer("seed", p.seed);
    s.read("b", p.b, parse_vector_kind);
    s.read("c", p.c, parse_vector_kind);
    domain([&](const Box& b, const std::string& w) { std::tie(p.lo, p.hi) = imaginary_band(b, w); });
    return p;
  }
  if (*kind == "krr") {
    KrrSpec p;
    s.integer("n_train", p.n_train);
    s.integer("n_test", p.n_test);
    s.real("noise", p.noise);
    s.integer("seed", p.seed);
    domain([&](const Box& b, const std::string& w) {
      if (b.dim() != 2 || !b.is_real()) {
        throw ConfigError(w + ": expected [lambda_lo, lambda_hi] x [sigma_lo, sigma_hi]");
      }
      p.lambda_lo = b.lo[0].real();
      p.lambda_hi = b.hi[0].real();
      p.sigma_lo = b.lo[1].real();
      p.sigma_hi = b.hi[1].real();
    });
    return p;
  }
  if (*kind == "matrix-market") {
    MatrixMarketSpec p;
    auto resolve = [&](const std::string& path) {
      const std::filesystem::path fp(path);
      return (fp.is_absolute() || base.empty() ? fp : base / fp).string();
    };
    for (int k = 0;; ++k) {
      const std::string prefix = "term." + std::to_string(k) + ".";
      auto path = s.get(prefix + "path");
      auto coef = s.get(prefix + "coefficient");
      if (!path && !coef) break;
      if (!path || !coef) throw ConfigError(s.where(prefix + "*") + ": needs both path and coefficient");
      parse_coefficient(*coef);
      p.terms.push_back({resolve(*path), *coef});
    }
    if (auto v = s.get("rhs")) p.rhs_path = resolve(*v);
    if (auto v = s.get("output")) p.output_path = resolve(*v);
    s.flag("complex", p.complex);
    domain([&](const Box& b, const std::string&) { p.domain = b; });
    return p;
  }
  throw ConfigError("unknown " + s.where("kind") + " '" + *kind +
                    "' (expected tridiag, heat2d, convdiff, delay, krr or matrix-market)");
}

}  // namespace

cdouble parse_complex(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (t.empty()) throw ConfigError("empty complex literal");
  if (t.back() != 'i' && t.back() != 'j') return parse_real(t, "complex literal");

  t.pop_back();
  // Split before the last sign that is not an exponent sign.
  std::size_t cut = 0;
  for (std::size_t k = t.size(); k-- > 1;) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      cut = k;
      break;
    }
  }
  const std::string re = t.substr(0, cut);
  std::string im = t.substr(cut);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  const double imag = parse_real(im, "complex literal '" + text + "'");
  const double real = re.empty() ? 0.0 : parse_real(re, "complex literal '" + text + "'");
  return {real, imag};
}

Box parse_domain(const std::string& text) {
  std::vector<cdouble> lo;
  std::vector<cdouble> hi;
  std::size_t pos = 0;
  const std::string t = trim(text);
  while (pos < t.size()) {
    while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
    if (!lo.empty()) {
      if (pos >= t.size() || t[pos] != 'x') throw ConfigError("domain '" + text + "': expected 'x' between factors");
      ++pos;
      while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
    }
    bool imaginary = false;
    if (pos < t.size() && t[pos] == 'i') {
      imaginary = true;
      ++pos;
    }
    if (pos >= t.size() || t[pos] != '[') throw ConfigError("domain '" + text + "': expected '['");
    const std::size_t close = t.find(']', pos);
    if (close == std::string::npos) throw ConfigError("domain '" + text + "': missing ']'");
    const auto ends = split(t.substr(pos + 1, close - pos - 1), ',');
    if (ends.size() != 2) throw ConfigError("domain '" + text + "': each factor needs two endpoints");
    const cdouble scale = imaginary ? cdouble(0.0, 1.0) : cdouble(1.0, 0.0);
    lo.push_back(scale * parse_complex(ends[0]));
    hi.push_back(scale * parse_complex(ends[1]));
    if (lo.back() == hi.back()) throw ConfigError("domain '" + text + "': empty factor");
    pos = close + 1;
  }
  if (lo.empty()) throw ConfigError("empty domain");
  return Box(lo, hi);
}

std::string Method::name() const {
  switch (kind) {
    case MethodKind::full:
      return "full";
    case MethodKind::apsnap:
      return "apsnap";
    case MethodKind::subapsnap:
      return "subapsnap-" + to_string(strategy);
  }
  return "?";
}

Method parse_method(const std::string& text, Strategy fallback) {
  const std::string t = trim(text);
  if (t == "full") return {MethodKind::full, fallback};
  if (t == "apsnap") return {MethodKind::apsnap, fallback};
  if (t == "subapsnap") return {MethodKind::subapsnap, fallback};
  const std::string prefix = "subapsnap-";
  if (t.rfind(prefix, 0) == 0) return {MethodKind::subapsnap, parse_strategy(t.substr(prefix.size()))};
  throw ConfigError("unknown method '" + t + "' (expected full, apsnap or subapsnap-<strategy>)");
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), static_cast<long>(e.line()));
  }

  const std::set<std::string> known{"experiment", "problem", "snapshot", "selector",
                                    "test",       "krr",     "output"};
  for (const auto& kv : tree) {
    if (!known.count(kv.first)) throw ConfigError("unknown section [" + kv.first + "]");
    if (!kv.second.data().empty()) throw ConfigError("key '" + kv.first + "' outside any section");
  }
  auto section = [&](const std::string& name) {
    auto child = tree.get_child_optional(name);
    return Section(child ? &*child : nullptr, name);
  };

  ExperimentConfig cfg;
  cfg.source = source;
  const auto base = source.empty() ? std::filesystem::path() : source.parent_path();

  Section problem = section("problem");
  if (!problem.present()) throw ConfigError("missing [problem] section");
  cfg.problem = parse_problem(problem, base);
  problem.finish();
  validate_problem(cfg.problem);

  Section exp = section("experiment");
  if (auto v = exp.get("name")) cfg.name = *v;
  exp.integer("seed", cfg.seed);
  exp.flag("bounds", cfg.bounds);
  exp.flag("intervals", cfg.intervals);
  exp.integer("workers", cfg.workers);
  exp.integer("repetitions", cfg.repetitions);
  if (auto v = exp.get("lipschitz")) {
    if (*v == "estimate") {
      cfg.lipschitz = std::numeric_limits<double>::quiet_NaN();
    } else if (*v != "none") {
      cfg.lipschitz = parse_real(*v, exp.where("lipschitz"));
    }
  }
  const auto methods = exp.get("methods");

  Section snap = section("snapshot");
  snap.integer("r", cfg.snapshot.r);
  snap.read("layout", cfg.snapshot.layout, parse_layouts);
  if (auto v = snap.get("mode")) cfg.snapshot.mode = parse_basis_mode(*v);
  snap.real("pod_tol", cfg.snapshot.pod_tol);

  Section sel = section("selector");
  if (auto v = sel.get("strategy")) cfg.selector.strategy = parse_strategy(*v);
  sel.real("oversample", cfg.selector.oversample);
  sel.flag("augment_with_rhs", cfg.selector.augment_with_rhs);
  if (auto v = sel.get("anchor")) cfg.selector.anchor = parse_anchor_choice(*v);
  sel.integer("union_count", cfg.selector.union_count);
  cfg.selector.seed = cfg.seed;
  sel.integer("seed", cfg.selector.seed);

  Section test = section("test");
  test.integer("count", cfg.test.count);
  test.read("layout", cfg.test.layout, parse_layouts);
  if (auto v = test.get("domain")) cfg.test.domain = parse_domain(*v);

  Section krr = section("krr");
  if (krr.present()) {
    KrrGridSpec g;
    krr.integer("lambda_count", g.lambda_count);
    krr.integer("sigma_count", g.sigma_count);
    if (auto v = krr.get("lambda_layout")) g.lambda_layout = parse_point_layout(*v);
    if (auto v = krr.get("sigma_layout")) g.sigma_layout = parse_point_layout(*v);
    krr.flag("full_oracle", g.full_oracle);
    cfg.krr = g;
  }

  Section out = section("output");
  if (auto v = out.get("dir")) cfg.output_dir = *v;

  if (methods) {
    for (const auto& m : split(*methods, ',')) {
      if (!m.empty()) cfg.methods.push_back(parse_method(m, cfg.selector.strategy));
    }
  } else {
    cfg.methods = {{MethodKind::full, cfg.selector.strategy},
                   {MethodKind::apsnap, cfg.selector.strategy},
                   {MethodKind::subapsnap, cfg.selector.strategy}};
  }

  for (Section* s : {&exp, &snap, &sel, &test, &krr, &out}) s->finish();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str(), path);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

void validate_config(const ExperimentConfig& cfg) {
  validate_problem(cfg.problem);
  if (cfg.methods.empty()) throw ConfigError("at least one method is required");
  if (cfg.snapshot.r < 1) throw ConfigError("[snapshot] r must be positive");
  if (cfg.snapshot.pod_tol <= 0.0 || cfg.snapshot.pod_tol >= 1.0) {
    throw ConfigError("[snapshot] pod_tol must lie in (0, 1)");
  }
  if (cfg.selector.oversample < 1.0) throw ConfigError("[selector] oversample must be at least 1");
  if (cfg.selector.union_count < 1) throw ConfigError("[selector] union_count must be positive");
  if (cfg.test.count < 1) throw ConfigError("[test] count must be positive");
  if (cfg.workers < 1) throw ConfigError("[experiment] workers must be positive");
  if (cfg.repetitions < 1) throw ConfigError("[experiment] repetitions must be positive");
  if (cfg.lipschitz && *cfg.lipschitz < 0.0) throw ConfigError("[experiment] lipschitz must be nonnegative");

  const Box domain = problem_domain(cfg.problem);
  auto check_layouts = [&](const std::vector<PointLayout>& l, const std::string& where) {
    if (l.size() != 1 && static_cast<Index>(l.size()) != domain.dim()) {
      throw ConfigError(where + ": give one layout or one per parameter (" +
                        std::to_string(domain.dim()) + ")");
    }
  };
  check_layouts(cfg.snapshot.layout, "[snapshot] layout");
  check_layouts(cfg.test.layout, "[test] layout");
  if (cfg.test.domain) {
    const Box& t = *cfg.test.domain;
    if (t.dim() != domain.dim()) throw ConfigError("[test] domain has the wrong dimension");
    if (!domain.contains(Parameter(Eigen::Map<const Eigen::VectorXcd>(t.lo.data(), t.dim())), 1e-12) ||
        !domain.contains(Parameter(Eigen::Map<const Eigen::VectorXcd>(t.hi.data(), t.dim())), 1e-12)) {
      throw ConfigError("[test] domain " + format_box(t) + " leaves the problem domain " +
                        format_box(domain));
    }
  }
  if (cfg.bounds && domain.dim() != 1) {
    throw ConfigError("[experiment] bounds need a one-parameter problem");
  }
  if (cfg.krr) {
    if (!std::holds_alternative<KrrSpec>(cfg.problem)) throw ConfigError("[krr] needs a krr problem");
    if (cfg.krr->lambda_count < 2 || cfg.krr->sigma_count < 2) {
      throw ConfigError("[krr] grid needs at least 2 values per axis");
    }
    if (std::get<KrrSpec>(cfg.problem).n_test < 1) throw ConfigError("krr: empty test set");
  }
}

}  // namespace subapsnap
