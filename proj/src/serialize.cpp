#include "subapsnap/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace subapsnap {

using json = nlohmann::json;

namespace {

constexpr int format_version = 1;

static_assert(std::endian::native == std::endian::little, "artifacts assume a little-endian host");

template <class Scalar>
const char* scalar_name() {
  return is_complex_v<Scalar> ? "complex" : "real";
}

json header(const char* kind, const char* scalar) {
  return {{"format", "subapsnap"}, {"version", format_version}, {"kind", kind}, {"scalar", scalar}};
}

void check_header(const json& j, const char* kind, const char* scalar) {
  if (!j.is_object() || j.value("format", "") != "subapsnap") {
    throw ConfigError("not a subapsnap artifact");
  }
  if (j.value("version", -1) != format_version) {
    throw ConfigError("unsupported artifact version " + std::to_string(j.value("version", -1)));
  }
  if (j.value("kind", "") != kind) {
    throw ConfigError(std::string("expected a ") + kind + " artifact, got " + j.value("kind", "?"));
  }
  if (scalar && j.value("scalar", "") != scalar) {
    throw ConfigError(std::string("artifact holds ") + j.value("scalar", "?") + " data, expected " +
                      scalar);
  }
}

template <class Derived>
json encode_matrix(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> dense = m;
  json::binary_t bytes(std::vector<std::uint8_t>(sizeof(Scalar) * static_cast<std::size_t>(dense.size())));
  if (dense.size() > 0) std::memcpy(bytes.data(), dense.data(), bytes.size());
  return {{"rows", dense.rows()}, {"cols", dense.cols()}, {"data", std::move(bytes)}};
}

template <class Scalar>
Matrix<Scalar> decode_matrix(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto& bytes = j.at("data").get_binary();
  if (rows < 0 || cols < 0 || bytes.size() != sizeof(Scalar) * static_cast<std::size_t>(rows * cols)) {
    throw ConfigError("corrupt matrix in artifact");
  }
  Matrix<Scalar> m(rows, cols);
  if (m.size() > 0) std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

json encode_parameter(const Parameter& p) {
  json out = json::array();
  for (Index k = 0; k < p.size(); ++k) out.push_back({p(k).real(), p(k).imag()});
  return out;
}

Parameter decode_parameter(const json& j) {
  Parameter p(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    p(static_cast<Index>(k)) = {j[k].at(0).get<double>(), j[k].at(1).get<double>()};
  }
  return p;
}

json encode_points(const std::vector<Parameter>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back(encode_parameter(p));
  return out;
}

std::vector<Parameter> decode_points(const json& j) {
  std::vector<Parameter> out;
  for (const auto& p : j) out.push_back(decode_parameter(p));
  return out;
}

json encode_selector(const RowSelector& s) {
  return {{"n", s.n},
          {"indices", s.indices},
          {"weights", s.weights},
          {"strategy", to_string(s.strategy)},
          {"seed", s.seed},
          {"anchors", encode_points(s.anchors)}};
}

RowSelector decode_selector(const json& j) {
  RowSelector s;
  s.n = j.at("n").get<Index>();
  s.indices = j.at("indices").get<std::vector<Index>>();
  s.weights = j.at("weights").get<std::vector<double>>();
  s.strategy = parse_strategy(j.at("strategy").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.anchors = decode_points(j.at("anchors"));
  for (Index i : s.indices) {
    if (i < 0 || i >= s.n) throw ConfigError("selector index out of range in artifact");
  }
  if (s.weighted() && s.weights.size() != s.indices.size()) {
    throw ConfigError("selector weights and indices differ in length in artifact");
  }
  return s;
}

Bytes to_bytes(const json& j) { return json::to_cbor(j); }

json from_bytes(const Bytes& bytes) {
  try {
    return json::from_cbor(bytes);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("artifact is not valid CBOR: ") + e.what());
  }
}

template <class F>
auto guarded(F f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed artifact: ") + e.what());
  }
}

}  // namespace

template <class Scalar>
Bytes encode_basis(const SnapshotBasis<Scalar>& basis) {
  json j = header("basis", scalar_name<Scalar>());
  j["points"] = encode_points(basis.points);
  j["raw"] = encode_matrix(basis.raw);
  j["q"] = encode_matrix(basis.q);
  j["singular_values"] = encode_matrix(basis.singular_values);
  j["mode"] = to_string(basis.mode);
  j["pod_tol"] = basis.pod_tol;
  return to_bytes(j);
}

template <class Scalar>
SnapshotBasis<Scalar> decode_basis(const Bytes& bytes) {
  const json j = from_bytes(bytes);
  check_header(j, "basis", scalar_name<Scalar>());
  return guarded([&] {
    SnapshotBasis<Scalar> b;
    b.points = decode_points(j.at("points"));
    b.raw = decode_matrix<Scalar>(j.at("raw"));
    b.q = decode_matrix<Scalar>(j.at("q"));
    b.singular_values = decode_matrix<double>(j.at("singular_values"));
    b.mode = parse_basis_mode(j.at("mode").get<std::string>());
    b.pod_tol = j.at("pod_tol").get<double>();
    return b;
  });
}

Bytes encode_selectors(const std::vector<RowSelector>& selectors) {
  json j = header("selectors", "real");
  j["selectors"] = json::array();
  for (const auto& s : selectors) j["selectors"].push_back(encode_selector(s));
  return to_bytes(j);
}

std::vector<RowSelector> decode_selectors(const Bytes& bytes) {
  const json j = from_bytes(bytes);
  check_header(j, "selectors", nullptr);
  return guarded([&] {
    std::vector<RowSelector> out;
    for (const auto& s : j.at("selectors")) out.push_back(decode_selector(s));
    return out;
  });
}

template <class Scalar>
Bytes encode_plans(const PlanSet<Scalar>& plans) {
  json j = header("plans", scalar_name<Scalar>());
  j["plans"] = json::array();
  for (const auto& plan : plans.plans) {
    json p;
    p["selector"] = encode_selector(plan.selector);
    p["fallback"] = plan.fallback;
    p["sq"] = encode_matrix(plan.sq);
    p["blocks"] = json::array();
    for (const auto& b : plan.blocks) p["blocks"].push_back(encode_matrix(b));
    if (plan.output_projection) p["output_projection"] = encode_matrix(*plan.output_projection);
    j["plans"].push_back(std::move(p));
  }
  j["anchors"] = encode_points(plans.anchors);
  return to_bytes(j);
}

template <class Scalar>
PlanSet<Scalar> decode_plans(const Bytes& bytes, SystemPtr<Scalar> system, BasisPtr<Scalar> basis) {
  const json j = from_bytes(bytes);
  check_header(j, "plans", scalar_name<Scalar>());
  PlanSet<Scalar> set = guarded([&] {
    PlanSet<Scalar> out;
    out.anchors = decode_points(j.at("anchors"));
    for (const auto& p : j.at("plans")) {
      OnlinePlan<Scalar> plan;
      plan.system = system;
      plan.basis = basis;
      plan.selector = decode_selector(p.at("selector"));
      plan.fallback = p.at("fallback").get<bool>();
      plan.sq = decode_matrix<Scalar>(p.at("sq"));
      for (const auto& b : p.at("blocks")) plan.blocks.push_back(decode_matrix<Scalar>(b));
      if (p.contains("output_projection")) {
        plan.output_projection = decode_matrix<Scalar>(p.at("output_projection"));
      }
      out.plans.push_back(std::move(plan));
    }
    return out;
  });

  for (const auto& plan : set.plans) {
    const Index s = plan.selector.size();
    const Index r = basis->rank();
    if (plan.selector.n != system->size()) {
      throw DimensionError("plan artifact was built for n=" + std::to_string(plan.selector.n) +
                           ", system has n=" + std::to_string(system->size()));
    }
    if (plan.sq.rows() != s || plan.sq.cols() != r) throw DimensionError("plan artifact does not match the basis");
    if (!plan.fallback && plan.blocks.size() != system->affine_terms().size()) {
      throw DimensionError("plan artifact has a different number of affine terms");
    }
    for (const auto& b : plan.blocks) {
      if (b.rows() != s || b.cols() != r) throw DimensionError("plan artifact block has the wrong shape");
    }
  }
  if (set.plans.size() != set.anchors.size()) throw ConfigError("plan artifact: anchors and plans differ");
  return set;
}

void write_bytes(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

#define SUBAPSNAP_INSTANTIATE(S)                                              \
  template Bytes encode_basis<S>(const SnapshotBasis<S>&);                    \
  template SnapshotBasis<S> decode_basis<S>(const Bytes&);                    \
  template Bytes encode_plans<S>(const PlanSet<S>&);                          \
  template PlanSet<S> decode_plans<S>(const Bytes&, SystemPtr<S>, BasisPtr<S>);

SUBAPSNAP_INSTANTIATE(double)
SUBAPSNAP_INSTANTIATE(cdouble)

#undef SUBAPSNAP_INSTANTIATE

}  // namespace subapsnap
