#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "subapsnap/config.hpp"
#include "subapsnap/experiment.hpp"
#include "subapsnap/linalg.hpp"
#include "subapsnap/online.hpp"
#include "subapsnap/problems.hpp"

#include <span>

namespace py = pybind11;
using namespace subapsnap;

namespace {

Parameter to_parameter(const py::handle& p) {
  if (py::isinstance<py::float_>(p) || py::isinstance<py::int_>(p) || PyComplex_Check(p.ptr())) {
    return make_parameter(p.cast<cdouble>());
  }
  const auto values = p.cast<std::vector<cdouble>>();
  Parameter out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Index>(i)) = values[i];
  return out;
}

py::object from_parameter(const Parameter& p) {
  auto one = [](cdouble z) -> py::object {
    if (z.imag() == 0.0) return py::float_(z.real());
    return py::cast(z);
  };
  if (p.size() == 1) return one(p(0));
  py::tuple t(p.size());
  for (Index i = 0; i < p.size(); ++i) t[i] = one(p(i));
  return t;
}

py::object optional_number(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict row_dict(const ResultRow& r) {
  py::dict d;
  d["method"] = r.method;
  d["p"] = r.p;
  d["relative_residual"] = r.relative_residual;
  d["output_error"] = optional_number(r.output_error);
  d["sampled_residual"] = optional_number(r.sampled_residual);
  d["est_lower"] = optional_number(r.est_lower);
  d["est_upper"] = optional_number(r.est_upper);
  d["wall_time_s"] = r.wall_time_s;
  d["actual_ratio"] = optional_number(r.actual_ratio);
  d["bound_A"] = optional_number(r.bound_a);
  d["bound_Ab"] = optional_number(r.bound_ab);
  d["thm"] = optional_number(r.thm);
  d["cor_closest"] = optional_number(r.cor_closest);
  d["cor_global"] = optional_number(r.cor_global);
  d["flags"] = r.flags;
  return d;
}

// Offline state for one problem: system, basis and plans.
template <class Scalar>
struct Typed {
  SystemPtr<Scalar> system;
  BasisPtr<Scalar> basis;
  PlanSet<Scalar> plans;

  explicit Typed(const ExperimentConfig& cfg, SystemPtr<Scalar> sys) : system(std::move(sys)) {
    SnapshotOptions opt;
    opt.mode = cfg.snapshot.mode;
    opt.pod_tol = cfg.snapshot.pod_tol;
    opt.workers = cfg.workers;
    opt.keep_raw = false;
    const auto& domain = system->domain();
    const auto points = cfg.snapshot.layout.size() == 1
                            ? default_snapshot_points(domain, cfg.snapshot.r, cfg.snapshot.layout[0])
                            : default_snapshot_points(domain, cfg.snapshot.r, cfg.snapshot.layout);
    basis = std::make_shared<const SnapshotBasis<Scalar>>(build_snapshot(*system, points, opt));
    plans = precompute_plans(system, basis, build_selectors(*system, *basis, cfg.selector));
  }

  py::dict solve(const Parameter& p, bool interval, bool want_x) const {
    const auto& plan = plans.for_point(p);
    const auto sol = solve_online(plan, p, interval);
    const Vector<Scalar> x = lift(plan, sol);
    py::dict d;
    d["coefficients"] = sol.coefficients;
    d["sampled_residual"] = sol.sampled_residual;
    d["relative_residual"] = relative_residual(*system, p, x);
    d["output"] = sol.output ? py::cast(*sol.output) : py::object(py::none());
    if (sol.interval) d["interval"] = py::make_tuple(sol.interval->lower, sol.interval->upper);
    if (want_x) d["x"] = x;
    return d;
  }

  py::dict apsnap(const Parameter& p) const {
    const auto sol = solve_apsnap(*system, *basis, p);
    py::dict d;
    d["coefficients"] = sol.coefficients;
    d["relative_residual"] = sol.relative_residual();
    return d;
  }

  Vector<Scalar> full(const Parameter& p) const { return full_solve(*system, p); }
};

class Model {
  template <class Scalar>
  void make(const ExperimentConfig& cfg, SystemPtr<Scalar> sys) {
    impl_ = std::make_shared<Typed<Scalar>>(cfg, std::move(sys));
  }

  template <class F>
  auto visit(F&& f) const {
    return std::visit([&](const auto& t) { return f(*t); }, impl_);
  }

  std::variant<std::shared_ptr<Typed<double>>, std::shared_ptr<Typed<cdouble>>> impl_;

 public:
  explicit Model(const ExperimentConfig& cfg) {
    const AnySystem sys = build_any_problem(cfg.problem);
    std::visit([&](const auto& s) { make(cfg, s); }, sys);
  }

  bool is_complex() const { return std::holds_alternative<std::shared_ptr<Typed<cdouble>>>(impl_); }
  Index n() const { return visit([](const auto& t) { return t.system->size(); }); }
  Index rank() const { return visit([](const auto& t) { return t.basis->rank(); }); }

  Eigen::VectorXd singular_values() const {
    return visit([](const auto& t) { return t.basis->singular_values; });
  }

  py::list snapshot_points() const {
    return visit([](const auto& t) {
      py::list out;
      for (const auto& p : t.basis->points) out.append(from_parameter(p));
      return out;
    });
  }

  py::list selectors() const {
    return visit([](const auto& t) {
      py::list out;
      for (const auto& plan : t.plans.plans) {
        py::dict d;
        d["strategy"] = to_string(plan.selector.strategy);
        d["indices"] = plan.selector.indices;
        d["weights"] = plan.selector.weights;
        py::list anchors;
        for (const auto& a : plan.selector.anchors) anchors.append(from_parameter(a));
        d["anchors"] = anchors;
        out.append(d);
      }
      return out;
    });
  }

  py::dict solve(const py::handle& p, bool interval, bool want_x) const {
    const Parameter q = to_parameter(p);
    return visit([&](const auto& t) { return t.solve(q, interval, want_x); });
  }

  py::dict apsnap(const py::handle& p) const {
    const Parameter q = to_parameter(p);
    return visit([&](const auto& t) { return t.apsnap(q); });
  }

  py::object full(const py::handle& p) const {
    const Parameter q = to_parameter(p);
    return visit([&](const auto& t) { return py::cast(t.full(q)); });
  }

};

py::dict result_dict(const ExperimentResult& res) {
  py::dict d;
  d["name"] = res.name;
  d["problem"] = res.problem;
  d["n"] = res.n;
  d["rank"] = res.rank;
  d["singular_values"] = res.singular_values;
  py::list rows;
  for (const auto& r : res.rows) rows.append(row_dict(r));
  d["rows"] = rows;
  py::list methods;
  for (const auto& m : res.methods) {
    py::dict s;
    s["method"] = m.method;
    s["max_residual"] = m.max_residual;
    s["median_residual"] = m.median_residual;
    s["max_output_error"] = optional_number(m.max_output_error);
    s["online_total_s"] = m.online_total_s;
    s["per_point_s"] = m.per_point_s;
    s["points"] = m.points;
    methods.append(s);
  }
  d["methods"] = methods;
  d["phases"] = res.phases;
  d["lipschitz"] = optional_number(res.lipschitz);
  if (res.krr) {
    py::dict k;
    k["best_lambda"] = res.krr->best_lambda;
    k["best_sigma"] = res.krr->best_sigma;
    k["best_rmse"] = res.krr->best_rmse;
    k["full_lambda"] = optional_number(res.krr->full_lambda);
    k["full_sigma"] = optional_number(res.krr->full_sigma);
    k["argmin_match"] = res.krr->argmin_match();
    k["geomean_residual"] = res.krr->geomean_residual;
    k["online_per_pair_s"] = res.krr->online_per_pair_s;
    k["full_per_pair_s"] = optional_number(res.krr->full_per_pair_s);
    d["krr"] = k;
  }
  return d;
}

template <class Scalar>
py::tuple select(const Matrix<Scalar>& b, const std::optional<Vector<Scalar>>& rhs, const std::string& strategy,
                 double oversample, bool augment, std::uint64_t seed) {
  SelectorConfig cfg;
  cfg.strategy = parse_strategy(strategy);
  cfg.oversample = oversample;
  cfg.augment_with_rhs = augment;
  Rng rng(seed);
  const RowSelector sel = select_rows<Scalar>(b, rhs ? &*rhs : nullptr, cfg, rng);
  return py::make_tuple(sel.indices, sel.weights);
}

template <class Scalar>
Vector<Scalar> least_squares(const Matrix<Scalar>& m, const Vector<Scalar>& rhs,
                             const std::optional<std::vector<double>>& weights) {
  const std::vector<double> w = weights.value_or(std::vector<double>{});
  return linalg::solve_ls<Scalar>(m, rhs, std::span<const double>(w));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Snapshot basis plus row subsampling for parametric linear systems";

  // derived types registered last so their translators run first
  auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto& config_error = py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", config_error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  auto& numerical_error = py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<RankDeficientError>(m, "RankDeficientError", numerical_error.ptr());

  py::class_<ExperimentConfig>(m, "Config")
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("workers", &ExperimentConfig::workers)
      .def_readwrite("repetitions", &ExperimentConfig::repetitions)
      .def_readwrite("bounds", &ExperimentConfig::bounds)
      .def_readwrite("intervals", &ExperimentConfig::intervals)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_property_readonly("problem", [](const ExperimentConfig& c) { return problem_kind(c.problem); })
      .def_property_readonly("methods",
                             [](const ExperimentConfig& c) {
                               std::vector<std::string> out;
                               for (const auto& x : c.methods) out.push_back(x.name());
                               return out;
                             })
      .def_property(
          "r", [](const ExperimentConfig& c) { return c.snapshot.r; },
          [](ExperimentConfig& c, Index r) { c.snapshot.r = r; })
      .def_property(
          "test_count", [](const ExperimentConfig& c) { return c.test.count; },
          [](ExperimentConfig& c, Index k) { c.test.count = k; })
      .def_property(
          "strategy", [](const ExperimentConfig& c) { return to_string(c.selector.strategy); },
          [](ExperimentConfig& c, const std::string& s) { c.selector.strategy = parse_strategy(s); })
      .def("validate", &validate_config);

  m.def("parse_config", &parse_config, py::arg("text"), py::arg("source") = std::filesystem::path{});
  m.def("load_config", &load_config, py::arg("path"));

  m.def(
      "run_experiment",
      [](const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out) {
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
        }
        if (out) write_experiment(res, *out);
        return result_dict(res);
      },
      py::arg("config"), py::arg("out") = py::none(),
      "Offline and online phases for every method; writes CSV/JSON when `out` is given.");

  py::class_<Model>(m, "Model")
      .def(py::init([](const ExperimentConfig& cfg) {
             py::gil_scoped_release release;
             return std::make_unique<Model>(cfg);
           }),
           py::arg("config"))
      .def_property_readonly("n", &Model::n)
      .def_property_readonly("rank", &Model::rank)
      .def_property_readonly("is_complex", &Model::is_complex)
      .def_property_readonly("singular_values", &Model::singular_values)
      .def_property_readonly("snapshot_points", &Model::snapshot_points)
      .def_property_readonly("selectors", &Model::selectors)
      .def("solve", &Model::solve, py::arg("p"), py::arg("interval") = false, py::arg("x") = false)
      .def("apsnap", &Model::apsnap, py::arg("p"))
      .def("full_solve", &Model::full, py::arg("p"));

  // real overloads first so float arrays are not promoted to complex
  m.def("leverage_scores", &leverage_scores<double>, py::arg("q"));
  m.def("leverage_scores", &leverage_scores<cdouble>, py::arg("q"));
  m.def("select_rows", &select<double>, py::arg("b"), py::arg("rhs") = py::none(), py::arg("strategy") = "leverage",
        py::arg("oversample") = 4.0, py::arg("augment") = true, py::arg("seed") = 0);
  m.def("select_rows", &select<cdouble>, py::arg("b"), py::arg("rhs") = py::none(), py::arg("strategy") = "leverage",
        py::arg("oversample") = 4.0, py::arg("augment") = true, py::arg("seed") = 0);
  m.def("solve_ls", &least_squares<double>, py::arg("m"), py::arg("rhs"), py::arg("weights") = py::none());
  m.def("solve_ls", &least_squares<cdouble>, py::arg("m"), py::arg("rhs"), py::arg("weights") = py::none());
  m.def("interval_epsilon", &interval_epsilon, py::arg("r"), py::arg("s"));
}
