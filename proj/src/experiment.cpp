#include "subapsnap/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "subapsnap/bounds.hpp"
#include "subapsnap/linalg.hpp"
#include "subapsnap/online.hpp"
#include "subapsnap/problems.hpp"

namespace subapsnap {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
auto in_phase(const std::string& phase, F&& f) -> decltype(f()) {
  const std::string tag = "phase '" + phase + "': ";
  try {
    return f();
  } catch (const RankDeficientError& e) {
    throw RankDeficientError(tag + e.what(), e.column());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(tag + e.what());
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Index of the repetition whose total is the (lower) median.
std::size_t median_rep(const std::vector<double>& totals) {
  std::vector<std::size_t> order(totals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return totals[a] < totals[b]; });
  return order[(order.size() - 1) / 2];
}

MethodSummary summarize(const std::string& method, const std::vector<ResultRow>& rows, double total) {
  MethodSummary s;
  s.method = method;
  std::vector<double> res;
  for (const auto& r : rows) {
    if (r.method != method) continue;
    res.push_back(r.relative_residual);
    if (r.output_error) s.max_output_error = std::max(s.max_output_error.value_or(0.0), *r.output_error);
  }
  s.points = static_cast<Index>(res.size());
  if (!res.empty()) {
    s.max_residual = *std::max_element(res.begin(), res.end());
    s.median_residual = median(res);
  }
  s.online_total_s = total;
  s.per_point_s = res.empty() ? 0.0 : total / static_cast<double>(res.size());
  return s;
}

template <class Scalar>
std::optional<Scalar> output_of(const ParametricSystem<Scalar>& sys, const Vector<Scalar>& x) {
  if (!sys.output()) return std::nullopt;
  return sys.output()->dot(x);
}

template <class Scalar>
ExperimentResult run_typed(const ExperimentConfig& cfg, SystemPtr<Scalar> sys) {
  ExperimentResult res;
  res.name = cfg.name;
  res.problem = problem_kind(cfg.problem);
  res.n = sys->size();
  const auto test = sweep_points(cfg);
  const std::size_t count = test.size();
  const int reps = cfg.repetitions;

  auto has = [&](MethodKind k) {
    return std::any_of(cfg.methods.begin(), cfg.methods.end(), [&](const Method& m) { return m.kind == k; });
  };

  // Reference solves: timed when "full" is requested, and the source of the
  // reference output values.
  std::vector<std::optional<Scalar>> reference(count);
  if (has(MethodKind::full) || sys->output()) {
    const int full_reps = has(MethodKind::full) ? reps : 1;
    std::vector<std::vector<double>> times(full_reps, std::vector<double>(count));
    std::vector<double> residual(count);
    in_phase("full", [&] {
      for (int rep = 0; rep < full_reps; ++rep) {
        for (std::size_t i = 0; i < count; ++i) {
          const auto t0 = Clock::now();
          const Vector<Scalar> x = full_solve(*sys, test[i]);
          times[rep][i] = since(t0);
          if (rep == 0) {
            residual[i] = relative_residual(*sys, test[i], x);
            reference[i] = output_of(*sys, x);
          }
        }
      }
    });
    if (has(MethodKind::full)) {
      std::vector<double> totals;
      for (const auto& t : times) totals.push_back(std::accumulate(t.begin(), t.end(), 0.0));
      const std::size_t m = median_rep(totals);
      for (std::size_t i = 0; i < count; ++i) {
        ResultRow row;
        row.method = "full";
        row.p = format_parameter(test[i]);
        row.relative_residual = residual[i];
        if (reference[i]) row.output_error = 0.0;
        row.wall_time_s = times[m][i];
        res.rows.push_back(row);
      }
      res.phases["full"] = totals[m];
      res.methods.push_back(summarize("full", res.rows, totals[m]));
    }
  }

  const bool any_snapshot = has(MethodKind::apsnap) || has(MethodKind::subapsnap);
  if (!any_snapshot) return res;

  SnapshotOptions sopt;
  sopt.mode = cfg.snapshot.mode;
  sopt.pod_tol = cfg.snapshot.pod_tol;
  sopt.workers = cfg.workers;
  sopt.keep_raw = false;
  const auto& domain = sys->domain();
  const auto points = cfg.snapshot.layout.size() == 1
                          ? default_snapshot_points(domain, cfg.snapshot.r, cfg.snapshot.layout[0])
                          : default_snapshot_points(domain, cfg.snapshot.r, cfg.snapshot.layout);
  BasisPtr<Scalar> basis;
  {
    std::vector<double> totals;
    in_phase("snapshot", [&] {
      for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = Clock::now();
        auto b = build_snapshot(*sys, points, sopt);
        totals.push_back(since(t0));
        if (!basis) basis = std::make_shared<const SnapshotBasis<Scalar>>(std::move(b));
      }
    });
    res.phases["snapshot"] = median(totals);
  }
  res.rank = basis->rank();
  res.snapshot_points = basis->points;
  res.singular_values = basis->singular_values;
  std::optional<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> cq;
  if (sys->output()) cq = sys->output()->adjoint() * basis->q;

  if (has(MethodKind::apsnap)) {
    std::vector<std::vector<double>> times(reps, std::vector<double>(count));
    std::vector<ResultRow> rows(count);
    in_phase("apsnap", [&] {
      for (int rep = 0; rep < reps; ++rep) {
        for (std::size_t i = 0; i < count; ++i) {
          const auto t0 = Clock::now();
          const auto sol = solve_apsnap(*sys, *basis, test[i]);
          times[rep][i] = since(t0);
          if (rep == 0) {
            rows[i].method = "apsnap";
            rows[i].p = format_parameter(test[i]);
            rows[i].relative_residual = sol.relative_residual();
            if (cq && reference[i]) rows[i].output_error = std::abs((*cq * sol.coefficients)(0) - *reference[i]);
          }
        }
      }
    });
    std::vector<double> totals;
    for (const auto& t : times) totals.push_back(std::accumulate(t.begin(), t.end(), 0.0));
    const std::size_t m = median_rep(totals);
    for (std::size_t i = 0; i < count; ++i) {
      rows[i].wall_time_s = times[m][i];
      res.rows.push_back(rows[i]);
    }
    res.phases["apsnap"] = totals[m];
    res.methods.push_back(summarize("apsnap", res.rows, totals[m]));
  }

  std::optional<double> lipschitz = cfg.lipschitz;
  if (cfg.bounds && lipschitz && std::isnan(*lipschitz)) {
    lipschitz = in_phase("lipschitz", [&] {
      return estimate_lipschitz(*sys, default_snapshot_points(domain, 9, PointLayout::equispaced)).value;
    });
  }
  if (cfg.bounds) res.lipschitz = lipschitz;

  for (const auto& method : cfg.methods) {
    if (method.kind != MethodKind::subapsnap) continue;
    const std::string name = method.name();
    SelectorConfig sc = cfg.selector;
    sc.strategy = method.strategy;

    PlanSet<Scalar> plans;
    {
      std::vector<double> totals;
      in_phase("offline-" + name, [&] {
        for (int rep = 0; rep < reps; ++rep) {
          const auto t0 = Clock::now();
          auto set = precompute_plans(sys, basis, build_selectors(*sys, *basis, sc));
          totals.push_back(since(t0));
          if (rep == 0) plans = std::move(set);
        }
      });
      res.phases["offline-" + name] = median(totals);
    }

    BatchOptions bopt;
    bopt.want_interval = cfg.intervals && plans.plans.front().selector.weighted();
    bopt.workers = cfg.workers;
    std::vector<BatchResult<Scalar>> batches;
    in_phase("online-" + name, [&] {
      // untimed warm-up
      (void)solve_online(plans.for_point(test.front()), test.front());
      for (int rep = 0; rep < reps; ++rep) batches.push_back(solve_batch(plans, test, bopt));
      for (std::size_t i = 0; i < count; ++i) {
        if (!batches.front().error[i].empty()) throw NumericalError(batches.front().error[i]);
      }
    });
    std::vector<double> totals;
    for (const auto& b : batches) totals.push_back(b.busy_time);
    const std::size_t m = median_rep(totals);
    const auto& batch = batches[m];
    res.phases["online-" + name] = totals[m];

    std::vector<std::unique_ptr<BoundContext<Scalar>>> contexts(plans.plans.size());
    in_phase("evaluate-" + name, [&] {
      for (std::size_t i = 0; i < count; ++i) {
        const Parameter& p = test[i];
        const Vector<Scalar> x = basis->q * batches.front().coefficients[i];
        const double bnorm = sys->rhs_vector(p).norm();
        const double scale = bnorm > 0.0 ? 1.0 / bnorm : 1.0;
        ResultRow row;
        row.method = name;
        row.p = format_parameter(p);
        row.relative_residual = relative_residual(*sys, p, x);
        row.sampled_residual = batch.sampled_residual[i] * scale;
        if (bopt.want_interval) {
          row.est_lower = batch.lower[i] * scale;
          row.est_upper = batch.upper[i] * scale;
        }
        if (reference[i] && batch.output[i]) row.output_error = std::abs(*batch.output[i] - *reference[i]);
        row.wall_time_s = batch.wall_time[i];
        if (cfg.bounds) {
          const std::size_t k = plans.plans.size() == 1 ? 0 : static_cast<std::size_t>(nearest_point(plans.anchors, p));
          if (!contexts[k]) {
            typename BoundContext<Scalar>::Options opt;
            opt.lipschitz = lipschitz;
            opt.p0 = plans.anchors[k];
            contexts[k] = std::make_unique<BoundContext<Scalar>>(sys, basis, plans.plans[k].selector, opt);
          }
          const auto rep = contexts[k]->evaluate(p);
          row.actual_ratio = rep.ratio.ratio;
          row.bound_a = rep.lemma.bound_a;
          row.bound_ab = rep.lemma.bound_ab;
          if (rep.theorem) row.thm = rep.theorem->value;
          if (rep.cor_closest) row.cor_closest = rep.cor_closest->value;
          if (rep.cor_global) row.cor_global = rep.cor_global->value;
          row.flags = rep.flags();
        }
        res.rows.push_back(row);
      }
    });
    res.methods.push_back(summarize(name, res.rows, totals[m]));
  }
  return res;
}

}  // namespace

std::vector<Index> subgrid_indices(Index count, Index m) {
  if (count < 1 || m < 1) throw ConfigError("subgrid needs positive sizes");
  if (m > count) throw ConfigError("subgrid of " + std::to_string(m) + " picks from " + std::to_string(count) + " values");
  std::vector<Index> out;
  if (m == 1) return {(count - 1) / 2};
  for (Index k = 0; k < m; ++k) {
    out.push_back(static_cast<Index>(std::llround(static_cast<double>(k) * static_cast<double>(count - 1) /
                                                  static_cast<double>(m - 1))));
  }
  return out;
}

std::vector<Parameter> sweep_points(const ExperimentConfig& cfg) {
  const Box domain = cfg.test.domain ? *cfg.test.domain : problem_domain(cfg.problem);
  if (cfg.test.layout.size() == 1) return default_snapshot_points(domain, cfg.test.count, cfg.test.layout[0]);
  return default_snapshot_points(domain, cfg.test.count, cfg.test.layout);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.krr) return run_krr_grid(cfg);
  const AnySystem sys = in_phase("build", [&] { return build_any_problem(cfg.problem); });
  return std::visit([&](const auto& s) { return run_typed(cfg, s); }, sys);
}

ExperimentResult run_krr_grid(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (!cfg.krr) throw ConfigError("run_krr_grid needs a [krr] section");
  const auto& spec = std::get<KrrSpec>(cfg.problem);
  const auto& grid = *cfg.krr;
  const int reps = cfg.repetitions;

  ExperimentResult res;
  res.name = cfg.name;
  res.problem = "krr";
  const KrrData data = make_krr_data(spec);
  if (data.t_test.size() == 0) throw ConfigError("krr: empty test set");
  const auto sys = build_krr(spec, data);
  res.n = sys->size();
  const Box& domain = sys->domain();
  const auto lambdas = axis_points(domain.lo[0], domain.hi[0], grid.lambda_count, grid.lambda_layout);
  const auto sigmas = axis_points(domain.lo[1], domain.hi[1], grid.sigma_count, grid.sigma_layout);

  const Index side = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(cfg.snapshot.r)) - 1e-9));
  std::vector<Parameter> points;
  for (Index a : subgrid_indices(grid.lambda_count, side)) {
    for (Index b : subgrid_indices(grid.sigma_count, side)) points.push_back(make_parameter({lambdas[a], sigmas[b]}));
  }

  SnapshotOptions sopt;
  sopt.mode = cfg.snapshot.mode;
  sopt.pod_tol = cfg.snapshot.pod_tol;
  sopt.workers = cfg.workers;
  BasisPtr<double> basis;
  {
    std::vector<double> totals;
    in_phase("snapshot", [&] {
      for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = Clock::now();
        auto b = build_snapshot(*sys, points, sopt);
        totals.push_back(since(t0));
        if (!basis) basis = std::make_shared<const SnapshotBasis<double>>(std::move(b));
      }
    });
    res.phases["snapshot"] = median(totals);
  }
  res.rank = basis->rank();
  res.snapshot_points = basis->points;
  res.singular_values = basis->singular_values;
  const Eigen::MatrixXd& q = basis->q;

  const std::string name = "subapsnap-" + to_string(cfg.selector.strategy);
  PlanSet<double> plans;
  {
    std::vector<double> totals;
    in_phase("offline-" + name, [&] {
      for (int rep = 0; rep < reps; ++rep) {
        const auto t0 = Clock::now();
        auto set = precompute_plans(sys, basis, build_selectors(*sys, *basis, cfg.selector));
        totals.push_back(since(t0));
        if (rep == 0) plans = std::move(set);
      }
    });
    res.phases["offline-" + name] = median(totals);
  }

  const Index nl = grid.lambda_count;
  const Index ns = grid.sigma_count;
  const std::size_t pairs = static_cast<std::size_t>(nl * ns);
  const double test_scale = 1.0 / std::sqrt(static_cast<double>(data.y_test.size()));
  std::vector<Eigen::VectorXd> coef(pairs);
  std::vector<double> rmse(pairs);

  // Online: rows S K(sigma) Q once per sigma and plan, then one small
  // weighted least-squares problem per lambda.
  std::vector<std::vector<double>> times(reps, std::vector<double>(pairs));
  in_phase("online-" + name, [&] {
    for (int rep = 0; rep < reps; ++rep) {
      for (Index j = 0; j < ns; ++j) {
        const double sigma = sigmas[j].real();
        const auto t0 = Clock::now();
        const Eigen::MatrixXd ktq = kernel_matrix(data.t_test, data.t_train, sigma) * q;
        std::vector<std::optional<Eigen::MatrixXd>> ksq(plans.plans.size());
        const double shared = since(t0) / static_cast<double>(nl);
        for (Index i = 0; i < nl; ++i) {
          const auto t1 = Clock::now();
          const Parameter p = make_parameter({lambdas[i], sigmas[j]});
          const std::size_t k = plans.plans.size() == 1 ? 0 : static_cast<std::size_t>(nearest_point(plans.anchors, p));
          const auto& plan = plans.plans[k];
          const auto& idx = plan.selector.indices;
          if (!ksq[k]) {
            Eigen::VectorXd ts(static_cast<Index>(idx.size()));
            for (std::size_t r = 0; r < idx.size(); ++r) ts(static_cast<Index>(r)) = data.t_train(idx[r]);
            ksq[k] = kernel_matrix(ts, data.t_train, sigma) * q;
          }
          const Eigen::MatrixXd m = *ksq[k] + lambdas[i].real() * plan.sq;
          Eigen::VectorXd rhs(static_cast<Index>(idx.size()));
          for (std::size_t r = 0; r < idx.size(); ++r) rhs(static_cast<Index>(r)) = data.y_train(idx[r]);
          const std::size_t cell = static_cast<std::size_t>(j * nl + i);
          coef[cell] = linalg::solve_ls<double>(m, rhs, std::span<const double>(plan.selector.weights));
          rmse[cell] = (ktq * coef[cell] - data.y_test).norm() * test_scale;
          times[rep][cell] = since(t1) + shared;
        }
      }
    }
  });
  std::vector<double> totals;
  for (const auto& t : times) totals.push_back(std::accumulate(t.begin(), t.end(), 0.0));
  const std::size_t mrep = median_rep(totals);
  res.phases["online-" + name] = totals[mrep];

  // True residuals of the SubApSnap solutions, and the full-solve oracle.
  std::vector<double> residual(pairs);
  std::vector<double> rmse_full(pairs, std::nan(""));
  std::vector<double> residual_full(pairs, std::nan(""));
  std::vector<double> time_full(pairs, 0.0);
  const double ynorm = data.y_train.norm();
  in_phase("full", [&] {
    for (Index j = 0; j < ns; ++j) {
      const double sigma = sigmas[j].real();
      auto t0 = Clock::now();
      const Eigen::MatrixXd k = kernel_matrix(data.t_train, data.t_train, sigma);
      const double assemble = since(t0) / static_cast<double>(nl);
      const Eigen::MatrixXd kq = k * q;
      const Eigen::MatrixXd kt = kernel_matrix(data.t_test, data.t_train, sigma);
      for (Index i = 0; i < nl; ++i) {
        const std::size_t cell = static_cast<std::size_t>(j * nl + i);
        const double lambda = lambdas[i].real();
        const Eigen::VectorXd qc = q * coef[cell];
        residual[cell] = (kq * coef[cell] + lambda * qc - data.y_train).norm() / ynorm;
        if (!grid.full_oracle) continue;
        t0 = Clock::now();
        Eigen::MatrixXd a = k;
        a.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) {
          throw SolveError("Cholesky failed at (lambda, sigma) = (" + std::to_string(lambda) + ", " +
                           std::to_string(sigma) + ")");
        }
        const Eigen::VectorXd x = llt.solve(data.y_train);
        time_full[cell] = since(t0) + assemble;
        residual_full[cell] = (k * x + lambda * x - data.y_train).norm() / ynorm;
        rmse_full[cell] = (kt * x - data.y_test).norm() * test_scale;
      }
    }
  });

  KrrSummary sum;
  std::size_t best = 0;
  std::size_t best_full = 0;
  double logsum = 0.0;
  for (std::size_t c = 0; c < pairs; ++c) {
    if (rmse[c] < rmse[best]) best = c;
    if (grid.full_oracle && rmse_full[c] < rmse_full[best_full]) best_full = c;
    logsum += std::log(std::max(residual[c], 1e-300));
    sum.max_residual = std::max(sum.max_residual, residual[c]);
  }
  auto lambda_of = [&](std::size_t c) { return lambdas[static_cast<Index>(c) % nl].real(); };
  auto sigma_of = [&](std::size_t c) { return sigmas[static_cast<Index>(c) / nl].real(); };
  sum.best_lambda = lambda_of(best);
  sum.best_sigma = sigma_of(best);
  sum.best_rmse = rmse[best];
  sum.geomean_residual = std::exp(logsum / static_cast<double>(pairs));
  sum.online_per_pair_s = totals[mrep] / static_cast<double>(pairs);
  if (grid.full_oracle) {
    sum.full_lambda = lambda_of(best_full);
    sum.full_sigma = sigma_of(best_full);
    sum.full_rmse = rmse_full[best_full];
    const double full_total = std::accumulate(time_full.begin(), time_full.end(), 0.0);
    sum.full_per_pair_s = full_total / static_cast<double>(pairs);
    res.phases["full"] = full_total;
  }
  res.krr = sum;

  for (std::size_t c = 0; c < pairs; ++c) {
    KrrCell cell{lambda_of(c), sigma_of(c), rmse[c], std::nullopt, residual[c]};
    if (grid.full_oracle) cell.rmse_full = rmse_full[c];
    res.krr_cells.push_back(cell);
  }
  if (grid.full_oracle) {
    for (std::size_t c = 0; c < pairs; ++c) {
      ResultRow row;
      row.method = "full";
      row.p = format_parameter(make_parameter({lambda_of(c), sigma_of(c)}));
      row.relative_residual = residual_full[c];
      row.wall_time_s = time_full[c];
      res.rows.push_back(row);
    }
    res.methods.push_back(summarize("full", res.rows, res.phases["full"]));
  }
  for (std::size_t c = 0; c < pairs; ++c) {
    ResultRow row;
    row.method = name;
    row.p = format_parameter(make_parameter({lambda_of(c), sigma_of(c)}));
    row.relative_residual = residual[c];
    row.wall_time_s = times[mrep][c];
    res.rows.push_back(row);
  }
  res.methods.push_back(summarize(name, res.rows, totals[mrep]));
  return res;
}

std::vector<std::filesystem::path> write_experiment(const ExperimentResult& res,
                                                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& file) {
    written.push_back(dir / file);
    std::ofstream out(written.back(), std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + written.back().string() + "'");
    return out;
  };
  {
    auto out = open("results.csv");
    write_results(out, res.rows);
  }
  {
    auto out = open("singular_values.csv");
    write_csv_row(out, {"index", "sigma"});
    for (Index k = 0; k < res.singular_values.size(); ++k) {
      write_csv_row(out, {std::to_string(k + 1), format_number(res.singular_values(k))});
    }
  }
  {
    auto out = open("timing.csv");
    write_csv_row(out, {"phase", "seconds"});
    for (const auto& [phase, t] : res.phases) write_csv_row(out, {phase, format_number(t)});
  }
  if (!res.krr_cells.empty()) {
    auto out = open("krr_grid.csv");
    write_csv_row(out, {"lambda", "sigma", "rmse_subapsnap", "rmse_full", "relative_residual"});
    for (const auto& c : res.krr_cells) {
      write_csv_row(out, {format_number(c.lambda), format_number(c.sigma), format_number(c.rmse),
                          c.rmse_full ? format_number(*c.rmse_full) : std::string(),
                          format_number(c.relative_residual)});
    }
  }
  {
    using json = nlohmann::ordered_json;
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(format_number(v)); };
    json j;
    j["name"] = res.name;
    j["problem"] = res.problem;
    j["n"] = res.n;
    j["rank"] = res.rank;
    j["snapshot_points"] = json::array();
    for (const auto& p : res.snapshot_points) j["snapshot_points"].push_back(format_parameter(p));
    if (res.lipschitz) j["lipschitz"] = num(*res.lipschitz);
    j["methods"] = json::object();
    for (const auto& m : res.methods) {
      json e;
      e["points"] = m.points;
      e["max_relative_residual"] = num(m.max_residual);
      e["median_relative_residual"] = num(m.median_residual);
      if (m.max_output_error) e["max_output_error"] = num(*m.max_output_error);
      e["online_total_s"] = m.online_total_s;
      e["per_point_s"] = m.per_point_s;
      j["methods"][m.method] = e;
    }
    j["phases"] = json::object();
    for (const auto& [phase, t] : res.phases) j["phases"][phase] = t;
    if (res.krr) {
      const auto& k = *res.krr;
      json e;
      e["best_lambda"] = k.best_lambda;
      e["best_sigma"] = k.best_sigma;
      e["best_rmse"] = k.best_rmse;
      if (k.full_lambda) {
        e["full_lambda"] = *k.full_lambda;
        e["full_sigma"] = *k.full_sigma;
        e["full_rmse"] = *k.full_rmse;
        e["argmin_match"] = k.argmin_match();
        e["full_per_pair_s"] = *k.full_per_pair_s;
      }
      e["geomean_relative_residual"] = num(k.geomean_residual);
      e["max_relative_residual"] = num(k.max_residual);
      e["online_per_pair_s"] = k.online_per_pair_s;
      j["krr"] = e;
    }
    auto out = open("summary.json");
    out << j.dump(2) << '\n';
  }
  return written;
}

}  // namespace subapsnap
