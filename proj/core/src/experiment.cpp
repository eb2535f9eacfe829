#include "fspca/experiment.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"
#include "fspca/matrix_io.hpp"
#include "fspca/rng.hpp"

namespace fspca {

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kOracle:
      return "oracle";
    case EstimatorKind::kFantopeL1:
      return "fantope_l1";
    case EstimatorKind::kConvex:
      return "convex_spca";
    case EstimatorKind::kNonconvex:
      return "nonconvex_spca";
  }
  return "oracle";
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "oracle") return EstimatorKind::kOracle;
  if (name == "fantope_l1" || name == "l1") return EstimatorKind::kFantopeL1;
  if (name == "convex_spca" || name == "convex") return EstimatorKind::kConvex;
  if (name == "nonconvex_spca" || name == "nonconvex")
    return EstimatorKind::kNonconvex;
  throw ValidationError("unknown estimator '" + name + "'");
}

const char* dataset_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kDataset1:
      return "dataset1";
    case DatasetKind::kDataset2:
      return "dataset2";
    case DatasetKind::kCsv:
      return "csv";
  }
  return "dataset1";
}

int ExperimentSpec::subspace_dim() const {
  switch (dataset) {
    case DatasetKind::kDataset1:
      return 1;
    case DatasetKind::kDataset2:
      return 5;
    case DatasetKind::kCsv: {
      const CovarianceModel model = model_from_json(read_text_file(csv_model));
      return model.k;
    }
  }
  return 1;
}

void ExperimentSpec::validate() const {
  if (reps < 1) throw ValidationError("experiment: reps must be >= 1");
  if (n < 1 || p < 1) throw ValidationError("experiment: n, p must be >= 1");
  if (estimators.empty())
    throw ValidationError("experiment: at least one estimator required");
  if (dataset == DatasetKind::kDataset1 && p < 5)
    throw ValidationError("experiment: dataset 1 requires p >= 5");
  if (dataset == DatasetKind::kDataset2 && p < 10)
    throw ValidationError("experiment: dataset 2 requires p >= 10");
  if (dataset == DatasetKind::kCsv && (csv_data.empty() || csv_model.empty()))
    throw ValidationError("experiment: csv dataset requires data and model paths");
  pen.validate();
  cfg.validate();
  cv_cfg.validate();
  if (!fixed_lambda && n < cv.folds)
    throw ValidationError("experiment: need n >= folds for cross-validation");
  for (EstimatorKind kind : estimators) {
    if (kind == EstimatorKind::kConvex && !(cfg.tau > pen.zeta_minus())) {
      std::ostringstream msg;
      msg << "experiment: convex runs need cfg.tau > zeta_minus (tau=" << cfg.tau
          << ", zeta_minus=" << pen.zeta_minus() << ")";
      throw ValidationError(msg.str());
    }
  }
}

ExperimentSpec default_table_spec(DatasetKind dataset) {
  ExperimentSpec spec;
  spec.dataset = dataset;
  spec.n = 80;
  spec.p = 128;
  spec.reps = 20;
  spec.base_seed = 1;
  spec.pen = make_mcp(1.0, 3.0);  // lambda comes from CV
  spec.cfg = SolverConfig{};
  spec.cfg.tau = 2.0 / 3.0;
  spec.cv_cfg = SolverConfig{};
  spec.cv_cfg.tau = 0.0;  // overwritten per estimator
  spec.cv_cfg.max_iters = 300;
  spec.cv.folds = 5;
  return spec;
}

namespace {

struct RepContext {
  CovarianceModel model;
  Eigen::MatrixXd X;
  Eigen::MatrixXd SigmaHat;
  std::uint64_t seed = 0;
};

RepContext make_rep_context(const ExperimentSpec& spec, int rep) {
  RepContext ctx;
  ctx.seed = spec.base_seed + static_cast<std::uint64_t>(rep);
  switch (spec.dataset) {
    case DatasetKind::kDataset1:
      ctx.model = dataset1_model(spec.p);
      break;
    case DatasetKind::kDataset2:
      ctx.model = dataset2_model(spec.p, ctx.seed);
      break;
    case DatasetKind::kCsv:
      ctx.model = model_from_json(read_text_file(spec.csv_model));
      break;
  }
  if (spec.dataset == DatasetKind::kCsv) {
    ctx.X = read_matrix_csv(spec.csv_data);
  } else {
    rng::Stream data_stream(rng::derive_seed(ctx.seed, rng::kTagData));
    ctx.X = sample_gaussian(ctx.model, spec.n, data_stream);
  }
  ctx.SigmaHat = sample_covariance(ctx.X);
  return ctx;
}

// Fits one estimator on a prepared replication, tuning lambda first when no
// fixed lambda is given.
EstimateResult fit_estimator(const ExperimentSpec& spec, EstimatorKind kind,
                             const RepContext& ctx, const FantopeSpec& fspec,
                             RepOutcome& outcome) {
  if (kind == EstimatorKind::kOracle)
    return oracle_estimator(ctx.SigmaHat, fspec, ctx.model.support);

  PenaltyConfig pen = spec.pen;
  SolverConfig cfg = spec.cfg;
  if (kind == EstimatorKind::kFantopeL1) {
    pen = make_l1(0.0);
    cfg.tau = 0.0;
  } else if (kind == EstimatorKind::kNonconvex) {
    cfg.tau = 0.0;
  }

  double lambda = 0.0;
  if (spec.fixed_lambda) {
    lambda = *spec.fixed_lambda;
  } else {
    Eigen::MatrixXd X_cv;
    if (spec.dataset == DatasetKind::kCsv) {
      X_cv = ctx.X;  // in-sample folds for user data
    } else {
      rng::Stream held(rng::derive_seed(ctx.seed, rng::kTagHeldOut));
      X_cv = sample_gaussian(ctx.model, spec.n, held);
    }
    CvSpec cv = spec.cv;
    cv.seed = ctx.seed;
    if (cv.lambda_grid.empty()) {
      const double center = default_lambda(ctx.SigmaHat, static_cast<int>(ctx.X.rows()),
                                           spec.p);
      cv.lambda_grid = make_lambda_grid(center, spec.grid_points);
    }
    SolverConfig cv_cfg = spec.cv_cfg;
    cv_cfg.tau = cfg.tau;
    const CvResult cvres = cv_select_lambda(X_cv, fspec, pen, cv_cfg, cv);
    lambda = cvres.lambda_star;
    outcome.cv_used = true;
  }
  outcome.lambda_star = lambda;
  pen.lambda = lambda;

  if (kind == EstimatorKind::kConvex) return convex_spca(ctx.SigmaHat, fspec, pen, cfg);
  CertifyOptions certify;
  certify.vi_check = spec.vi_certify;
  return nonconvex_spca(ctx.SigmaHat, fspec, pen, cfg, certify);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const int k = spec.subspace_dim();
  const FantopeSpec fspec{k, spec.p};

  ExperimentResult result;
  result.spec = spec;
  result.runs.resize(spec.estimators.size());
  for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
    result.runs[e].kind = spec.estimators[e];
    result.runs[e].reps.resize(spec.reps);
  }

  std::atomic<int> next_rep{0};
  auto worker = [&]() {
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= spec.reps) return;

      RepContext ctx;
      bool ctx_ok = true;
      std::string ctx_error;
      try {
        ctx = make_rep_context(spec, rep);
      } catch (const std::exception& e) {
        ctx_ok = false;
        ctx_error = e.what();
      }

      // Oracle first so other estimators can record their distance to it.
      Eigen::MatrixXd pi_oracle;
      bool have_oracle = false;
      std::vector<std::size_t> order;
      for (std::size_t e = 0; e < spec.estimators.size(); ++e)
        if (spec.estimators[e] == EstimatorKind::kOracle) order.push_back(e);
      for (std::size_t e = 0; e < spec.estimators.size(); ++e)
        if (spec.estimators[e] != EstimatorKind::kOracle) order.push_back(e);

      for (std::size_t e : order) {
        RepOutcome& out = result.runs[e].reps[rep];
        out.rep = rep;
        out.seed = ctx_ok ? ctx.seed : spec.base_seed + rep;
        if (!ctx_ok) {
          out.ok = false;
          out.error = ctx_error;
          continue;
        }
        out.model_min_signal = ctx.model.min_signal;
        try {
          const EstimateResult est =
              fit_estimator(spec, spec.estimators[e], ctx, fspec, out);
          out.metrics.seed = ctx.seed;
          out.metrics.frob_error = frobenius_error(est.Pi_hat, ctx.model.Pi_star);
          const auto [tpr, fpr] =
              support_metrics(est.support, ctx.model.support, spec.p);
          out.metrics.tpr = tpr;
          out.metrics.fpr = fpr;
          out.metrics.rank = est.rank;
          out.diagnostics = est.diagnostics;
          out.feasibility_gap = fantope_violation(est.Pi_feasible, fspec);
          if (spec.estimators[e] == EstimatorKind::kOracle) {
            pi_oracle = est.Pi_hat;
            have_oracle = true;
            out.oracle_distance = 0.0;
          } else if (have_oracle) {
            out.oracle_distance = frobenius_error(est.Pi_hat, pi_oracle);
          }
          out.ok = true;
        } catch (const std::exception& e2) {
          out.ok = false;
          out.error = e2.what();
        }
      }
    }
  };

  const int nthreads = std::max(1, std::min(threads, spec.reps));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (EstimatorRun& run : result.runs) {
    std::vector<MetricsRecord> ok_records;
    run.failures = 0;
    for (const RepOutcome& out : run.reps) {
      if (out.ok)
        ok_records.push_back(out.metrics);
      else
        ++run.failures;
    }
    if (!ok_records.empty()) run.summary = aggregate(ok_records);
  }
  return result;
}

std::vector<MetricsRecord> run_metrics(const EstimatorRun& run) {
  std::vector<MetricsRecord> records;
  for (const RepOutcome& out : run.reps)
    if (out.ok) records.push_back(out.metrics);
  return records;
}

std::string spec_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["dataset"] = dataset_name(spec.dataset);
  if (spec.dataset == DatasetKind::kCsv) {
    j["csv_data"] = spec.csv_data;
    j["csv_model"] = spec.csv_model;
  }
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["k"] = spec.subspace_dim();
  nlohmann::json est = nlohmann::json::array();
  for (EstimatorKind kind : spec.estimators) est.push_back(estimator_name(kind));
  j["estimators"] = est;
  j["reps"] = spec.reps;
  j["base_seed"] = spec.base_seed;
  j["penalty"] = nlohmann::json::parse(to_json_string(spec.pen));
  j["solver"] = nlohmann::json::parse(to_json_string(spec.cfg));
  j["cv_solver"] = nlohmann::json::parse(to_json_string(spec.cv_cfg));
  j["cv_folds"] = spec.cv.folds;
  j["lambda_grid"] =
      spec.cv.lambda_grid.empty()
          ? nlohmann::json("per-rep default: log-spaced grid on [0.004, 1] * "
                           "lambda_1(SigmaHat) * sqrt(log(p)/n)")
          : nlohmann::json(spec.cv.lambda_grid);
  j["grid_points"] = spec.grid_points;
  if (spec.fixed_lambda)
    j["fixed_lambda"] = *spec.fixed_lambda;
  else
    j["fixed_lambda"] = nullptr;
  j["vi_certify"] = spec.vi_certify;
  j["rng"] = rng::kGeneratorName;
  return j.dump();
}

ExperimentSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment spec JSON: ") + e.what());
  }
  ExperimentSpec spec = default_table_spec(DatasetKind::kDataset1);
  try {
    const std::string ds = j.value("dataset", "dataset1");
    if (ds == "dataset1" || ds == "1")
      spec.dataset = DatasetKind::kDataset1;
    else if (ds == "dataset2" || ds == "2")
      spec.dataset = DatasetKind::kDataset2;
    else if (ds == "csv")
      spec.dataset = DatasetKind::kCsv;
    else
      throw ValidationError("experiment spec JSON: unknown dataset '" + ds + "'");
    spec.csv_data = j.value("csv_data", "");
    spec.csv_model = j.value("csv_model", "");
    spec.n = j.value("n", spec.n);
    spec.p = j.value("p", spec.p);
    if (j.contains("estimators")) {
      spec.estimators.clear();
      for (const auto& name : j["estimators"])
        spec.estimators.push_back(estimator_from_name(name.get<std::string>()));
    }
    spec.reps = j.value("reps", spec.reps);
    spec.base_seed = j.value("base_seed", spec.base_seed);
    if (j.contains("penalty"))
      spec.pen = penalty_config_from_json(j["penalty"].dump());
    if (j.contains("solver")) spec.cfg = solver_config_from_json(j["solver"].dump());
    if (j.contains("cv_solver"))
      spec.cv_cfg = solver_config_from_json(j["cv_solver"].dump());
    spec.cv.folds = j.value("cv_folds", spec.cv.folds);
    if (j.contains("lambda_grid") && j["lambda_grid"].is_array())
      spec.cv.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
    spec.grid_points = j.value("grid_points", spec.grid_points);
    if (j.contains("fixed_lambda") && !j["fixed_lambda"].is_null())
      spec.fixed_lambda = j["fixed_lambda"].get<double>();
    spec.vi_certify = j.value("vi_certify", spec.vi_certify);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment spec JSON: ") + e.what());
  }
  return spec;
}

std::string summary_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(spec_json(result.spec));
  nlohmann::json runs = nlohmann::json::array();
  for (const EstimatorRun& run : result.runs) {
    nlohmann::json r;
    r["estimator"] = estimator_name(run.kind);
    r["failures"] = run.failures;
    r["successes"] = static_cast<int>(run.reps.size()) - run.failures;
    if (run.failures < static_cast<int>(run.reps.size()))
      r["summary"] = nlohmann::json::parse(to_json_string(run.summary));
    nlohmann::json reps = nlohmann::json::array();
    for (const RepOutcome& out : run.reps) {
      nlohmann::json o;
      o["rep"] = out.rep;
      o["seed"] = out.seed;
      o["ok"] = out.ok;
      if (!out.ok) o["error"] = out.error;
      o["lambda_star"] = out.lambda_star;
      o["cv_used"] = out.cv_used;
      if (out.ok) {
        o["frob_error"] = out.metrics.frob_error;
        o["tpr"] = out.metrics.tpr;
        o["fpr"] = out.metrics.fpr;
        o["rank"] = out.metrics.rank;
        o["feasibility_gap"] = out.feasibility_gap;
        o["oracle_distance"] = out.oracle_distance;
        o["model_min_signal"] = out.model_min_signal;
        o["diagnostics"] = nlohmann::json::parse(to_json_string(out.diagnostics));
      }
      reps.push_back(o);
    }
    r["reps"] = reps;
    runs.push_back(r);
  }
  j["runs"] = runs;
  return j.dump(2);
}

std::string summary_text(const ExperimentResult& result) {
  std::ostringstream out;
  const ExperimentSpec& spec = result.spec;
  out << "dataset=" << dataset_name(spec.dataset) << " n=" << spec.n
      << " p=" << spec.p << " k=" << spec.subspace_dim() << " reps=" << spec.reps
      << " base_seed=" << spec.base_seed << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %-16s %-16s %-16s %-12s %s\n",
                "estimator", "frob_error", "TPR", "FPR", "rank", "ok/reps");
  out << line;
  for (const EstimatorRun& run : result.runs) {
    const int ok = static_cast<int>(run.reps.size()) - run.failures;
    if (ok == 0) {
      std::snprintf(line, sizeof(line), "%-16s %-16s %-16s %-16s %-12s %d/%zu\n",
                    estimator_name(run.kind), "-", "-", "-", "-", ok,
                    run.reps.size());
      out << line;
      continue;
    }
    char rankbuf[32];
    std::snprintf(rankbuf, sizeof(rankbuf), "%.2f±%.2f", run.summary.rank.mean,
                  run.summary.rank.sd);
    std::snprintf(line, sizeof(line), "%-16s %-16s %-16s %-16s %-12s %d/%zu\n",
                  estimator_name(run.kind),
                  format_mean_sd(run.summary.frob_error).c_str(),
                  format_mean_sd(run.summary.tpr).c_str(),
                  format_mean_sd(run.summary.fpr).c_str(), rankbuf, ok,
                  run.reps.size());
    out << line;
  }
  return out.str();
}

}  // namespace fspca
