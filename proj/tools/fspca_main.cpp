// fspca: sparse principal subspace estimation on the Fantope.
//
// Subcommands:
//   synth  generate a synthetic dataset (data CSV + model JSON)
//   fit    fit an estimator on a data CSV
//   tune   cross-validate the regularization level on a data CSV
//   bench  replicated benchmark with per-rep metrics and a summary table
//   eval   score an estimate against a ground-truth model
//
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"
#include "fspca/estimators.hpp"
#include "fspca/experiment.hpp"
#include "fspca/matrix_io.hpp"
#include "fspca/synthdata.hpp"
#include "fspca/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::uint64_t seed = 1;
  std::string out = ".";
  int threads = 1;
  std::string config;
};

std::string out_path(const GlobalArgs& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

fspca::PenaltyConfig penalty_from_flags(const std::string& family, double lambda,
                                        double b) {
  fspca::PenaltyConfig pen;
  pen.family = fspca::family_from_name(family);
  pen.lambda = lambda;
  pen.b = b;
  pen.validate();
  return pen;
}

std::vector<double> parse_grid(const std::string& grid_csv) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos <= grid_csv.size()) {
    const std::size_t comma = grid_csv.find(',', pos);
    const std::string tok = grid_csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) grid.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (grid.empty()) throw fspca::ValidationError("empty --grid");
  return grid;
}

int run_synth(const GlobalArgs& g, int dataset, int n, int p, bool header) {
  fspca::CovarianceModel model = dataset == 1
                                     ? fspca::dataset1_model(p)
                                     : fspca::dataset2_model(p, g.seed);
  fspca::rng::Stream stream(fspca::rng::derive_seed(g.seed, fspca::rng::kTagData));
  const Eigen::MatrixXd X = fspca::sample_gaussian(model, n, stream);
  fspca::write_matrix_csv(out_path(g, "data.csv"), X, header);
  fspca::write_text_file(out_path(g, "model.json"), fspca::to_json_string(model));
  std::cout << "wrote " << out_path(g, "data.csv") << " (" << n << "x" << p
            << ") and model.json (s=" << model.s << ", k=" << model.k
            << ", min_signal=" << model.min_signal << ")\n";
  return 0;
}

int run_fit(const GlobalArgs& g, const std::string& data_path,
            const std::string& estimator, int k, std::optional<double> lambda,
            bool tune, const std::string& family, double b, double tau,
            fspca::SolverConfig cfg, const std::string& model_path,
            const std::vector<int>& support_flag, const std::string& grid_csv,
            int folds, int grid_points) {
  const Eigen::MatrixXd X = fspca::read_matrix_csv(data_path);
  const Eigen::MatrixXd SigmaHat = fspca::sample_covariance(X);
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const fspca::FantopeSpec spec{k, p};
  spec.validate();

  json provenance;
  provenance["command"] = "fit";
  provenance["data"] = data_path;
  provenance["n"] = n;
  provenance["p"] = p;
  provenance["k"] = k;
  provenance["estimator"] = estimator;
  provenance["seed"] = g.seed;

  fspca::EstimateResult result;
  if (estimator == "oracle") {
    std::vector<int> support = support_flag;
    if (support.empty()) {
      if (model_path.empty())
        throw fspca::ValidationError(
            "fit --estimator oracle needs --model or --support");
      support =
          fspca::model_from_json(fspca::read_text_file(model_path)).support;
    }
    result = fspca::oracle_estimator(SigmaHat, spec, support);
    provenance["support"] = support;
  } else if (estimator == "pca") {
    bool degenerate = false;
    fspca::EstimateResult r;
    r.Pi_hat = fspca::pca_projector(SigmaHat, k, &degenerate);
    r.Pi_feasible = r.Pi_hat;
    r.diagnostics.converged = true;
    r.estimator = "pca";
    r.support = fspca::diagonal_support(r.Pi_hat);
    r.rank = fspca::numerical_rank(r.Pi_feasible);
    auto basis = fspca::extract_basis(r.Pi_hat, SigmaHat, k);
    r.basis_rank_deficient = basis.rank_deficient;
    if (!basis.rank_deficient) r.U_hat = std::move(basis.U);
    result = std::move(r);
    provenance["degenerate_gap"] = degenerate;
  } else {
    fspca::PenaltyConfig pen =
        penalty_from_flags(estimator == "l1" ? "l1" : family, 0.0, b);
    if (estimator == "l1" || estimator == "nonconvex") cfg.tau = 0.0;
    if (tau >= 0.0 && estimator == "convex") cfg.tau = tau;

    double lam = 0.0;
    if (tune) {
      fspca::CvSpec cv;
      cv.folds = folds;
      cv.seed = g.seed;
      cv.lambda_grid =
          grid_csv.empty()
              ? fspca::make_lambda_grid(fspca::default_lambda(SigmaHat, n, p),
                                        grid_points)
              : parse_grid(grid_csv);
      const fspca::CvResult cvres =
          fspca::cv_select_lambda(X, spec, pen, cfg, cv);
      lam = cvres.lambda_star;
      fspca::write_text_file(out_path(g, "cv_scores.csv"),
                             fspca::cv_table_to_csv(cvres));
      provenance["cv"] = json::parse(fspca::to_json_string(cvres));
    } else if (lambda) {
      lam = *lambda;
    } else {
      throw fspca::ValidationError("fit needs --lambda or --tune");
    }
    pen.lambda = lam;
    provenance["penalty"] = json::parse(fspca::to_json_string(pen));
    provenance["solver"] = json::parse(fspca::to_json_string(cfg));

    if (estimator == "convex")
      result = fspca::convex_spca(SigmaHat, spec, pen, cfg);
    else if (estimator == "nonconvex" || estimator == "l1")
      result = fspca::nonconvex_spca(SigmaHat, spec, pen, cfg);
    else
      throw fspca::ValidationError("unknown estimator '" + estimator + "'");
  }

  json out = json::parse(fspca::to_json_string(result));
  out["provenance"] = provenance;
  fspca::write_text_file(out_path(g, "estimate.json"), out.dump(2));
  fspca::write_matrix_csv(out_path(g, "pi_hat.csv"), result.Pi_hat);
  if (result.U_hat)
    fspca::write_matrix_csv(out_path(g, "u_hat.csv"), *result.U_hat);
  std::cout << "estimator=" << result.estimator << " rank=" << result.rank
            << " support_size=" << result.support.size()
            << " converged=" << (result.diagnostics.converged ? "yes" : "no")
            << " iterations=" << result.diagnostics.iterations << "\n";
  if (!result.diagnostics.converged && result.diagnostics.iterations > 0)
    std::cout << "warning: solver hit max_iters; residuals primal="
              << result.diagnostics.primal_residual
              << " dual=" << result.diagnostics.dual_residual << "\n";
  return 0;
}

int run_tune(const GlobalArgs& g, const std::string& data_path, int k,
             const std::string& family, double b, double tau,
             fspca::SolverConfig cfg, const std::string& grid_csv, int folds,
             int grid_points) {
  const Eigen::MatrixXd X = fspca::read_matrix_csv(data_path);
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const Eigen::MatrixXd SigmaHat = fspca::sample_covariance(X);
  const fspca::FantopeSpec spec{k, p};
  spec.validate();
  fspca::PenaltyConfig pen = penalty_from_flags(family, 0.0, b);
  cfg.tau = tau >= 0.0 ? tau : 0.0;

  fspca::CvSpec cv;
  cv.folds = folds;
  cv.seed = g.seed;
  cv.lambda_grid = grid_csv.empty()
                       ? fspca::make_lambda_grid(
                             fspca::default_lambda(SigmaHat, n, p), grid_points)
                       : parse_grid(grid_csv);
  const fspca::CvResult cvres = fspca::cv_select_lambda(X, spec, pen, cfg, cv);
  fspca::write_text_file(out_path(g, "cv_scores.csv"),
                         fspca::cv_table_to_csv(cvres));
  json out;
  out["lambda_star"] = cvres.lambda_star;
  out["cv"] = json::parse(fspca::to_json_string(cvres));
  out["penalty_family"] = family;
  out["b"] = b;
  out["tau"] = cfg.tau;
  out["folds"] = folds;
  out["seed"] = g.seed;
  out["default_lambda"] = fspca::default_lambda(SigmaHat, n, p);
  fspca::write_text_file(out_path(g, "tune.json"), out.dump(2));
  std::cout << "lambda_star=" << fspca::format_g17(cvres.lambda_star) << "\n";
  return 0;
}

int run_bench(const GlobalArgs& g, fspca::ExperimentSpec spec) {
  const fspca::ExperimentResult result = fspca::run_experiment(spec, g.threads);
  for (const fspca::EstimatorRun& run : result.runs) {
    const std::string name =
        std::string("metrics_") + fspca::estimator_name(run.kind) + ".csv";
    fspca::write_text_file(out_path(g, name),
                           fspca::metrics_to_csv(fspca::run_metrics(run)));
  }
  fspca::write_text_file(out_path(g, "summary.json"), fspca::summary_json(result));
  const std::string table = fspca::summary_text(result);
  fspca::write_text_file(out_path(g, "summary.txt"), table);
  std::cout << table;
  return 0;
}

int run_eval(const GlobalArgs& g, const std::string& estimate_path,
             const std::string& model_path) {
  const fspca::CovarianceModel model =
      fspca::model_from_json(fspca::read_text_file(model_path));
  Eigen::MatrixXd Pi_hat;
  if (estimate_path.size() > 5 &&
      estimate_path.substr(estimate_path.size() - 5) == ".json") {
    Pi_hat = fspca::estimate_result_from_json(fspca::read_text_file(estimate_path))
                 .Pi_hat;
  } else {
    Pi_hat = fspca::read_matrix_csv(estimate_path);
  }
  if (Pi_hat.rows() != model.p || Pi_hat.cols() != model.p)
    throw fspca::ValidationError("eval: estimate shape does not match model p");

  fspca::MetricsRecord rec;
  rec.seed = g.seed;
  rec.frob_error = fspca::frobenius_error(Pi_hat, model.Pi_star);
  const auto [tpr, fpr] = fspca::support_metrics(
      fspca::diagonal_support(Pi_hat), model.support, model.p);
  rec.tpr = tpr;
  rec.fpr = fpr;
  rec.rank = fspca::numerical_rank(0.5 * (Pi_hat + Pi_hat.transpose()));

  json out;
  out["estimate"] = estimate_path;
  out["model"] = model_path;
  out["frob_error"] = rec.frob_error;
  out["tpr"] = rec.tpr;
  out["fpr"] = rec.fpr;
  out["rank"] = rec.rank;
  fspca::write_text_file(out_path(g, "eval.json"), out.dump(2));
  std::cout << "frob_error=" << fspca::format_g17(rec.frob_error)
            << " tpr=" << rec.tpr << " fpr=" << rec.fpr << " rank=" << rec.rank
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse principal subspace estimation on the Fantope"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalArgs g;
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for bench")
      ->capture_default_str();
  app.add_option("--config", g.config, "JSON config file (bench spec)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  int ds = 1, n = 80, p = 128;
  bool header = false;
  synth->add_option("--dataset", ds, "dataset recipe (1 or 2)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  synth->add_option("--n", n, "sample size")->capture_default_str();
  synth->add_option("--p", p, "ambient dimension")->capture_default_str();
  synth->add_flag("--header", header, "write a header line in data.csv");

  // fit
  auto* fit = app.add_subcommand("fit", "fit an estimator on a data CSV");
  std::string fit_data, fit_estimator = "convex", fit_family = "mcp";
  std::string fit_model, fit_grid;
  std::vector<int> fit_support;
  int fit_k = 1, fit_folds = 5, fit_grid_points = 20;
  double fit_b = 3.0, fit_tau = -1.0;
  std::optional<double> fit_lambda;
  bool fit_tune = false;
  fspca::SolverConfig fit_cfg;
  fit->add_option("--data", fit_data, "data CSV (one observation per row)")
      ->required();
  fit->add_option("--estimator", fit_estimator,
                  "convex | nonconvex | l1 | oracle | pca")
      ->check(CLI::IsMember({"convex", "nonconvex", "l1", "oracle", "pca"}))
      ->capture_default_str();
  fit->add_option("--k", fit_k, "subspace dimension")->capture_default_str();
  fit->add_option("--lambda", [&fit_lambda](const std::vector<std::string>& v) {
        fit_lambda = std::stod(v.at(0));
        return true;
      },
      "regularization level (fixed)");
  fit->add_flag("--tune", fit_tune, "select lambda by cross-validation");
  fit->add_option("--family", fit_family, "penalty family: mcp | scad | l1")
      ->check(CLI::IsMember({"mcp", "scad", "l1"}))
      ->capture_default_str();
  fit->add_option("--b", fit_b, "penalty concavity parameter")
      ->capture_default_str();
  fit->add_option("--tau", fit_tau,
                  "ridge weight for the convex estimator (default 2/b)");
  fit->add_option("--rho", fit_cfg.rho, "ADMM penalty parameter")
      ->capture_default_str();
  fit->add_option("--max-iters", fit_cfg.max_iters, "ADMM iteration cap")
      ->capture_default_str();
  fit->add_option("--primal-tol", fit_cfg.primal_tol,
                  "primal tolerance (<=0: 1e-7*p)");
  fit->add_option("--dual-tol", fit_cfg.dual_tol, "dual tolerance (<=0: 1e-7*p)");
  fit->add_option("--model", fit_model, "ground-truth model JSON (oracle)");
  fit->add_option("--support", fit_support, "oracle support indices (0-based)")
      ->delimiter(',');
  fit->add_option("--grid", fit_grid, "comma-separated lambda grid for --tune");
  fit->add_option("--folds", fit_folds, "CV folds")->capture_default_str();
  fit->add_option("--grid-points", fit_grid_points, "auto grid size")
      ->capture_default_str();

  // tune
  auto* tune = app.add_subcommand("tune", "cross-validate lambda on a data CSV");
  std::string tune_data, tune_family = "mcp", tune_grid;
  int tune_k = 1, tune_folds = 5, tune_grid_points = 20;
  double tune_b = 3.0, tune_tau = -1.0;
  fspca::SolverConfig tune_cfg;
  tune->add_option("--data", tune_data, "data CSV")->required();
  tune->add_option("--k", tune_k, "subspace dimension")->capture_default_str();
  tune->add_option("--family", tune_family, "penalty family")
      ->check(CLI::IsMember({"mcp", "scad", "l1"}))
      ->capture_default_str();
  tune->add_option("--b", tune_b, "penalty concavity parameter")
      ->capture_default_str();
  tune->add_option("--tau", tune_tau, "ridge weight (default 0)");
  tune->add_option("--rho", tune_cfg.rho, "ADMM penalty parameter")
      ->capture_default_str();
  tune->add_option("--max-iters", tune_cfg.max_iters, "ADMM iteration cap")
      ->capture_default_str();
  tune->add_option("--grid", tune_grid, "comma-separated lambda grid");
  tune->add_option("--folds", tune_folds, "CV folds")->capture_default_str();
  tune->add_option("--grid-points", tune_grid_points, "auto grid size")
      ->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "replicated synthetic benchmark");
  int bench_ds = 1, bench_n = 80, bench_p = 128, bench_reps = 20;
  int bench_cv_iters = -1, bench_grid_points = -1;
  std::vector<std::string> bench_estimators;
  std::string bench_grid;
  double bench_b = -1.0, bench_tau = -1.0, bench_fixed_lambda = 0.0;
  bool bench_have_fixed = false;
  std::string bench_family;
  bench->add_option("--dataset", bench_ds, "dataset recipe (1 or 2)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  bench->add_option("--n", bench_n, "sample size")->capture_default_str();
  bench->add_option("--p", bench_p, "ambient dimension")->capture_default_str();
  bench->add_option("--reps", bench_reps, "replications")->capture_default_str();
  bench->add_option("--estimators", bench_estimators,
                    "subset of oracle,fantope_l1,convex,nonconvex")
      ->delimiter(',');
  bench->add_option("--grid", bench_grid, "explicit lambda grid");
  bench->add_option("--grid-points", bench_grid_points, "auto grid size");
  bench->add_option("--family", bench_family, "penalty family for convex/nonconvex")
      ->check(CLI::IsMember({"mcp", "scad"}));
  bench->add_option("--b", bench_b, "penalty concavity parameter");
  bench->add_option("--tau", bench_tau, "ridge weight for convex (default 2/b)");
  bench->add_option("--fixed-lambda",
                    [&bench_fixed_lambda, &bench_have_fixed](
                        const std::vector<std::string>& v) {
                      bench_fixed_lambda = std::stod(v.at(0));
                      bench_have_fixed = true;
                      return true;
                    },
                    "skip CV and use this lambda everywhere");
  bench->add_option("--cv-max-iters", bench_cv_iters,
                    "ADMM iteration cap inside CV fits");

  // eval
  auto* eval = app.add_subcommand("eval", "score an estimate against a model");
  std::string eval_estimate, eval_model;
  eval->add_option("--estimate", eval_estimate, "pi_hat CSV or estimate JSON")
      ->required();
  eval->add_option("--model", eval_model, "ground-truth model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_synth(g, ds, n, p, header);
    if (fit->parsed())
      return run_fit(g, fit_data, fit_estimator, fit_k, fit_lambda, fit_tune,
                     fit_family, fit_b, fit_tau, fit_cfg, fit_model, fit_support,
                     fit_grid, fit_folds, fit_grid_points);
    if (tune->parsed())
      return run_tune(g, tune_data, tune_k, tune_family, tune_b, tune_tau,
                      tune_cfg, tune_grid, tune_folds, tune_grid_points);
    if (bench->parsed()) {
      fspca::ExperimentSpec spec = fspca::default_table_spec(
          bench_ds == 1 ? fspca::DatasetKind::kDataset1
                        : fspca::DatasetKind::kDataset2);
      if (!g.config.empty())
        spec = fspca::spec_from_json(fspca::read_text_file(g.config));
      if (bench->count("--dataset"))
        spec.dataset = bench_ds == 1 ? fspca::DatasetKind::kDataset1
                                     : fspca::DatasetKind::kDataset2;
      if (bench->count("--n")) spec.n = bench_n;
      if (bench->count("--p")) spec.p = bench_p;
      if (bench->count("--reps")) spec.reps = bench_reps;
      spec.base_seed = g.seed;
      if (!bench_estimators.empty()) {
        spec.estimators.clear();
        for (const std::string& name : bench_estimators)
          spec.estimators.push_back(fspca::estimator_from_name(name));
      }
      if (!bench_grid.empty()) spec.cv.lambda_grid = parse_grid(bench_grid);
      if (bench_grid_points > 0) spec.grid_points = bench_grid_points;
      if (!bench_family.empty())
        spec.pen.family = fspca::family_from_name(bench_family);
      if (bench_b > 0) spec.pen.b = bench_b;
      spec.cfg.tau = bench_tau >= 0 ? bench_tau : 2.0 / spec.pen.b;
      if (bench_have_fixed) spec.fixed_lambda = bench_fixed_lambda;
      if (bench_cv_iters > 0) spec.cv_cfg.max_iters = bench_cv_iters;
      return run_bench(g, spec);
    }
    if (eval->parsed()) return run_eval(g, eval_estimate, eval_model);
  } catch (const fspca::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const fspca::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const fspca::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
