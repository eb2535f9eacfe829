#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fspca/estimators.hpp"
#include "fspca/evaluation.hpp"
#include "fspca/synthdata.hpp"
#include "fspca/tuning.hpp"

namespace fspca {

enum class EstimatorKind { kOracle, kFantopeL1, kConvex, kNonconvex };
enum class DatasetKind { kDataset1, kDataset2, kCsv };

const char* estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);
const char* dataset_name(DatasetKind kind);

// A replicated benchmark: per replication, draw a model (dataset 2 redraws
// its random eigenvectors per seed), sample data, tune lambda by 5-fold CV
// on an independently sampled held-out set (unless fixed_lambda is set),
// fit each estimator, and score against the true projection.
struct ExperimentSpec {
  DatasetKind dataset = DatasetKind::kDataset1;
  std::string csv_data;   // kCsv only
  std::string csv_model;  // kCsv only
  int n = 80;
  int p = 128;
  std::vector<EstimatorKind> estimators = {
      EstimatorKind::kOracle, EstimatorKind::kFantopeL1, EstimatorKind::kConvex,
      EstimatorKind::kNonconvex};
  int reps = 20;
  std::uint64_t base_seed = 1;
  PenaltyConfig pen;     // family/b template for convex & nonconvex runs
  SolverConfig cfg;      // final-fit config; cfg.tau applies to the convex runs
  SolverConfig cv_cfg;   // config for CV fits (fewer iterations by default)
  CvSpec cv;             // empty lambda_grid: per-rep default grid
  int grid_points = 20;
  std::optional<double> fixed_lambda;
  bool vi_certify = true;

  void validate() const;
  int subspace_dim() const;  // k implied by the dataset
};

ExperimentSpec default_table_spec(DatasetKind dataset);

struct RepOutcome {
  int rep = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricsRecord metrics;
  double lambda_star = 0.0;
  bool cv_used = false;
  SolveDiagnostics diagnostics;
  double feasibility_gap = 0.0;   // Fantope violation of the feasible iterate
  double oracle_distance = -1.0;  // ||Pi_hat - Pi_hat_oracle||_F; -1 if n/a
  double model_min_signal = 0.0;
};

struct EstimatorRun {
  EstimatorKind kind = EstimatorKind::kOracle;
  std::vector<RepOutcome> reps;
  MetricsSummary summary;  // over successful reps
  int failures = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<EstimatorRun> runs;
};

// Deterministic given spec; replications run on up to `threads` workers with
// one substream per (rep, purpose), so the thread count never changes
// results or output bytes.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

std::string summary_json(const ExperimentResult& result);
std::string summary_text(const ExperimentResult& result);
std::string spec_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const std::string& text);

std::vector<MetricsRecord> run_metrics(const EstimatorRun& run);

}  // namespace fspca
