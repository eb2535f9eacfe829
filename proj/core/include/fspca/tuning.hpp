#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fspca/solver.hpp"

namespace fspca {

struct CvSpec {
  std::vector<double> lambda_grid;  // positive; sorted (and deduplicated) on use
  int folds = 5;
  std::uint64_t seed = 0;
  enum class Score { kHeldOutTrace } score = Score::kHeldOutTrace;
  void validate() const;  // nonempty positive grid, folds >= 2
};

// Deterministic partition of {0..n-1} into `folds` classes whose sizes differ
// by at most one (seeded shuffle, then round-robin).
std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed);

struct CvCell {
  double lambda = 0.0;
  int fold = 0;
  double score = 0.0;
  bool ok = false;
};

struct CvResult {
  double lambda_star = 0.0;
  std::vector<double> grid;         // ascending, deduplicated
  std::vector<double> mean_scores;  // per grid value; NaN when excluded
  std::vector<CvCell> table;        // per (lambda, fold)
};

// 5-fold (by default) cross-validation over the lambda grid: for each fold,
// fit on the training folds' sample covariance and score the estimate on the
// validation fold's covariance by <Sigma_val, Pi_hat> (higher is better).
// Returns the lambda maximizing the mean score; exact ties break toward the
// larger (sparser) lambda. A lambda is excluded only if every fold's fit
// failed; if all lambdas are excluded a NumericalError is thrown.
CvResult cv_select_lambda(const Eigen::MatrixXd& X, const FantopeSpec& spec,
                          const PenaltyConfig& pen_template, const SolverConfig& cfg,
                          const CvSpec& cv);

// Theory-guided scale lambda_1(SigmaHat) * sqrt(log(p) / n); used as the grid
// anchor and an untuned starting point.
double default_lambda(const Eigen::MatrixXd& SigmaHat, int n, int p);

// Log-spaced grid of `points` values on [lo_factor, hi_factor] * center.
std::vector<double> make_lambda_grid(double center, int points = 20,
                                     double lo_factor = 0.004,
                                     double hi_factor = 1.0);

std::string to_json_string(const CvResult& result);
std::string cv_table_to_csv(const CvResult& result);  // lambda,fold,score

}  // namespace fspca
