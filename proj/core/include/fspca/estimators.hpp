#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fspca/solver.hpp"

namespace fspca {

// A fitted principal-subspace estimate. Pi_hat is the sparse estimate (the
// final split variable for ADMM estimators, whose prox gives exact zeros);
// Pi_feasible is the final Fantope-feasible iterate. Support is read off
// diag(Pi_hat), rank off Pi_feasible.
struct EstimateResult {
  Eigen::MatrixXd Pi_hat;
  Eigen::MatrixXd Pi_feasible;
  std::optional<Eigen::MatrixXd> U_hat;  // p x k orthonormal basis
  std::vector<int> support;              // 0-based indices of diag(Pi_hat)
  int rank = 0;
  SolveDiagnostics diagnostics;
  bool basis_rank_deficient = false;
  std::string estimator;
};

// Options for the a-posteriori certification of tau = 0 fits.
struct CertifyOptions {
  bool vi_check = true;
  int members = 100;
  double slack_tol = 1e-4;
  std::uint64_t seed = 0x66737063ULL;  // fixed so results are pure in inputs
};

// Strongly convex estimator: requires cfg.tau > pen.zeta_minus().
EstimateResult convex_spca(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                           const PenaltyConfig& pen, const SolverConfig& cfg);

// tau = 0 estimator; the result is a certified local optimum (variational
// inequality checked against random Fantope members; failures are flagged in
// diagnostics, not fatal). Warns via diagnostics.gap_condition_warning when
// zeta_minus > (lambda_k - lambda_{k+1})/4 on SigmaHat.
EstimateResult nonconvex_spca(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                              const PenaltyConfig& pen, const SolverConfig& cfg,
                              const CertifyOptions& certify = {});

// Top-k eigenprojector of the support-restricted submatrix, embedded back
// into p x p. Requires |support| >= k.
EstimateResult oracle_estimator(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                                const std::vector<int>& support);

// Top-k eigenprojector of SigmaHat. If lambda_k = lambda_{k+1} exactly the
// projector is not unique; the eigensolver's choice is returned and
// *degenerate_gap set.
Eigen::MatrixXd pca_projector(const Eigen::MatrixXd& SigmaHat, int k,
                              bool* degenerate_gap = nullptr);

struct BasisExtraction {
  Eigen::MatrixXd U;  // p x k, column-orthonormal
  bool rank_deficient = false;
};

// Top-k eigenvectors of Pi_hat, rotated so U^T SigmaHat U is diagonal with
// decreasing diagonal, columns sign-fixed (largest-magnitude entry positive).
BasisExtraction extract_basis(const Eigen::MatrixXd& Pi_hat,
                              const Eigen::MatrixXd& SigmaHat, int k,
                              double rank_threshold = 1e-6);

// Number of eigenvalues exceeding threshold.
int numerical_rank(const Eigen::MatrixXd& M, double threshold = 1e-6);

// {i : |M_ii| > threshold}, 0-based.
std::vector<int> diagonal_support(const Eigen::MatrixXd& M, double threshold = 1e-8);

// Random members of F^k (projections of Gaussian symmetric matrices); used
// by the variational-inequality certificate and property tests.
std::vector<Eigen::MatrixXd> random_fantope_members(const FantopeSpec& spec, int count,
                                                    std::uint64_t seed);

std::string to_json_string(const EstimateResult& result);
EstimateResult estimate_result_from_json(const std::string& text);

}  // namespace fspca
