#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fspca/fantope.hpp"
#include "fspca/penalty.hpp"

namespace fspca {

// ADMM configuration for the penalized Fantope program
//   min_{Pi in F^k} -<SigmaHat, Pi> + tau/2 ||Pi||_F^2 + P_lambda(Pi).
// tau > zeta_minus makes the program strongly convex; tau = 0 is the
// nonconvex estimator (any returned point is a candidate local optimum and
// can be certified with vi_max_slack).
struct SolverConfig {
  double tau = 0.0;
  double rho = 1.0;
  int max_iters = 2000;
  // Nonpositive tolerances resolve to the default 1e-7 * p at solve time.
  double primal_tol = -1.0;
  double dual_tol = -1.0;

  void validate() const;
  double resolved_primal_tol(int p) const;
  double resolved_dual_tol(int p) const;
};

struct AdmmState {
  Eigen::MatrixXd Pi;     // Fantope-feasible iterate
  Eigen::MatrixXd Phi;    // split variable (exactly sparse after the prox)
  Eigen::MatrixXd Theta;  // scaled dual
  int iter = 0;
  double primal_residual = 0.0;  // ||Pi - Phi||_F
  double dual_residual = 0.0;    // rho * ||Phi - Phi_prev||_F
};

// One Pi update: project (rho*Phi - Theta + SigmaHat)/(rho + tau) onto F^k.
Eigen::MatrixXd update_pi(const AdmmState& state, const Eigen::MatrixXd& SigmaHat,
                          const SolverConfig& cfg, const FantopeSpec& spec);

// One Phi update: elementwise prox of Pi + Theta/rho at weight rho
// (state.Pi must already hold the new iterate).
Eigen::MatrixXd update_phi(const AdmmState& state, const PenaltyConfig& pen,
                           const SolverConfig& cfg);

// One dual ascent step: Theta + rho*(Pi - Phi).
Eigen::MatrixXd update_theta(const AdmmState& state, const SolverConfig& cfg);

struct SolveDiagnostics {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  double objective = 0.0;    // at the returned estimate
  double fantope_gap = 0.0;  // Fantope violation of the final Pi iterate
  // Local-optimality certification of tau = 0 runs (filled by the
  // estimator entry points):
  bool vi_checked = false;
  bool vi_ok = true;
  double vi_max_slack = 0.0;
  // Nonconvex runs: zeta_minus exceeded (lambda_k - lambda_{k+1})/4.
  bool gap_condition_warning = false;
};

struct SolveResult {
  Eigen::MatrixXd Phi;    // returned estimate: exactly sparse
  Eigen::MatrixXd Pi;     // final feasible iterate; use for rank/feasibility
  Eigen::MatrixXd Theta;  // final dual
  SolveDiagnostics diagnostics;
};

using IterationObserver = std::function<void(const AdmmState&)>;

// Run ADMM from Pi = Phi = Theta = 0 (Theta optionally overridden) until
// both residuals pass their tolerances or max_iters is reached.
// Non-convergence is reported through diagnostics.converged, not an error.
SolveResult solve(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                  const PenaltyConfig& pen, const SolverConfig& cfg,
                  const std::optional<Eigen::MatrixXd>& theta0 = std::nullopt,
                  const IterationObserver& observer = nullptr);

// -<SigmaHat, Pi> + tau/2 ||Pi||_F^2 + P_lambda(Pi).
double objective_value(const Eigen::MatrixXd& Pi, const Eigen::MatrixXd& SigmaHat,
                       const PenaltyConfig& pen, double tau);

// First-order certificate for tau = 0 solutions: the maximum over the given
// Fantope members M of <Pi_hat - M, -SigmaHat + G>, where G picks the
// penalty subgradient at zero entries that is least favorable to the bound
// (sign(M_ij), as in the optimality argument). Nonpositive up to numerical
// slack at a local optimum.
double vi_max_slack(const Eigen::MatrixXd& Pi_hat, const Eigen::MatrixXd& SigmaHat,
                    const PenaltyConfig& pen,
                    const std::vector<Eigen::MatrixXd>& members);

std::string to_json_string(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const std::string& text);
std::string to_json_string(const SolveDiagnostics& diag);

}  // namespace fspca
