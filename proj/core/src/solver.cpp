#include "fspca/solver.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"

namespace fspca {

void SolverConfig::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw ValidationError("solver: tau must be a finite nonnegative real");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw ValidationError("solver: rho must be a positive real");
  if (max_iters < 1)
    throw ValidationError("solver: max_iters must be >= 1");
}

double SolverConfig::resolved_primal_tol(int p) const {
  return primal_tol > 0.0 ? primal_tol : 1e-7 * static_cast<double>(p);
}

double SolverConfig::resolved_dual_tol(int p) const {
  return dual_tol > 0.0 ? dual_tol : 1e-7 * static_cast<double>(p);
}

Eigen::MatrixXd update_pi(const AdmmState& state, const Eigen::MatrixXd& SigmaHat,
                          const SolverConfig& cfg, const FantopeSpec& spec) {
  const Eigen::MatrixXd arg =
      (cfg.rho * state.Phi - state.Theta + SigmaHat) / (cfg.rho + cfg.tau);
  return project_fantope(arg, spec);
}

Eigen::MatrixXd update_phi(const AdmmState& state, const PenaltyConfig& pen,
                           const SolverConfig& cfg) {
  Eigen::MatrixXd arg = state.Pi + state.Theta / cfg.rho;
  arg = 0.5 * (arg + arg.transpose());
  return prox_matrix(pen, arg, cfg.rho);
}

Eigen::MatrixXd update_theta(const AdmmState& state, const SolverConfig& cfg) {
  return state.Theta + cfg.rho * (state.Pi - state.Phi);
}

SolveResult solve(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                  const PenaltyConfig& pen, const SolverConfig& cfg,
                  const std::optional<Eigen::MatrixXd>& theta0,
                  const IterationObserver& observer) {
  spec.validate();
  pen.validate();
  cfg.validate();
  const Eigen::MatrixXd Sigma = symmetrized_checked(SigmaHat);
  if (Sigma.rows() != spec.p)
    throw ValidationError("solve: SigmaHat size does not match spec.p");
  const int p = spec.p;
  const double ptol = cfg.resolved_primal_tol(p);
  const double dtol = cfg.resolved_dual_tol(p);

  AdmmState s;
  s.Pi = Eigen::MatrixXd::Zero(p, p);
  s.Phi = Eigen::MatrixXd::Zero(p, p);
  s.Theta = theta0 ? symmetrized_checked(*theta0) : Eigen::MatrixXd::Zero(p, p);
  if (s.Theta.rows() != p)
    throw ValidationError("solve: theta0 size does not match spec.p");

  bool converged = false;
  for (int t = 0; t < cfg.max_iters; ++t) {
    s.Pi = update_pi(s, Sigma, cfg, spec);
    const Eigen::MatrixXd phi_new = update_phi(s, pen, cfg);
    s.dual_residual = cfg.rho * (phi_new - s.Phi).norm();
    s.Phi = phi_new;
    s.Theta = update_theta(s, cfg);
    s.primal_residual = (s.Pi - s.Phi).norm();
    s.iter = t + 1;
    if (!std::isfinite(s.primal_residual) || !std::isfinite(s.dual_residual))
      throw NumericalError("solve: residuals became non-finite");
    if (observer) observer(s);
    if (s.primal_residual <= ptol && s.dual_residual <= dtol) {
      converged = true;
      break;
    }
  }

  SolveResult res;
  res.Phi = s.Phi;
  res.Pi = s.Pi;
  res.Theta = s.Theta;
  res.diagnostics.iterations = s.iter;
  res.diagnostics.primal_residual = s.primal_residual;
  res.diagnostics.dual_residual = s.dual_residual;
  res.diagnostics.converged = converged;
  res.diagnostics.objective = objective_value(s.Phi, Sigma, pen, cfg.tau);
  res.diagnostics.fantope_gap = fantope_violation(s.Pi, spec);
  return res;
}

double objective_value(const Eigen::MatrixXd& Pi, const Eigen::MatrixXd& SigmaHat,
                       const PenaltyConfig& pen, double tau) {
  if (Pi.rows() != SigmaHat.rows() || Pi.cols() != SigmaHat.cols())
    throw ValidationError("objective_value: shape mismatch");
  const double inner = (SigmaHat.array() * Pi.array()).sum();
  return -inner + 0.5 * tau * Pi.squaredNorm() + penalty_total(pen, Pi);
}

double vi_max_slack(const Eigen::MatrixXd& Pi_hat, const Eigen::MatrixXd& SigmaHat,
                    const PenaltyConfig& pen,
                    const std::vector<Eigen::MatrixXd>& members) {
  const Eigen::Index p = Pi_hat.rows();
  double worst = -std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd& M : members) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i < p; ++i) {
        const double d = Pi_hat(i, j) - M(i, j);
        double g = -SigmaHat(i, j);
        if (Pi_hat(i, j) != 0.0) {
          g += penalty_derivative(pen, Pi_hat(i, j));
        } else {
          // At zero entries the subgradient z in [-1, 1] is free; picking
          // z = sign(M_ij) minimizes the term d*g = -M_ij*g, matching the
          // existence argument for the first-order condition.
          g += pen.lambda * (M(i, j) > 0 ? 1.0 : (M(i, j) < 0 ? -1.0 : 0.0));
        }
        acc += d * g;
      }
    }
    worst = std::max(worst, acc);
  }
  return worst;
}

std::string to_json_string(const SolverConfig& cfg) {
  nlohmann::json j;
  j["tau"] = cfg.tau;
  j["rho"] = cfg.rho;
  j["max_iters"] = cfg.max_iters;
  j["primal_tol"] = cfg.primal_tol;
  j["dual_tol"] = cfg.dual_tol;
  return j.dump();
}

SolverConfig solver_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("solver config: bad JSON: ") + e.what());
  }
  SolverConfig cfg;
  cfg.tau = j.value("tau", 0.0);
  cfg.rho = j.value("rho", 1.0);
  cfg.max_iters = j.value("max_iters", 2000);
  cfg.primal_tol = j.value("primal_tol", -1.0);
  cfg.dual_tol = j.value("dual_tol", -1.0);
  cfg.validate();
  return cfg;
}

std::string to_json_string(const SolveDiagnostics& d) {
  nlohmann::json j;
  j["iterations"] = d.iterations;
  j["primal_residual"] = d.primal_residual;
  j["dual_residual"] = d.dual_residual;
  j["converged"] = d.converged;
  j["objective"] = d.objective;
  j["fantope_gap"] = d.fantope_gap;
  j["vi_checked"] = d.vi_checked;
  j["vi_ok"] = d.vi_ok;
  j["vi_max_slack"] = d.vi_max_slack;
  j["gap_condition_warning"] = d.gap_condition_warning;
  return j.dump();
}

}  // namespace fspca
