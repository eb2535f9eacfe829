#include "fspca/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"

namespace fspca {

namespace {

double sign_of(double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }

}  // namespace

double PenaltyConfig::nu() const {
  if (family == PenaltyFamily::kL1) return std::numeric_limits<double>::infinity();
  return b * lambda;
}

double PenaltyConfig::zeta_minus() const {
  switch (family) {
    case PenaltyFamily::kMcp:
      return 1.0 / b;
    case PenaltyFamily::kScad:
      return 1.0 / (b - 1.0);
    case PenaltyFamily::kL1:
      return 0.0;
  }
  return 0.0;
}

void PenaltyConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("penalty: lambda must be a finite nonnegative real");
  if (family == PenaltyFamily::kMcp && !(b > 1.0))
    throw ValidationError("penalty: MCP requires b > 1");
  if (family == PenaltyFamily::kScad && !(b > 2.0))
    throw ValidationError("penalty: SCAD requires b > 2");
}

PenaltyConfig make_mcp(double lambda, double b) {
  PenaltyConfig cfg{PenaltyFamily::kMcp, lambda, b};
  cfg.validate();
  return cfg;
}

PenaltyConfig make_scad(double lambda, double b) {
  PenaltyConfig cfg{PenaltyFamily::kScad, lambda, b};
  cfg.validate();
  return cfg;
}

PenaltyConfig make_l1(double lambda) {
  PenaltyConfig cfg{PenaltyFamily::kL1, lambda, 0.0};
  cfg.validate();
  return cfg;
}

const char* family_name(PenaltyFamily family) {
  switch (family) {
    case PenaltyFamily::kMcp:
      return "mcp";
    case PenaltyFamily::kScad:
      return "scad";
    case PenaltyFamily::kL1:
      return "l1";
  }
  return "l1";
}

PenaltyFamily family_from_name(const std::string& name) {
  if (name == "mcp") return PenaltyFamily::kMcp;
  if (name == "scad") return PenaltyFamily::kScad;
  if (name == "l1") return PenaltyFamily::kL1;
  throw ValidationError("penalty: unknown family '" + name + "'");
}

double penalty_value(const PenaltyConfig& cfg, double t) {
  const double lam = cfg.lambda;
  const double at = std::abs(t);
  switch (cfg.family) {
    case PenaltyFamily::kMcp: {
      const double knee = cfg.b * lam;
      if (at <= knee) return lam * at - t * t / (2.0 * cfg.b);
      return cfg.b * lam * lam / 2.0;
    }
    case PenaltyFamily::kScad: {
      if (at <= lam) return lam * at;
      if (at <= cfg.b * lam)
        return (2.0 * cfg.b * lam * at - at * at - lam * lam) / (2.0 * (cfg.b - 1.0));
      return lam * lam * (cfg.b + 1.0) / 2.0;
    }
    case PenaltyFamily::kL1:
      return lam * at;
  }
  return 0.0;
}

double concave_part_value(const PenaltyConfig& cfg, double t) {
  const double lam = cfg.lambda;
  const double at = std::abs(t);
  switch (cfg.family) {
    case PenaltyFamily::kMcp: {
      if (at <= cfg.b * lam) return -t * t / (2.0 * cfg.b);
      return cfg.b * lam * lam / 2.0 - lam * at;
    }
    case PenaltyFamily::kScad: {
      if (at <= lam) return 0.0;
      if (at <= cfg.b * lam) {
        const double d = at - lam;
        return -d * d / (2.0 * (cfg.b - 1.0));
      }
      return lam * lam * (cfg.b + 1.0) / 2.0 - lam * at;
    }
    case PenaltyFamily::kL1:
      return 0.0;
  }
  return 0.0;
}

double concave_part_derivative(const PenaltyConfig& cfg, double t) {
  const double lam = cfg.lambda;
  const double at = std::abs(t);
  switch (cfg.family) {
    case PenaltyFamily::kMcp: {
      if (at <= cfg.b * lam) return -t / cfg.b;
      return -lam * sign_of(t);
    }
    case PenaltyFamily::kScad: {
      if (at <= lam) return 0.0;
      if (at <= cfg.b * lam) return -(at - lam) / (cfg.b - 1.0) * sign_of(t);
      return -lam * sign_of(t);
    }
    case PenaltyFamily::kL1:
      return 0.0;
  }
  return 0.0;
}

double penalty_derivative(const PenaltyConfig& cfg, double t) {
  if (t == 0.0) return cfg.lambda;
  return cfg.lambda * sign_of(t) + concave_part_derivative(cfg, t);
}

double penalty_total(const PenaltyConfig& cfg, const Eigen::MatrixXd& M) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) acc += penalty_value(cfg, M(i, j));
  return acc;
}

namespace {

void check_prox_preconditions(const PenaltyConfig& cfg, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw ValidationError("prox: rho must be a positive real");
  if (cfg.family == PenaltyFamily::kMcp && !(rho * cfg.b > 1.0)) {
    std::ostringstream msg;
    msg << "prox: MCP subproblem requires rho*b > 1 for a unique minimizer "
        << "(rho=" << rho << ", b=" << cfg.b << ", rho*b=" << rho * cfg.b << ")";
    throw ValidationError(msg.str());
  }
  if (cfg.family == PenaltyFamily::kScad && !(rho * (cfg.b - 1.0) > 1.0)) {
    std::ostringstream msg;
    msg << "prox: SCAD subproblem requires rho*(b-1) > 1 for a unique minimizer "
        << "(rho=" << rho << ", b=" << cfg.b << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

namespace {

// Closed-form generalized thresholding. Under the strong-convexity
// preconditions the scalar objective is piecewise quadratic with a unique
// minimizer; the thresholds below glue continuously, so boundary ties
// coincide with the smaller-magnitude branch value.
double prox_unchecked(const PenaltyConfig& cfg, double a, double rho) {
  if (cfg.lambda == 0.0 || a == 0.0) return a;
  const double s = std::abs(a);
  const double sgn = sign_of(a);
  const double lam = cfg.lambda;
  switch (cfg.family) {
    case PenaltyFamily::kMcp: {
      if (s > cfg.b * lam) return a;  // beyond the plateau: identity
      const double soft = s - lam / rho;
      if (soft <= 0.0) return 0.0;
      return sgn * soft / (1.0 - 1.0 / (rho * cfg.b));
    }
    case PenaltyFamily::kScad: {
      if (s > cfg.b * lam) return a;
      const double soft = s - lam / rho;
      if (soft <= 0.0) return 0.0;
      if (soft <= lam) return sgn * soft;
      const double bm1 = cfg.b - 1.0;
      return sgn * (rho * bm1 * s - cfg.b * lam) / (rho * bm1 - 1.0);
    }
    case PenaltyFamily::kL1: {
      const double soft = s - lam / rho;
      return soft <= 0.0 ? 0.0 : sgn * soft;
    }
  }
  return a;
}

}  // namespace

double prox(const PenaltyConfig& cfg, double a, double rho) {
  cfg.validate();
  check_prox_preconditions(cfg, rho);
  return prox_unchecked(cfg, a, rho);
}

Eigen::MatrixXd prox_matrix(const PenaltyConfig& cfg, const Eigen::MatrixXd& A,
                            double rho) {
  cfg.validate();
  check_prox_preconditions(cfg, rho);
  if (cfg.lambda == 0.0) return A;
  Eigen::MatrixXd out(A.rows(), A.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      out(i, j) = prox_unchecked(cfg, A(i, j), rho);
  return out;
}

std::string to_json_string(const PenaltyConfig& cfg) {
  nlohmann::json j;
  j["family"] = family_name(cfg.family);
  j["lambda"] = cfg.lambda;
  j["b"] = cfg.b;
  return j.dump();
}

PenaltyConfig penalty_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("penalty config: bad JSON: ") + e.what());
  }
  PenaltyConfig cfg;
  try {
    cfg.family = family_from_name(j.at("family").get<std::string>());
    cfg.lambda = j.at("lambda").get<double>();
    cfg.b = j.value("b", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("penalty config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace fspca
