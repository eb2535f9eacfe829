#pragma once

#include <Eigen/Core>
#include <string>

namespace fspca {

enum class PenaltyFamily { kMcp, kScad, kL1 };

// Decomposable matrix penalty P_lambda(M) = sum_ij p_lambda(M_ij), where the
// scalar penalty splits as p_lambda(t) = lambda*|t| + q_lambda(t) with
// q_lambda concave, q_lambda(0) = q'_lambda(0) = 0, |q'_lambda| <= lambda.
//
// Families:
//   MCP   p(t) = lambda*|t| - t^2/(2b)   for |t| <= b*lambda,
//         p(t) = b*lambda^2/2            beyond; requires b > 1.
//   SCAD  the usual three-piece penalty with knots at lambda and b*lambda;
//         requires b > 2.
//   L1    p(t) = lambda*|t|.
//
// Derived quantities: nu is the unbiasedness threshold (p'(t) = 0 for
// |t| >= nu; b*lambda for MCP/SCAD, +inf for L1) and zeta_minus bounds the
// concavity (q'(t') - q'(t) >= -zeta_minus*(t' - t); 1/b for MCP,
// 1/(b - 1) for SCAD, 0 for L1). The SCAD values are the standard ones from
// the literature.
struct PenaltyConfig {
  PenaltyFamily family = PenaltyFamily::kL1;
  double lambda = 0.0;
  double b = 0.0;  // concavity parameter; ignored for L1

  double nu() const;
  double zeta_minus() const;
  void validate() const;  // throws ValidationError on a bad config
};

PenaltyConfig make_mcp(double lambda, double b);
PenaltyConfig make_scad(double lambda, double b);
PenaltyConfig make_l1(double lambda);

const char* family_name(PenaltyFamily family);
PenaltyFamily family_from_name(const std::string& name);

// p_lambda(t); even in t, nondecreasing in |t|.
double penalty_value(const PenaltyConfig& cfg, double t);

// q_lambda(t) = p_lambda(t) - lambda*|t|.
double concave_part_value(const PenaltyConfig& cfg, double t);

// q'_lambda(t); odd, nonincreasing, |q'| <= lambda.
double concave_part_derivative(const PenaltyConfig& cfg, double t);

// p'_lambda(t) = lambda*sign(t) + q'_lambda(t) for t != 0; returns lambda at
// t = 0 (the right derivative).
double penalty_derivative(const PenaltyConfig& cfg, double t);

// sum_ij p_lambda(M_ij).
double penalty_total(const PenaltyConfig& cfg, const Eigen::MatrixXd& M);

// Generalized soft-thresholding: argmin_phi 0.5*rho*(phi - a)^2 + p_lambda(phi).
// Requires rho > zeta_minus so the scalar problem has a unique minimizer
// (rho*b > 1 for MCP, rho*(b - 1) > 1 for SCAD); violations throw
// ValidationError naming the condition. Ties at branch boundaries resolve
// toward the smaller-magnitude output.
double prox(const PenaltyConfig& cfg, double a, double rho);

// Elementwise prox; symmetric input yields symmetric output.
Eigen::MatrixXd prox_matrix(const PenaltyConfig& cfg, const Eigen::MatrixXd& A,
                            double rho);

// JSON form: {"family": "mcp"|"scad"|"l1", "lambda": <float>, "b": <float>}.
std::string to_json_string(const PenaltyConfig& cfg);
PenaltyConfig penalty_config_from_json(const std::string& text);

}  // namespace fspca
