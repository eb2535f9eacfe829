#pragma once

#include <Eigen/Core>

namespace fspca {

// The Fantope F^k = {X symmetric : 0 <= X <= I, tr(X) = k}, the convex hull
// of the rank-k orthogonal projection matrices.
struct FantopeSpec {
  int k = 1;  // target subspace dimension
  int p = 1;  // ambient dimension
  void validate() const;  // requires 1 <= k <= p
};

// Symmetric eigendecomposition A = V diag(w) V^T with ascending eigenvalues.
void eigh(const Eigen::MatrixXd& A, Eigen::VectorXd& eigvals,
          Eigen::MatrixXd& eigvecs);

// max |A - A^T| relative to max(1, max |A|).
double relative_asymmetry(const Eigen::MatrixXd& A);

// (A + A^T)/2 when the relative asymmetry is within 1e-8; throws
// ValidationError beyond that.
Eigen::MatrixXd symmetrized_checked(const Eigen::MatrixXd& A);

// Water level theta* with sum_i min(1, max(0, eigs_i - theta*)) = k, found by
// bisection on [min(eigs) - 1, max(eigs)] (the clipped sum is nonincreasing
// in theta). When the equation has a flat interval of solutions, the
// bisection limit inside it is returned.
double find_waterlevel(const Eigen::VectorXd& eigs, int k);

// Euclidean projection onto F^k: eigendecompose, shift eigenvalues by the
// water level, clip to [0, 1], reconstruct.
Eigen::MatrixXd project_fantope(const Eigen::MatrixXd& A, const FantopeSpec& spec);

// True iff all eigenvalues lie in [-tol, 1 + tol] and |tr(X) - k| <= tol.
bool is_member(const Eigen::MatrixXd& X, const FantopeSpec& spec, double tol);

// How far X is from F^k: max of eigenvalue range violations and |tr - k|.
double fantope_violation(const Eigen::MatrixXd& X, const FantopeSpec& spec);

struct LinearMaxResult {
  double value;               // lambda_1 + ... + lambda_k
  Eigen::MatrixXd projector;  // a top-k eigenprojector attaining the value
};

// max_{X in F^k} <Sigma, X> together with its maximizer (unique iff
// lambda_k > lambda_{k+1}).
LinearMaxResult fantope_linear_max(const Eigen::MatrixXd& Sigma,
                                   const FantopeSpec& spec);

}  // namespace fspca
