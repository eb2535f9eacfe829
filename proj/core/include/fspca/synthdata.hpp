#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fspca/rng.hpp"

namespace fspca {

// A population covariance in spectral form together with its true
// k-dimensional principal projection. eigvals are descending and eigvecs
// columns match them, so Sigma = V diag(eigvals) V^T and
// Pi_star = V[:, :k] V[:, :k]^T exactly as constructed.
struct CovarianceModel {
  std::string name;  // "dataset1" | "dataset2" | "custom"
  int p = 0;
  int k = 0;
  int s = 0;                  // |supp(diag(Pi_star))|
  std::uint64_t seed = 0;     // draw seed (dataset2); 0 otherwise
  Eigen::VectorXd eigvals;    // descending, length p
  Eigen::MatrixXd eigvecs;    // p x p orthonormal
  Eigen::MatrixXd Sigma;      // p x p
  Eigen::MatrixXd Pi_star;    // p x p projection, rank k
  std::vector<int> support;   // 0-based
  double min_signal = 0.0;    // min nonzero |Pi_star_ij| for this draw
};

// Spiked model with eigenvalues (100, 1, ..., 1): the leading eigenvector has
// its first five entries equal to 1/sqrt(5). Requires p >= 5.
CovarianceModel dataset1_model(int p);

// Eigenvalues (100, 100, 100, 100, 10, 1, ..., 1); the top five eigenvectors
// are a random 10 x 5 Gaussian block orthonormalized in place (resampled if
// degenerate) and embedded in the first ten rows. Requires p >= 10.
CovarianceModel dataset2_model(int p, std::uint64_t seed);

// Model from an explicit covariance (spectral support/k inferred from the
// top-k eigenprojector).
CovarianceModel custom_model(const Eigen::MatrixXd& Sigma, int k);

// Complete the given orthonormal columns to a full orthonormal basis by
// Gram-Schmidt over the identity's columns.
Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& lead, int p);

// n i.i.d. rows from N(0, Sigma) via Sigma^{1/2} z; z is drawn row by row,
// component by component, from the stream.
Eigen::MatrixXd sample_gaussian(const CovarianceModel& model, int n,
                                rng::Stream& stream);
Eigen::MatrixXd sample_gaussian(const CovarianceModel& model, int n,
                                std::uint64_t seed);

// (1/n) X^T X (no centering; the sampling model has zero mean).
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X);

std::string to_json_string(const CovarianceModel& model);
CovarianceModel model_from_json(const std::string& text);

}  // namespace fspca
