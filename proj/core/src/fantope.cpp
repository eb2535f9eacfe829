#include "fspca/fantope.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#ifdef FSPCA_USE_LAPACKE
#include <lapacke.h>
extern "C" void openblas_set_num_threads(int);
#endif

#include "fspca/errors.hpp"

namespace fspca {

void FantopeSpec::validate() const {
  if (k < 1 || p < 1 || k > p) {
    std::ostringstream msg;
    msg << "fantope: need 1 <= k <= p, got k=" << k << ", p=" << p;
    throw ValidationError(msg.str());
  }
}

#ifdef FSPCA_USE_LAPACKE
namespace {

// Pin the BLAS backend to one thread; parallelism lives at the replication
// level and per-call determinism must not depend on it.
void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

Eigen::VectorXd eig_values_only(const Eigen::MatrixXd& A) {
  pin_blas_threads();
  const int p = static_cast<int>(A.rows());
  Eigen::MatrixXd work = A;
  Eigen::VectorXd w(p);
  const int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', p, work.data(), p, w.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "eigh: dsyevd(N) failed with info=" << info;
    throw NumericalError(msg.str());
  }
  return w;
}

// Eigenpairs with eigenvalue in (lo, hi]; returns the count m, with vectors
// in the first m columns of Z and values in the first m entries of w.
int eig_range(const Eigen::MatrixXd& A, double lo, double hi,
              Eigen::VectorXd& w, Eigen::MatrixXd& Z) {
  pin_blas_threads();
  const int p = static_cast<int>(A.rows());
  Eigen::MatrixXd work = A;
  w.resize(p);
  Z.resize(p, p);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(p));
  lapack_int m = 0;
  const int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', p,
                                  work.data(), p, lo, hi, 0, 0, 0.0, &m,
                                  w.data(), Z.data(), p, isuppz.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "eigh: dsyevr failed with info=" << info;
    throw NumericalError(msg.str());
  }
  return static_cast<int>(m);
}

}  // namespace
#endif

void eigh(const Eigen::MatrixXd& A, Eigen::VectorXd& eigvals,
          Eigen::MatrixXd& eigvecs) {
  if (A.rows() != A.cols())
    throw ValidationError("eigh: matrix must be square");
#ifdef FSPCA_USE_LAPACKE
  pin_blas_threads();
  const int p = static_cast<int>(A.rows());
  eigvecs = A;
  eigvals.resize(p);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', p,
                                  eigvecs.data(), p, eigvals.data());
  if (info != 0) {
    std::ostringstream msg;
    msg << "eigh: dsyevd failed with info=" << info;
    throw NumericalError(msg.str());
  }
#else
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigh: eigendecomposition failed");
  eigvals = es.eigenvalues();
  eigvecs = es.eigenvectors();
#endif
}

double relative_asymmetry(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) return std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A - A.transpose()).cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXd symmetrized_checked(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw ValidationError("symmetrized_checked: matrix must be square");
  const double asym = relative_asymmetry(A);
  if (asym > 1e-8) {
    std::ostringstream msg;
    msg << "matrix is not symmetric (relative asymmetry " << asym << " > 1e-8)";
    throw ValidationError(msg.str());
  }
  return 0.5 * (A + A.transpose());
}

namespace {

double clipped_sum(const Eigen::VectorXd& eigs, double theta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    s += std::min(1.0, std::max(0.0, eigs(i) - theta));
  return s;
}

}  // namespace

double find_waterlevel(const Eigen::VectorXd& eigs, int k) {
  if (k < 1 || k > eigs.size())
    throw ValidationError("find_waterlevel: need 1 <= k <= length(eigs)");
  double lo = eigs.minCoeff() - 1.0;  // clipped sum = p >= k here
  double hi = eigs.maxCoeff();        // clipped sum = 0 < k here
  const double scale = std::max(1.0, std::abs(lo) + std::abs(hi));
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (clipped_sum(eigs, mid) >= static_cast<double>(k))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd project_fantope(const Eigen::MatrixXd& A, const FantopeSpec& spec) {
  spec.validate();
  if (A.rows() != spec.p || A.cols() != spec.p)
    throw ValidationError("project_fantope: matrix size does not match spec.p");
  const Eigen::MatrixXd S = symmetrized_checked(A);
#ifdef FSPCA_USE_LAPACKE
  // Only eigenvectors above the water level carry weight in the clipped
  // reconstruction, so compute the spectrum first and then just those
  // eigenpairs. For spiked inputs this is a small fraction of p.
  const Eigen::VectorXd w = eig_values_only(S);
  const double theta = find_waterlevel(w, spec.k);
  Eigen::VectorXd wr;
  Eigen::MatrixXd Z;
  const int m = eig_range(S, theta, w(w.size() - 1) + 1.0, wr, Z);
  if (m > 0) {
    Eigen::VectorXd gamma(m);
    for (int i = 0; i < m; ++i)
      gamma(i) = std::min(1.0, std::max(0.0, wr(i) - theta));
    const auto Zm = Z.leftCols(m);
    Eigen::MatrixXd X = Zm * gamma.asDiagonal() * Zm.transpose();
    return 0.5 * (X + X.transpose());
  }
  // Degenerate range query: fall through to the full decomposition.
#endif
  Eigen::VectorXd w2;
  Eigen::MatrixXd V;
  eigh(S, w2, V);
  const double theta2 = find_waterlevel(w2, spec.k);
  Eigen::VectorXd gamma(w2.size());
  for (Eigen::Index i = 0; i < w2.size(); ++i)
    gamma(i) = std::min(1.0, std::max(0.0, w2(i) - theta2));
  Eigen::MatrixXd X = V * gamma.asDiagonal() * V.transpose();
  return 0.5 * (X + X.transpose());
}

double fantope_violation(const Eigen::MatrixXd& X, const FantopeSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd S = symmetrized_checked(X);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(S, w, V);
  const double below = std::max(0.0, -w.minCoeff());
  const double above = std::max(0.0, w.maxCoeff() - 1.0);
  const double trace_gap = std::abs(S.trace() - static_cast<double>(spec.k));
  return std::max({below, above, trace_gap});
}

bool is_member(const Eigen::MatrixXd& X, const FantopeSpec& spec, double tol) {
  return fantope_violation(X, spec) <= tol;
}

LinearMaxResult fantope_linear_max(const Eigen::MatrixXd& Sigma,
                                   const FantopeSpec& spec) {
  spec.validate();
  if (Sigma.rows() != spec.p || Sigma.cols() != spec.p)
    throw ValidationError("fantope_linear_max: matrix size does not match spec.p");
  const Eigen::MatrixXd S = symmetrized_checked(Sigma);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(S, w, V);
  const Eigen::Index p = w.size();
  double value = 0.0;
  for (int i = 0; i < spec.k; ++i) value += w(p - 1 - i);
  const Eigen::MatrixXd U = V.rightCols(spec.k);
  Eigen::MatrixXd proj = U * U.transpose();
  return {value, 0.5 * (proj + proj.transpose())};
}

}  // namespace fspca
