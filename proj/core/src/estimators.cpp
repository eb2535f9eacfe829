#include "fspca/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"
#include "fspca/rng.hpp"

namespace fspca {

namespace {

Eigen::MatrixXd random_symmetric(rng::Stream& stream, int p) {
  Eigen::MatrixXd G(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) G(i, j) = stream.normal();
  return 0.5 * (G + G.transpose());
}

void fill_common_fields(EstimateResult& result, const Eigen::MatrixXd& SigmaHat,
                        const FantopeSpec& spec) {
  result.support = diagonal_support(result.Pi_hat);
  result.rank = numerical_rank(result.Pi_feasible);
  BasisExtraction basis = extract_basis(result.Pi_hat, SigmaHat, spec.k);
  result.basis_rank_deficient = basis.rank_deficient;
  if (!basis.rank_deficient) result.U_hat = std::move(basis.U);
}

}  // namespace

std::vector<Eigen::MatrixXd> random_fantope_members(const FantopeSpec& spec, int count,
                                                    std::uint64_t seed) {
  spec.validate();
  rng::Stream stream(seed);
  std::vector<Eigen::MatrixXd> members;
  members.reserve(count);
  for (int i = 0; i < count; ++i)
    members.push_back(project_fantope(random_symmetric(stream, spec.p), spec));
  return members;
}

EstimateResult convex_spca(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                           const PenaltyConfig& pen, const SolverConfig& cfg) {
  pen.validate();
  cfg.validate();
  if (!(cfg.tau > pen.zeta_minus())) {
    std::ostringstream msg;
    msg << "convex_spca requires tau > zeta_minus for strong convexity "
        << "(tau=" << cfg.tau << ", zeta_minus=" << pen.zeta_minus() << ")";
    throw ValidationError(msg.str());
  }
  SolveResult sol = solve(SigmaHat, spec, pen, cfg);
  EstimateResult result;
  result.Pi_hat = std::move(sol.Phi);
  result.Pi_feasible = std::move(sol.Pi);
  result.diagnostics = sol.diagnostics;
  result.estimator = "convex_spca";
  fill_common_fields(result, SigmaHat, spec);
  return result;
}

EstimateResult nonconvex_spca(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                              const PenaltyConfig& pen, const SolverConfig& cfg,
                              const CertifyOptions& certify) {
  pen.validate();
  cfg.validate();
  if (cfg.tau != 0.0)
    throw ValidationError("nonconvex_spca requires tau = 0 (got tau > 0)");
  SolveResult sol = solve(SigmaHat, spec, pen, cfg);
  EstimateResult result;
  result.Pi_hat = std::move(sol.Phi);
  result.Pi_feasible = std::move(sol.Pi);
  result.diagnostics = sol.diagnostics;
  result.estimator = "nonconvex_spca";

  const Eigen::MatrixXd Sigma = symmetrized_checked(SigmaHat);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(Sigma, w, V);
  const Eigen::Index p = w.size();
  if (spec.k < p) {
    const double gap = w(p - spec.k) - w(p - spec.k - 1);
    result.diagnostics.gap_condition_warning = pen.zeta_minus() > gap / 4.0;
  }
  if (certify.vi_check) {
    const std::uint64_t seed =
        rng::derive_seed(certify.seed, rng::kTagViMembers, spec.p * 131 + spec.k);
    const auto members = random_fantope_members(spec, certify.members, seed);
    result.diagnostics.vi_checked = true;
    result.diagnostics.vi_max_slack = vi_max_slack(result.Pi_hat, Sigma, pen, members);
    result.diagnostics.vi_ok = result.diagnostics.vi_max_slack <= certify.slack_tol;
  }
  fill_common_fields(result, SigmaHat, spec);
  return result;
}

EstimateResult oracle_estimator(const Eigen::MatrixXd& SigmaHat, const FantopeSpec& spec,
                                const std::vector<int>& support) {
  spec.validate();
  const Eigen::MatrixXd Sigma = symmetrized_checked(SigmaHat);
  if (Sigma.rows() != spec.p)
    throw ValidationError("oracle_estimator: SigmaHat size does not match spec.p");
  std::vector<int> idx = support;
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (static_cast<int>(idx.size()) < spec.k)
    throw ValidationError("oracle_estimator: |support| must be >= k");
  for (int i : idx)
    if (i < 0 || i >= spec.p)
      throw ValidationError("oracle_estimator: support index out of range");

  const int s = static_cast<int>(idx.size());
  Eigen::MatrixXd sub(s, s);
  for (int a = 0; a < s; ++a)
    for (int c = 0; c < s; ++c) sub(a, c) = Sigma(idx[a], idx[c]);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(sub, w, V);
  const Eigen::MatrixXd U = V.rightCols(spec.k);
  const Eigen::MatrixXd proj = U * U.transpose();

  EstimateResult result;
  result.Pi_hat = Eigen::MatrixXd::Zero(spec.p, spec.p);
  for (int a = 0; a < s; ++a)
    for (int c = 0; c < s; ++c) result.Pi_hat(idx[a], idx[c]) = proj(a, c);
  result.Pi_hat = 0.5 * (result.Pi_hat + result.Pi_hat.transpose()).eval();
  result.Pi_feasible = result.Pi_hat;
  result.diagnostics.converged = true;
  result.diagnostics.objective = objective_value(result.Pi_hat, Sigma, make_l1(0.0), 0.0);
  result.estimator = "oracle";
  fill_common_fields(result, SigmaHat, spec);
  return result;
}

Eigen::MatrixXd pca_projector(const Eigen::MatrixXd& SigmaHat, int k,
                              bool* degenerate_gap) {
  const Eigen::MatrixXd Sigma = symmetrized_checked(SigmaHat);
  const int p = static_cast<int>(Sigma.rows());
  FantopeSpec spec{k, p};
  spec.validate();
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(Sigma, w, V);
  if (degenerate_gap)
    *degenerate_gap = (k < p) && (w(p - k) == w(p - k - 1));
  const Eigen::MatrixXd U = V.rightCols(k);
  Eigen::MatrixXd proj = U * U.transpose();
  return 0.5 * (proj + proj.transpose());
}

BasisExtraction extract_basis(const Eigen::MatrixXd& Pi_hat,
                              const Eigen::MatrixXd& SigmaHat, int k,
                              double rank_threshold) {
  const Eigen::MatrixXd Pi = symmetrized_checked(Pi_hat);
  const Eigen::MatrixXd Sigma = symmetrized_checked(SigmaHat);
  const int p = static_cast<int>(Pi.rows());
  if (k < 1 || k > p) throw ValidationError("extract_basis: need 1 <= k <= p");

  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(Pi, w, V);
  BasisExtraction out;
  out.rank_deficient = w(p - k) <= rank_threshold;
  Eigen::MatrixXd U = V.rightCols(k);

  // Rotate so the basis diagonalizes SigmaHat on the extracted subspace.
  const Eigen::MatrixXd M = U.transpose() * Sigma * U;
  Eigen::VectorXd mw;
  Eigen::MatrixXd R;
  eigh(0.5 * (M + M.transpose()), mw, R);
  Eigen::MatrixXd B(p, k);
  for (int j = 0; j < k; ++j) B.col(j) = U * R.col(k - 1 - j);  // descending

  // Fix signs: largest-magnitude entry of each column positive.
  for (int j = 0; j < k; ++j) {
    Eigen::Index arg;
    B.col(j).cwiseAbs().maxCoeff(&arg);
    if (B(arg, j) < 0) B.col(j) = -B.col(j);
  }
  out.U = std::move(B);
  return out;
}

int numerical_rank(const Eigen::MatrixXd& M, double threshold) {
  const Eigen::MatrixXd S = symmetrized_checked(M);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(S, w, V);
  int count = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > threshold) ++count;
  return count;
}

std::vector<int> diagonal_support(const Eigen::MatrixXd& M, double threshold) {
  std::vector<int> idx;
  const Eigen::Index p = std::min(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < p; ++i)
    if (std::abs(M(i, i)) > threshold) idx.push_back(static_cast<int>(i));
  return idx;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) arr.push_back(M(i, j));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& arr, Eigen::Index rows,
                                 Eigen::Index cols) {
  if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw ValidationError("matrix JSON: element count does not match shape");
  Eigen::MatrixXd M(rows, cols);
  Eigen::Index t = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = arr.at(t++).get<double>();
  return M;
}

}  // namespace

std::string to_json_string(const EstimateResult& result) {
  nlohmann::json j;
  const Eigen::Index p = result.Pi_hat.rows();
  j["p"] = p;
  j["estimator"] = result.estimator;
  j["pi_hat"] = matrix_to_json(result.Pi_hat);
  j["pi_feasible"] = matrix_to_json(result.Pi_feasible);
  if (result.U_hat) {
    j["k"] = result.U_hat->cols();
    j["u_hat"] = matrix_to_json(*result.U_hat);
  } else {
    j["u_hat"] = nullptr;
  }
  j["support"] = result.support;
  j["rank"] = result.rank;
  j["basis_rank_deficient"] = result.basis_rank_deficient;
  j["diagnostics"] = nlohmann::json::parse(to_json_string(result.diagnostics));
  return j.dump();
}

EstimateResult estimate_result_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("estimate JSON: ") + e.what());
  }
  EstimateResult result;
  try {
    const Eigen::Index p = j.at("p").get<Eigen::Index>();
    result.estimator = j.value("estimator", "");
    result.Pi_hat = matrix_from_json(j.at("pi_hat"), p, p);
    result.Pi_feasible = j.contains("pi_feasible") && !j["pi_feasible"].is_null()
                             ? matrix_from_json(j["pi_feasible"], p, p)
                             : result.Pi_hat;
    if (j.contains("u_hat") && !j["u_hat"].is_null()) {
      const Eigen::Index k = j.at("k").get<Eigen::Index>();
      result.U_hat = matrix_from_json(j["u_hat"], p, k);
    }
    result.support = j.value("support", std::vector<int>{});
    result.rank = j.value("rank", 0);
    result.basis_rank_deficient = j.value("basis_rank_deficient", false);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("estimate JSON: ") + e.what());
  }
  return result;
}

}  // namespace fspca
