#include "fspca/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fspca/errors.hpp"
#include "fspca/fantope.hpp"

namespace fspca {

namespace {

// Builds Sigma/Pi_star/support/min_signal from spectral pieces already in
// the model.
void finalize_from_spectrum(CovarianceModel& model) {
  const int p = model.p;
  model.Sigma = model.eigvecs * model.eigvals.asDiagonal() * model.eigvecs.transpose();
  model.Sigma = 0.5 * (model.Sigma + model.Sigma.transpose()).eval();
  const Eigen::MatrixXd U = model.eigvecs.leftCols(model.k);
  model.Pi_star = U * U.transpose();
  model.Pi_star = 0.5 * (model.Pi_star + model.Pi_star.transpose()).eval();

  model.support.clear();
  for (int i = 0; i < p; ++i)
    if (std::abs(model.Pi_star(i, i)) > 1e-10) model.support.push_back(i);
  model.s = static_cast<int>(model.support.size());

  double min_signal = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const double a = std::abs(model.Pi_star(i, j));
      if (a > 1e-12) min_signal = std::min(min_signal, a);
    }
  model.min_signal = std::isfinite(min_signal) ? min_signal : 0.0;
}

}  // namespace

Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& lead, int p) {
  const int m = static_cast<int>(lead.cols());
  Eigen::MatrixXd V(p, p);
  V.leftCols(m) = lead;
  int have = m;
  for (int j = 0; j < p && have < p; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    v(j) = 1.0;
    // Two Gram-Schmidt sweeps for numerical orthogonality.
    for (int sweep = 0; sweep < 2; ++sweep)
      for (int c = 0; c < have; ++c) v -= V.col(c).dot(v) * V.col(c);
    const double norm = v.norm();
    if (norm > 1e-8) {
      V.col(have) = v / norm;
      ++have;
    }
  }
  if (have < p)
    throw NumericalError("orthonormal_completion: could not complete the basis");
  return V;
}

CovarianceModel dataset1_model(int p) {
  if (p < 5) throw ValidationError("dataset1_model requires p >= 5");
  CovarianceModel model;
  model.name = "dataset1";
  model.p = p;
  model.k = 1;
  model.seed = 0;
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < 5; ++i) u1(i) = 1.0 / std::sqrt(5.0);
  model.eigvals = Eigen::VectorXd::Ones(p);
  model.eigvals(0) = 100.0;
  model.eigvecs = orthonormal_completion(u1, p);
  finalize_from_spectrum(model);
  return model;
}

CovarianceModel dataset2_model(int p, std::uint64_t seed) {
  if (p < 10) throw ValidationError("dataset2_model requires p >= 10");
  CovarianceModel model;
  model.name = "dataset2";
  model.p = p;
  model.k = 5;
  model.seed = seed;

  rng::Stream stream(rng::derive_seed(seed, rng::kTagModel));
  Eigen::MatrixXd lead;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    Eigen::MatrixXd block(10, 5);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 5; ++j) block(i, j) = stream.normal();
    // Orthonormalize the columns in place (Gram-Schmidt, two sweeps).
    bool degenerate = false;
    for (int j = 0; j < 5 && !degenerate; ++j) {
      for (int sweep = 0; sweep < 2; ++sweep)
        for (int c = 0; c < j; ++c)
          block.col(j) -= block.col(c).dot(block.col(j)) * block.col(c);
      const double norm = block.col(j).norm();
      if (norm < 1e-8) {
        degenerate = true;
        break;
      }
      block.col(j) /= norm;
    }
    if (degenerate) continue;
    lead = Eigen::MatrixXd::Zero(p, 5);
    lead.topRows(10) = block;
    // All ten rows must stay in the support of diag(Pi_star).
    const Eigen::VectorXd diag = (lead * lead.transpose()).diagonal().head(10);
    ok = (diag.array() > 1e-10).all();
  }
  if (!ok)
    throw NumericalError("dataset2_model: failed to draw a nondegenerate basis");

  model.eigvals = Eigen::VectorXd::Ones(p);
  model.eigvals(0) = model.eigvals(1) = model.eigvals(2) = model.eigvals(3) = 100.0;
  model.eigvals(4) = 10.0;
  model.eigvecs = orthonormal_completion(lead, p);
  finalize_from_spectrum(model);
  return model;
}

CovarianceModel custom_model(const Eigen::MatrixXd& Sigma, int k) {
  const Eigen::MatrixXd S = symmetrized_checked(Sigma);
  const int p = static_cast<int>(S.rows());
  if (k < 1 || k > p) throw ValidationError("custom_model: need 1 <= k <= p");
  CovarianceModel model;
  model.name = "custom";
  model.p = p;
  model.k = k;
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(S, w, V);
  model.eigvals = w.reverse();
  model.eigvecs = V.rowwise().reverse();
  finalize_from_spectrum(model);
  return model;
}

Eigen::MatrixXd sample_gaussian(const CovarianceModel& model, int n,
                                rng::Stream& stream) {
  if (n < 1) throw ValidationError("sample_gaussian: n must be >= 1");
  if (model.eigvals.minCoeff() < -1e-8)
    throw NumericalError("sample_gaussian: Sigma is not PSD");
  const int p = model.p;
  Eigen::VectorXd sq(p);
  for (int i = 0; i < p; ++i) sq(i) = std::sqrt(std::max(0.0, model.eigvals(i)));
  const Eigen::MatrixXd root =
      model.eigvecs * sq.asDiagonal() * model.eigvecs.transpose();
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = stream.normal();
    X.row(i) = (root * z).transpose();
  }
  return X;
}

Eigen::MatrixXd sample_gaussian(const CovarianceModel& model, int n,
                                std::uint64_t seed) {
  rng::Stream stream(rng::derive_seed(seed, rng::kTagData));
  return sample_gaussian(model, n, stream);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X) {
  if (X.rows() < 1) throw ValidationError("sample_covariance: need n >= 1");
  Eigen::MatrixXd S = X.transpose() * X / static_cast<double>(X.rows());
  return 0.5 * (S + S.transpose()).eval();
}

std::string to_json_string(const CovarianceModel& model) {
  nlohmann::json j;
  j["name"] = model.name;
  j["p"] = model.p;
  j["k"] = model.k;
  j["s"] = model.s;
  j["seed"] = model.seed;
  j["rng"] = rng::kGeneratorName;

  // Compact spectral form when the trailing spectrum is flat: eigenvalues,
  // the leading eigenvector block, and the common tail eigenvalue.
  const int p = model.p;
  int m = model.k;
  bool flat_tail = true;
  for (int i = model.k + 1; i < p; ++i)
    if (model.eigvals(i) != model.eigvals(model.k)) {
      flat_tail = false;
      break;
    }
  if (!flat_tail || model.k == p) m = p;

  j["lead_count"] = m;
  nlohmann::json eig = nlohmann::json::array();
  for (int i = 0; i < p; ++i) eig.push_back(model.eigvals(i));
  j["eigvals"] = eig;
  nlohmann::json lead = nlohmann::json::array();
  for (int i = 0; i < p; ++i)
    for (int c = 0; c < m; ++c) lead.push_back(model.eigvecs(i, c));
  j["lead_vectors"] = lead;
  j["support"] = model.support;
  j["min_signal"] = model.min_signal;
  nlohmann::json pi = nlohmann::json::array();
  for (int i = 0; i < p; ++i)
    for (int c = 0; c < p; ++c) pi.push_back(model.Pi_star(i, c));
  j["pi_star"] = pi;
  return j.dump();
}

CovarianceModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
  CovarianceModel model;
  try {
    model.name = j.value("name", "custom");
    model.p = j.at("p").get<int>();
    model.k = j.at("k").get<int>();
    model.seed = j.value("seed", std::uint64_t{0});
    const int p = model.p;
    const int m = j.at("lead_count").get<int>();
    if (m < model.k || m > p)
      throw ValidationError("model JSON: bad lead_count");
    model.eigvals.resize(p);
    const auto& eig = j.at("eigvals");
    if (static_cast<int>(eig.size()) != p)
      throw ValidationError("model JSON: eigvals length mismatch");
    for (int i = 0; i < p; ++i) model.eigvals(i) = eig.at(i).get<double>();
    const auto& lead = j.at("lead_vectors");
    if (static_cast<int>(lead.size()) != p * m)
      throw ValidationError("model JSON: lead_vectors length mismatch");
    Eigen::MatrixXd L(p, m);
    int t = 0;
    for (int i = 0; i < p; ++i)
      for (int c = 0; c < m; ++c) L(i, c) = lead.at(t++).get<double>();
    model.eigvecs = (m == p) ? L : orthonormal_completion(L, p);
    finalize_from_spectrum(model);
    // Prefer the stored projection: it round-trips exactly.
    if (j.contains("pi_star")) {
      const auto& pi = j["pi_star"];
      if (static_cast<int>(pi.size()) != p * p)
        throw ValidationError("model JSON: pi_star length mismatch");
      t = 0;
      for (int i = 0; i < p; ++i)
        for (int c = 0; c < p; ++c) model.Pi_star(i, c) = pi.at(t++).get<double>();
    }
    if (j.contains("support")) {
      model.support = j["support"].get<std::vector<int>>();
      model.s = static_cast<int>(model.support.size());
    }
    if (j.contains("min_signal")) model.min_signal = j["min_signal"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model JSON: ") + e.what());
  }
  return model;
}

}  // namespace fspca
