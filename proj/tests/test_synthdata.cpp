#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fspca/errors.hpp"
#include "fspca/estimators.hpp"
#include "fspca/fantope.hpp"
#include "fspca/synthdata.hpp"

using namespace fspca;

TEST_CASE("dataset 1 covariance entries and projection") {
  CHECK_THROWS_AS(dataset1_model(4), ValidationError);
  const CovarianceModel m = dataset1_model(16);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(m.Sigma(i, j) ==
            doctest::Approx(99.0 / 5.0 + (i == j ? 1.0 : 0.0)).epsilon(1e-12));
  CHECK(m.Sigma(5, 5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.Sigma(0, 7) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(m.min_signal == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.Pi_star.trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.s == 5);
  CHECK(m.support == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("dataset 2 structure") {
  CHECK_THROWS_AS(dataset2_model(8, 1), ValidationError);
  const CovarianceModel m = dataset2_model(32, 42);
  CHECK(m.Pi_star.trace() == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(m.s == 10);
  CHECK(static_cast<int>(m.support.size()) == 10);
  for (int i = 0; i < 10; ++i) CHECK(m.support[i] == i);
  // lambda_5 - lambda_6 = 10 - 1 = 9 by construction
  CHECK(m.eigvals(4) - m.eigvals(5) == doctest::Approx(9.0));
  // a different seed draws a different basis
  const CovarianceModel m2 = dataset2_model(32, 43);
  CHECK((m.Pi_star - m2.Pi_star).norm() > 1e-3);
  // same seed reproduces exactly
  const CovarianceModel m3 = dataset2_model(32, 42);
  CHECK((m.Pi_star - m3.Pi_star).norm() == 0.0);
  CHECK(m.min_signal > 0.0);
}

TEST_CASE("both models: projector identities and top-k recovery") {
  for (const CovarianceModel& m : {dataset1_model(24), dataset2_model(24, 5)}) {
    CHECK((m.Pi_star * m.Pi_star - m.Pi_star).norm() <= 1e-10);
    CHECK(m.Pi_star.trace() == doctest::Approx(m.k).epsilon(1e-10));
    CHECK(static_cast<int>(m.support.size()) == m.s);
    const Eigen::MatrixXd P = pca_projector(m.Sigma, m.k);
    CHECK((P - m.Pi_star).norm() <= 1e-10);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const CovarianceModel m = dataset1_model(12);
  const Eigen::MatrixXd X1 = sample_gaussian(m, 20, std::uint64_t{9});
  const Eigen::MatrixXd X2 = sample_gaussian(m, 20, std::uint64_t{9});
  const Eigen::MatrixXd X3 = sample_gaussian(m, 20, std::uint64_t{10});
  CHECK((X1 - X2).norm() == 0.0);
  CHECK((X1 - X3).norm() > 1e-6);
}

TEST_CASE("law-of-large-numbers smoke checks") {
  // toy 4x4 covariance with a spike
  Eigen::MatrixXd Sigma = Eigen::MatrixXd::Identity(4, 4);
  Sigma(0, 0) = 2.0;
  Sigma(0, 1) = Sigma(1, 0) = 0.7;
  const CovarianceModel m = custom_model(Sigma, 1);
  const Eigen::MatrixXd X = sample_gaussian(m, 100000, std::uint64_t{3});
  const Eigen::MatrixXd S = sample_covariance(X);
  CHECK((S - Sigma).cwiseAbs().maxCoeff() <= 5e-2);

  const CovarianceModel id = custom_model(Eigen::MatrixXd::Identity(4, 4), 1);
  const Eigen::MatrixXd Xi = sample_gaussian(id, 100000, std::uint64_t{4});
  const Eigen::MatrixXd Si = sample_covariance(Xi);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(Si(i, j)) <= 5e-2);
}

TEST_CASE("sample covariance basics") {
  Eigen::MatrixXd X(1, 3);
  X << 1.0, 2.0, -1.0;
  const Eigen::MatrixXd S = sample_covariance(X);
  CHECK((S - X.row(0).transpose() * X.row(0)).norm() <= 1e-15);

  CHECK(sample_covariance(Eigen::MatrixXd::Zero(5, 3)).norm() == 0.0);

  const CovarianceModel m = dataset1_model(10);
  const Eigen::MatrixXd Xr = sample_gaussian(m, 7, std::uint64_t{5});
  const Eigen::MatrixXd Sr = sample_covariance(Xr);
  Eigen::VectorXd w;
  Eigen::MatrixXd V;
  eigh(Sr, w, V);
  CHECK(w.minCoeff() >= -1e-10);
}

TEST_CASE("model JSON round trip preserves the covariance bit-for-bit") {
  for (const CovarianceModel& m : {dataset1_model(16), dataset2_model(16, 77)}) {
    const CovarianceModel back = model_from_json(to_json_string(m));
    CHECK((back.Sigma - m.Sigma).norm() == 0.0);
    CHECK((back.Pi_star - m.Pi_star).norm() == 0.0);
    CHECK(back.support == m.support);
    CHECK(back.k == m.k);
    CHECK(back.s == m.s);
    CHECK(back.seed == m.seed);
    // sampling from the reloaded model reproduces the same data
    const Eigen::MatrixXd X1 = sample_gaussian(m, 8, std::uint64_t{2});
    const Eigen::MatrixXd X2 = sample_gaussian(back, 8, std::uint64_t{2});
    CHECK((X1 - X2).norm() == 0.0);
  }
}

TEST_CASE("orthonormal completion") {
  const CovarianceModel m = dataset2_model(20, 11);
  const Eigen::MatrixXd V = m.eigvecs;
  CHECK((V.transpose() * V - Eigen::MatrixXd::Identity(20, 20)).norm() <= 1e-10);
}
