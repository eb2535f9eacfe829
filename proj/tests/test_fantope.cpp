#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fspca/errors.hpp"
#include "fspca/fantope.hpp"
#include "fspca/rng.hpp"
#include "oracles.hpp"

using namespace fspca;
using namespace fspca::testing;

namespace {

double clipped_sum(const Eigen::VectorXd& eigs, double theta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i)
    s += std::min(1.0, std::max(0.0, eigs(i) - theta));
  return s;
}

}  // namespace

TEST_CASE("spec validation") {
  const FantopeSpec zero_k{0, 3};
  const FantopeSpec k_above_p{4, 3};
  const FantopeSpec full{3, 3};
  CHECK_THROWS_AS(zero_k.validate(), ValidationError);
  CHECK_THROWS_AS(k_above_p.validate(), ValidationError);
  CHECK_NOTHROW(full.validate());
}

TEST_CASE("waterlevel examples") {
  {
    Eigen::VectorXd e(2);
    e << 2.0, 0.0;
    const double th = find_waterlevel(e, 1);
    CHECK(std::abs(clipped_sum(e, th) - 1.0) <= 1e-10);
    CHECK(th == doctest::Approx(1.0).epsilon(1e-9));
  }
  {
    Eigen::VectorXd e(3);
    e << 1.0, 1.0, 1.0;
    const double th = find_waterlevel(e, 3);
    CHECK(std::abs(clipped_sum(e, th) - 3.0) <= 1e-10);
    CHECK(th <= 1e-10);
  }
  {
    Eigen::VectorXd e(4);
    e << 5.0, 3.0, 1.0, 0.0;
    const double th = find_waterlevel(e, 2);
    CHECK(std::abs(clipped_sum(e, th) - 2.0) <= 1e-10);
    // dense scan agrees: no theta with a closer fit exists two grid cells away
    double best = 1e9, best_th = 0;
    for (double t = -1.0; t <= 5.0; t += 1e-4) {
      const double gap = std::abs(clipped_sum(e, t) - 2.0);
      if (gap < best) {
        best = gap;
        best_th = t;
      }
    }
    CHECK(std::abs(clipped_sum(e, best_th) - 2.0) >=
          std::abs(clipped_sum(e, th) - 2.0) - 1e-9);
  }
  Eigen::VectorXd e(2);
  e << 1.0, 2.0;
  CHECK_THROWS_AS(find_waterlevel(e, 3), ValidationError);
}

TEST_CASE("projection fixed points and simple cases") {
  for (int p : {3, 6}) {
    for (int k = 1; k <= p; ++k) {
      const FantopeSpec spec{k, p};
      const Eigen::MatrixXd A =
          (static_cast<double>(k) / p) * Eigen::MatrixXd::Identity(p, p);
      CHECK((project_fantope(A, spec) - A).norm() <= 1e-12);
    }
  }
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 2.0;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(0, 0) = 1.0;
  CHECK((project_fantope(D, FantopeSpec{1, 2}) - expected).norm() <= 1e-12);
}

TEST_CASE("projection output is a Fantope member with matching trace") {
  rng::Stream stream(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int p = 2 + static_cast<int>(stream.uniform_below(7));
    const int k = 1 + static_cast<int>(stream.uniform_below(p));
    const FantopeSpec spec{k, p};
    const Eigen::MatrixXd A = random_symmetric(stream, p, 2.0);
    const Eigen::MatrixXd X = project_fantope(A, spec);
    CHECK(is_member(X, spec, 1e-8));
    CHECK(std::abs(X.trace() - k) <= 1e-8);
  }
}

TEST_CASE("projection matches the capped-simplex brute force") {
  rng::Stream stream(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 2 + static_cast<int>(stream.uniform_below(4));  // p <= 5
    const int k = 1 + static_cast<int>(stream.uniform_below(std::min(p, 3)));
    const FantopeSpec spec{k, p};
    const Eigen::MatrixXd A = random_symmetric(stream, p, 2.0);
    Eigen::VectorXd w;
    Eigen::MatrixXd V;
    eigh(A, w, V);
    const Eigen::VectorXd g = capped_simplex_bruteforce(w, k);
    const Eigen::MatrixXd want = V * g.asDiagonal() * V.transpose();
    CHECK((project_fantope(A, spec) - want).norm() <= 1e-6);
  }
}

TEST_CASE("projection agrees with Dykstra alternating projections") {
  rng::Stream stream(13);
  for (int trial = 0; trial < 6; ++trial) {
    const int p = 3 + static_cast<int>(stream.uniform_below(3));
    const int k = 1 + static_cast<int>(stream.uniform_below(2));
    const FantopeSpec spec{k, p};
    const Eigen::MatrixXd A = random_symmetric(stream, p, 1.5);
    CHECK((project_fantope(A, spec) - dykstra_fantope(A, k)).norm() <= 1e-5);
  }
}

TEST_CASE("idempotence and nonexpansiveness") {
  rng::Stream stream(14);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 3 + static_cast<int>(stream.uniform_below(6));
    const int k = 1 + static_cast<int>(stream.uniform_below(p));
    const FantopeSpec spec{k, p};
    const Eigen::MatrixXd A = random_symmetric(stream, p, 3.0);
    const Eigen::MatrixXd B = random_symmetric(stream, p, 3.0);
    const Eigen::MatrixXd PA = project_fantope(A, spec);
    const Eigen::MatrixXd PB = project_fantope(B, spec);
    CHECK((project_fantope(PA, spec) - PA).norm() <= 1e-8);
    CHECK((PA - PB).norm() <= (A - B).norm() + 1e-10);
  }
}

TEST_CASE("variational characterization of the projection") {
  rng::Stream stream(15);
  const int p = 6;
  for (int trial = 0; trial < 5; ++trial) {
    const int k = 1 + static_cast<int>(stream.uniform_below(3));
    const FantopeSpec spec{k, p};
    const Eigen::MatrixXd A = random_symmetric(stream, p, 2.0);
    const Eigen::MatrixXd X = project_fantope(A, spec);
    for (int m = 0; m < 50; ++m) {
      const Eigen::MatrixXd Y =
          project_fantope(random_symmetric(stream, p, 2.0), spec);
      CHECK(((A - X).array() * (Y - X).array()).sum() <= 1e-8);
    }
  }
}

TEST_CASE("linear maximization over the Fantope") {
  {
    Eigen::MatrixXd D = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
    const auto res = fantope_linear_max(D, FantopeSpec{2, 3});
    CHECK(res.value == doctest::Approx(5.0).epsilon(1e-12));
    Eigen::MatrixXd want = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
    CHECK((res.projector - want).norm() <= 1e-10);
  }
  {
    const auto res = fantope_linear_max(Eigen::MatrixXd::Identity(4, 4),
                                        FantopeSpec{1, 4});
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(res.projector.trace() - 1.0) <= 1e-10);
  }
  rng::Stream stream(16);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 5;
    const FantopeSpec spec{2, p};
    const Eigen::MatrixXd S = random_symmetric(stream, p, 2.0);
    const auto res = fantope_linear_max(S, spec);
    Eigen::VectorXd w;
    Eigen::MatrixXd V;
    eigh(S, w, V);
    CHECK(res.value == doctest::Approx(w(p - 1) + w(p - 2)).epsilon(1e-10));
    for (int m = 0; m < 100; ++m) {
      const Eigen::MatrixXd X =
          project_fantope(random_symmetric(stream, p, 2.0), spec);
      CHECK((S.array() * X.array()).sum() <= res.value + 1e-8);
    }
  }
}

TEST_CASE("curvature bound for the top-k projector") {
  rng::Stream stream(17);
  int done = 0;
  while (done < 100) {
    const int p = 4 + static_cast<int>(stream.uniform_below(5));
    const int k = 1 + static_cast<int>(stream.uniform_below(std::min(3, p - 1)));
    const FantopeSpec spec{k, p};
    const Eigen::MatrixXd S = random_symmetric(stream, p, 2.0);
    Eigen::VectorXd w;
    Eigen::MatrixXd V;
    eigh(S, w, V);
    const double gap = w(p - k) - w(p - k - 1);
    if (gap < 1e-3) continue;
    const auto top = fantope_linear_max(S, spec);
    const Eigen::MatrixXd X =
        project_fantope(random_symmetric(stream, p, 2.0), spec);
    const double lhs = 0.5 * (top.projector - X).squaredNorm();
    const double rhs = ((S.array() * (top.projector - X).array()).sum()) / gap;
    CHECK(lhs <= rhs + 1e-8);
    ++done;
  }
}

TEST_CASE("asymmetric input is rejected; mild asymmetry is symmetrized") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(project_fantope(A, FantopeSpec{1, 2}), ValidationError);
  Eigen::MatrixXd B(2, 2);
  B << 1.0, 0.5, 0.5 + 1e-12, 1.0;
  CHECK_NOTHROW(project_fantope(B, FantopeSpec{1, 2}));
}

TEST_CASE("membership checks") {
  const FantopeSpec spec{1, 3};
  Eigen::VectorXd u(3);
  u << 1.0, 0.0, 0.0;
  CHECK(is_member(u * u.transpose(), spec, 1e-10));
  Eigen::MatrixXd bad = Eigen::Vector3d(1.5, -0.5, 0.0).asDiagonal();
  CHECK_FALSE(is_member(bad, spec, 1e-8));
  CHECK(is_member(Eigen::MatrixXd::Identity(3, 3) / 3.0, spec, 1e-10));
}
