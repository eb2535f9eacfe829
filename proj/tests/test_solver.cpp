#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fspca/errors.hpp"
#include "fspca/solver.hpp"
#include "fspca/rng.hpp"
#include "oracles.hpp"

using namespace fspca;
using namespace fspca::testing;

namespace {

AdmmState random_state(rng::Stream& stream, int p, const FantopeSpec& spec) {
  AdmmState s;
  s.Pi = project_fantope(random_symmetric(stream, p, 1.0), spec);
  s.Phi = random_symmetric(stream, p, 0.5);
  s.Theta = random_symmetric(stream, p, 0.5);
  return s;
}

}  // namespace

TEST_CASE("update_pi reduces to a plain projection at zero state") {
  rng::Stream stream(31);
  const int p = 6;
  const FantopeSpec spec{2, p};
  const Eigen::MatrixXd Sigma = random_symmetric(stream, p, 2.0);
  AdmmState s;
  s.Pi = s.Phi = s.Theta = Eigen::MatrixXd::Zero(p, p);
  SolverConfig cfg;
  cfg.tau = 0.0;
  cfg.rho = 1.0;
  CHECK((update_pi(s, Sigma, cfg, spec) - project_fantope(Sigma, spec)).norm() <=
        1e-12);
}

TEST_CASE("update_pi fixed point when Phi is already the projection argument") {
  rng::Stream stream(32);
  const int p = 5;
  const FantopeSpec spec{1, p};
  const Eigen::MatrixXd member =
      project_fantope(random_symmetric(stream, p, 1.0), spec);
  AdmmState s;
  s.Phi = member;
  s.Theta = Eigen::MatrixXd::Zero(p, p);
  SolverConfig cfg;
  cfg.tau = 0.0;
  cfg.rho = 1e9;  // large rho: the argument approaches Phi itself
  const Eigen::MatrixXd out =
      update_pi(s, Eigen::MatrixXd::Zero(p, p), cfg, spec);
  CHECK((out - member).norm() <= 1e-6);
}

TEST_CASE("update_pi matches the Dykstra quadratic-program oracle") {
  rng::Stream stream(33);
  const int p = 5;
  const FantopeSpec spec{2, p};
  SolverConfig cfg;
  cfg.tau = 0.4;
  cfg.rho = 1.7;
  for (int trial = 0; trial < 4; ++trial) {
    AdmmState s = random_state(stream, p, spec);
    const Eigen::MatrixXd Sigma = random_symmetric(stream, p, 2.0);
    const Eigen::MatrixXd arg =
        (cfg.rho * s.Phi - s.Theta + Sigma) / (cfg.rho + cfg.tau);
    CHECK((update_pi(s, Sigma, cfg, spec) - dykstra_fantope(arg, spec.k)).norm() <=
          1e-5);
  }
}

TEST_CASE("update_phi: identity at lambda = 0, zero at zero input, prox oracle") {
  rng::Stream stream(34);
  const int p = 4;
  const FantopeSpec spec{1, p};
  SolverConfig cfg;
  cfg.rho = 1.3;

  AdmmState s = random_state(stream, p, spec);
  const PenaltyConfig zero_pen = make_mcp(0.0, 3.0);
  const Eigen::MatrixXd want = s.Pi + s.Theta / cfg.rho;
  CHECK((update_phi(s, zero_pen, cfg) - 0.5 * (want + want.transpose())).norm() <=
        1e-12);

  AdmmState z;
  z.Pi = z.Phi = z.Theta = Eigen::MatrixXd::Zero(p, p);
  CHECK(update_phi(z, make_mcp(0.7, 3.0), cfg).norm() == 0.0);

  const PenaltyConfig pen = make_mcp(0.5, 2.5);
  const Eigen::MatrixXd got = update_phi(s, pen, cfg);
  const Eigen::MatrixXd arg = 0.5 * ((s.Pi + s.Theta / cfg.rho) +
                                     (s.Pi + s.Theta / cfg.rho).transpose());
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      CHECK(std::abs(got(i, j) - prox_by_grid_search(pen, arg(i, j), cfg.rho)) <=
            2e-5);
}

TEST_CASE("update_theta arithmetic") {
  rng::Stream stream(35);
  const int p = 4;
  const FantopeSpec spec{1, p};
  AdmmState s = random_state(stream, p, spec);
  SolverConfig cfg;

  s.Phi = s.Pi;
  cfg.rho = 1.0;
  CHECK((update_theta(s, cfg) - s.Theta).norm() == 0.0);

  AdmmState s2 = random_state(stream, p, spec);
  const Eigen::MatrixXd D = s2.Pi - s2.Phi;
  s2.Theta = Eigen::MatrixXd::Zero(p, p);
  CHECK((update_theta(s2, cfg) - D).norm() <= 1e-15);

  cfg.rho = 2.0;
  const Eigen::MatrixXd M = s2.Theta = random_symmetric(stream, p, 1.0);
  CHECK((update_theta(s2, cfg) - (M + 2.0 * D)).norm() <= 1e-12);
}

TEST_CASE("solve with lambda=0, tau=0 recovers the top-k eigenprojector") {
  rng::Stream stream(36);
  for (int trial = 0; trial < 3; ++trial) {
    const int p = 8;
    const int k = 1 + trial;
    Eigen::VectorXd eigs(p);
    for (int i = 0; i < p; ++i) eigs(i) = (i < k) ? 3.0 - 0.2 * i : 1.0 - 0.05 * i;
    const Eigen::MatrixXd Sigma = random_with_spectrum(stream, eigs);
    const FantopeSpec spec{k, p};
    const auto sol = solve(Sigma, spec, make_l1(0.0), SolverConfig{});
    const auto top = fantope_linear_max(Sigma, spec);
    CHECK(sol.diagnostics.converged);
    CHECK((sol.Phi - top.projector).norm() <= 1e-4);
  }
}

TEST_CASE("k = p: the Fantope is the single point I") {
  const int p = 5;
  Eigen::MatrixXd Sigma = Eigen::MatrixXd::Identity(p, p) * 2.0;
  Sigma(0, 1) = Sigma(1, 0) = 0.3;
  const FantopeSpec spec{p, p};
  const auto sol = solve(Sigma, spec, make_mcp(0.8, 3.0), SolverConfig{});
  CHECK(sol.diagnostics.converged);
  CHECK((sol.Phi - Eigen::MatrixXd::Identity(p, p)).norm() <= 1e-5);
}

TEST_CASE("every Pi iterate stays feasible; residuals finite; convergence flagged") {
  rng::Stream stream(37);
  const int p = 10;
  const FantopeSpec spec{2, p};
  const Eigen::MatrixXd Sigma = random_symmetric(stream, p, 2.0);
  SolverConfig cfg;
  cfg.max_iters = 60;
  int seen = 0;
  const auto sol = solve(Sigma, spec, make_mcp(0.3, 3.0), cfg, std::nullopt,
                         [&](const AdmmState& s) {
                           ++seen;
                           CHECK(fantope_violation(s.Pi, spec) <= 1e-6);
                           CHECK(std::isfinite(s.primal_residual));
                           CHECK(std::isfinite(s.dual_residual));
                         });
  CHECK(seen == sol.diagnostics.iterations);
  CHECK(std::isfinite(sol.diagnostics.objective));

  SolverConfig tiny;
  tiny.max_iters = 3;
  const auto nc = solve(Sigma, spec, make_mcp(0.3, 3.0), tiny);
  CHECK_FALSE(nc.diagnostics.converged);
  CHECK(nc.diagnostics.iterations == 3);
}

TEST_CASE("convex regime: Pi-sequence objective respects the global lower bound") {
  rng::Stream stream(42);
  const int p = 9;
  const FantopeSpec spec{2, p};
  const Eigen::MatrixXd Sigma = random_symmetric(stream, p, 2.0);
  const PenaltyConfig pen = make_mcp(0.6, 3.0);
  SolverConfig cfg;
  cfg.tau = 0.5;
  cfg.max_iters = 150;
  // -<Sigma, Pi> >= -max over the Fantope; the MCP penalty is capped at
  // b*lambda^2/2 per entry, and tau/2||Pi||^2 >= 0.
  const double lower = -fantope_linear_max(Sigma, spec).value -
                       p * p * pen.b * pen.lambda * pen.lambda / 2.0;
  solve(Sigma, spec, pen, cfg, std::nullopt, [&](const AdmmState& s) {
    const double obj = objective_value(s.Pi, Sigma, pen, cfg.tau);
    CHECK(std::isfinite(obj));
    CHECK(obj >= lower - 1e-9);
  });
}

TEST_CASE("convex-regime uniqueness: perturbed duals land on the same solution") {
  rng::Stream stream(38);
  const int p = 12;
  const FantopeSpec spec{1, p};
  Eigen::VectorXd eigs(p);
  eigs(0) = 8.0;
  for (int i = 1; i < p; ++i) eigs(i) = 1.0 - 0.01 * i;
  const Eigen::MatrixXd Sigma = random_with_spectrum(stream, eigs);
  const PenaltyConfig pen = make_mcp(0.4, 3.0);
  SolverConfig cfg;
  cfg.tau = 0.5;  // > zeta_minus = 1/3

  const auto a = solve(Sigma, spec, pen, cfg);
  const Eigen::MatrixXd theta0 = 1e-3 * random_symmetric(stream, p, 1.0);
  const auto b = solve(Sigma, spec, pen, cfg, theta0);
  CHECK(a.diagnostics.converged);
  CHECK(b.diagnostics.converged);
  CHECK((a.Phi - b.Phi).norm() <= 1e-4);
}

TEST_CASE("objective_value term-by-term") {
  rng::Stream stream(39);
  const int p = 6;
  const Eigen::MatrixXd Sigma = random_symmetric(stream, p, 1.0);
  const Eigen::MatrixXd Pi = random_symmetric(stream, p, 0.5);
  const PenaltyConfig pen = make_mcp(0.7, 2.4);

  CHECK(objective_value(Eigen::MatrixXd::Zero(p, p), Sigma, pen, 0.9) == 0.0);
  CHECK(objective_value(Pi, Sigma, make_l1(0.0), 0.0) ==
        doctest::Approx(-(Sigma.array() * Pi.array()).sum()).epsilon(1e-12));

  double inner = 0.0, pensum = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      inner += Sigma(i, j) * Pi(i, j);
      pensum += penalty_value(pen, Pi(i, j));
    }
  const double tau = 0.37;
  const double want = -inner + 0.5 * tau * Pi.squaredNorm() + pensum;
  CHECK(objective_value(Pi, Sigma, pen, tau) ==
        doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("variational inequality certificate at a tau = 0 solution") {
  rng::Stream stream(40);
  const int p = 8;
  const FantopeSpec spec{1, p};
  Eigen::VectorXd eigs(p);
  eigs(0) = 6.0;
  for (int i = 1; i < p; ++i) eigs(i) = 0.8;
  const Eigen::MatrixXd Sigma = random_with_spectrum(stream, eigs);
  const PenaltyConfig pen = make_mcp(0.3, 3.0);
  const auto sol = solve(Sigma, spec, pen, SolverConfig{});
  REQUIRE(sol.diagnostics.converged);

  std::vector<Eigen::MatrixXd> members;
  for (int m = 0; m < 100; ++m)
    members.push_back(project_fantope(random_symmetric(stream, p, 1.0), spec));
  CHECK(vi_max_slack(sol.Phi, Sigma, pen, members) <= 1e-4);
}

TEST_CASE("solver config JSON round trip and validation") {
  SolverConfig cfg;
  cfg.tau = 0.25;
  cfg.rho = 2.0;
  cfg.max_iters = 777;
  cfg.primal_tol = 1e-6;
  cfg.dual_tol = 2e-6;
  const SolverConfig back = solver_config_from_json(to_json_string(cfg));
  CHECK(back.tau == cfg.tau);
  CHECK(back.rho == cfg.rho);
  CHECK(back.max_iters == cfg.max_iters);
  CHECK(back.primal_tol == cfg.primal_tol);
  CHECK(back.dual_tol == cfg.dual_tol);

  SolverConfig bad;
  bad.rho = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(SolverConfig{}.resolved_primal_tol(128) == doctest::Approx(1.28e-5));
}
