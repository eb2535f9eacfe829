#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "fspca/estimators.hpp"
#include "fspca/fantope.hpp"
#include "fspca/penalty.hpp"
#include "fspca/rng.hpp"
#include "fspca/solver.hpp"
#include "fspca/synthdata.hpp"

namespace {

Eigen::MatrixXd random_symmetric(fspca::rng::Stream& stream, int p) {
  Eigen::MatrixXd G(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) G(i, j) = stream.normal();
  return 0.5 * (G + G.transpose());
}

void FantopeProjection(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  fspca::rng::Stream stream(1);
  const Eigen::MatrixXd A = random_symmetric(stream, p);
  const fspca::FantopeSpec spec{std::max(1, p / 16), p};
  for (auto _ : state) {
    auto X = fspca::project_fantope(A, spec);
    benchmark::DoNotOptimize(X.data());
  }
  state.SetComplexityN(p);
}
BENCHMARK(FantopeProjection)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void ProxMatrix(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  fspca::rng::Stream stream(2);
  const Eigen::MatrixXd A = random_symmetric(stream, p);
  const auto pen = fspca::make_mcp(0.5, 3.0);
  for (auto _ : state) {
    auto X = fspca::prox_matrix(pen, A, 1.0);
    benchmark::DoNotOptimize(X.data());
  }
  state.SetComplexityN(p);
}
BENCHMARK(ProxMatrix)->RangeMultiplier(2)->Range(32, 256)->Complexity();

void AdmmSolveDataset1(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto model = fspca::dataset1_model(p);
  const Eigen::MatrixXd X = fspca::sample_gaussian(model, 80, std::uint64_t{3});
  const Eigen::MatrixXd S = fspca::sample_covariance(X);
  const fspca::FantopeSpec spec{1, p};
  const auto pen = fspca::make_mcp(2.0, 3.0);
  fspca::SolverConfig cfg;
  cfg.tau = 2.0 / 3.0;
  cfg.max_iters = 200;
  for (auto _ : state) {
    auto sol = fspca::solve(S, spec, pen, cfg);
    benchmark::DoNotOptimize(sol.Phi.data());
  }
}
BENCHMARK(AdmmSolveDataset1)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
