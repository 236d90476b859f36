#include <benchmark/benchmark.h>

#include <vector>

#include "svmboot/bootstrap.hpp"
#include "svmboot/harness.hpp"
#include "svmboot/influence.hpp"
#include "svmboot/law.hpp"
#include "svmboot/solver.hpp"

using namespace svmboot;

namespace {

Dataset regression_data(int n) { return generate(GeneratorSpec::default_regression(), n, 7); }

Points default_grid() {
  Points grid(5, 1);
  grid << -2.4, -1.2, 0.0, 1.2, 2.4;
  return grid;
}

void BM_GramMatrix(benchmark::State& state) {
  const auto data = regression_data(static_cast<int>(state.range(0)));
  const auto kernel = KernelSpec::gaussian_rbf(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(kernel, data.xs));
}
BENCHMARK(BM_GramMatrix)->Arg(200)->Arg(800);

void BM_Fit(benchmark::State& state) {
  const auto sample = WeightedSample::uniform(regression_data(static_cast<int>(state.range(0))));
  const auto kernel = KernelSpec::gaussian_rbf(1.0);
  const auto loss = SmoothLoss::logistic_regression();
  for (auto _ : state) benchmark::DoNotOptimize(fit(sample, kernel, loss, 0.05));
}
BENCHMARK(BM_Fit)->Arg(50)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_FitSharedGram(benchmark::State& state) {
  const auto sample = WeightedSample::uniform(regression_data(static_cast<int>(state.range(0))));
  const auto kernel = KernelSpec::gaussian_rbf(1.0);
  const auto gram = gram_matrix(kernel, sample.data.xs);
  const auto loss = SmoothLoss::logistic_regression();
  for (auto _ : state) benchmark::DoNotOptimize(fit(sample, gram, kernel, loss, 0.05));
}
BENCHMARK(BM_FitSharedGram)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_BootstrapEnsemble(benchmark::State& state) {
  const auto data = regression_data(200);
  const auto grid = default_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_ensemble(data, KernelSpec::gaussian_rbf(1.0),
                                                SmoothLoss::logistic_regression(), 0.05,
                                                static_cast<int>(state.range(0)), grid, 11));
  }
}
BENCHMARK(BM_BootstrapEnsemble)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_AsymptoticLaw(benchmark::State& state) {
  const auto data = regression_data(static_cast<int>(state.range(0)));
  const auto grid = default_grid();
  const auto base = fit(WeightedSample::uniform(data), KernelSpec::gaussian_rbf(1.0),
                        SmoothLoss::logistic_regression(), 0.05);
  for (auto _ : state) {
    const auto model = build_influence_model(base, data, grid);
    benchmark::DoNotOptimize(asymptotic_law(model, data, grid));
  }
}
BENCHMARK(BM_AsymptoticLaw)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_ReferenceFit(benchmark::State& state) {
  const auto spec = GeneratorSpec::default_regression();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference_fit(spec, KernelSpec::gaussian_rbf(1.0),
                                           SmoothLoss::logistic_regression(), 0.05,
                                           static_cast<int>(state.range(0)), 3));
  }
}
BENCHMARK(BM_ReferenceFit)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

void BM_KolmogorovDistance(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const EmpiricalLaw a(Eigen::MatrixXd::Random(n, 1), "a");
  const EmpiricalLaw b(Eigen::MatrixXd::Random(n, 1).array() + 0.1, "b");
  for (auto _ : state) benchmark::DoNotOptimize(kolmogorov_distance(a, b));
}
BENCHMARK(BM_KolmogorovDistance)->Arg(2000)->Arg(10000);

void BM_BoundedLipschitzDistance(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const EmpiricalLaw a(Eigen::MatrixXd::Random(n, 1), "a");
  const EmpiricalLaw b(Eigen::MatrixXd::Random(n, 1).array() + 0.1, "b");
  for (auto _ : state) benchmark::DoNotOptimize(bounded_lipschitz_distance(a, b));
}
BENCHMARK(BM_BoundedLipschitzDistance)->Arg(2000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
