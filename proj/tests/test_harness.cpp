#include <doctest.h>

#include "svmboot/error.hpp"
#include "svmboot/harness.hpp"
#include "svmboot/law.hpp"
#include "svmboot/random.hpp"
#include "svmboot/serialization.hpp"

using namespace svmboot;

namespace {

Points line_grid(int g, double lo, double hi) {
  Points grid(g, 1);
  for (int k = 0; k < g; ++k) grid(k, 0) = lo + (hi - lo) * k / (g - 1);
  return grid;
}

ConsistencyConfig small_consistency() {
  auto cfg = ConsistencyConfig::default_regression();
  cfg.n_ladder = {30, 60};
  cfg.bootstrap_replicates = 40;
  cfg.mc_replicates = 40;
  cfg.gaussian_draws = 200;
  cfg.model.n_ref = kMinReferenceSize;
  return cfg;
}

}  // namespace

TEST_CASE("data generators") {
  auto spec = GeneratorSpec::default_regression();
  spec.noise_sd = 0.0;
  spec.amplitude = 1.7;
  const Dataset clean = generate(spec, 50, 3);
  for (int i = 0; i < 50; ++i) {
    CHECK(clean.ys(i) == 1.7 * std::sin(clean.xs(i, 0)));
    CHECK(clean.xs(i, 0) >= spec.x_min);
    CHECK(clean.xs(i, 0) <= spec.x_max);
  }
  const Dataset a = generate(GeneratorSpec::default_regression(), 20, 9);
  const Dataset b = generate(GeneratorSpec::default_regression(), 20, 9);
  CHECK(a.xs == b.xs);
  CHECK(a.ys == b.ys);

  auto mix = GeneratorSpec::default_classification();
  mix.positive_weight = 0.3;
  const Dataset labelled = generate(mix, 10000, 4);
  const double pos = (labelled.ys.array() > 0.0).cast<double>().mean();
  CHECK(std::abs(pos - 0.3) <= 0.02);
  CHECK((labelled.ys.array().abs() == 1.0).all());

  spec.noise_sd = -1.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(generator_kind_from_string("spiral"), ConfigError);
}

TEST_CASE("reference fit approximates the regression function") {
  auto spec = GeneratorSpec::default_regression();
  spec.noise_sd = 0.0;
  const auto ref = reference_fit(spec, KernelSpec::gaussian_rbf(1.0), SmoothLoss::logistic_regression(),
                                 1e-6, kMinReferenceSize, 5);
  const Points grid = line_grid(41, -2.5, 2.5);
  const Eigen::VectorXd f = evaluate_on_grid(ref, grid);
  double mse = 0.0;
  for (int g = 0; g < 41; ++g) mse += std::pow(f(g) - std::sin(grid(g, 0)), 2) / 41.0;
  CHECK(mse <= 1e-2);

  const auto zero = reference_fit(spec, KernelSpec::gaussian_rbf(1.0), SmoothLoss::logistic_regression(),
                                  1e6, kMinReferenceSize, 5);
  CHECK(evaluate_on_grid(zero, grid).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK_THROWS_AS(reference_fit(spec, KernelSpec::gaussian_rbf(1.0), SmoothLoss::logistic_regression(),
                                0.05, 100, 5),
                  ConfigError);
}

TEST_CASE("reference fits from disjoint seeds agree") {
  const ModelConfig m;
  const Points grid = line_grid(25, -2.5, 2.5);
  const auto a = reference_fit(m.generator, m.kernel, m.loss, m.lambda, 20000, 1);
  const auto b = reference_fit(m.generator, m.kernel, m.loss, m.lambda, 20000, 2);
  CHECK((evaluate_on_grid(a, grid) - evaluate_on_grid(b, grid)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("monte-carlo sampling law") {
  const ModelConfig m;
  const Points grid = line_grid(3, -1.0, 1.0);
  const auto ref = reference_fit(m.generator, m.kernel, m.loss, m.lambda, kMinReferenceSize, 8);

  const auto one = mc_sampling_law(m.generator, m.kernel, m.loss, m.lambda, 40, 1, grid, ref, 12);
  REQUIRE(one.draws.rows() == 1);
  const Dataset data = generate(m.generator, 40, derive_seed(12, 1));
  const auto f = fit(WeightedSample::uniform(data), m.kernel, m.loss, m.lambda);
  const Eigen::VectorXd expected =
      std::sqrt(40.0) * (evaluate_on_grid(f, grid) - evaluate_on_grid(ref, grid));
  CHECK(one.draws.row(0).transpose() == expected);

  const auto a = mc_sampling_law(m.generator, m.kernel, m.loss, m.lambda, 40, 30, grid, ref, 12);
  const auto b = mc_sampling_law(m.generator, m.kernel, m.loss, m.lambda, 40, 30, grid, ref, 12, 3);
  CHECK(a.draws == b.draws);
  CHECK(a.draws.row(0) == one.draws.row(0));
}

TEST_CASE("monte-carlo law is centred at the reference" * doctest::timeout(600)) {
  const ModelConfig m;
  Points x(1, 1);
  x << 0.6;
  const auto ref = reference_fit(m.generator, m.kernel, m.loss, m.lambda, m.n_ref, 31);
  const auto law = mc_sampling_law(m.generator, m.kernel, m.loss, m.lambda, 400, 2000, x, ref, 32);
  const Eigen::VectorXd col = law.draws.col(0);
  const double mean = col.mean();
  const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1));
  CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(static_cast<double>(col.size())));
}

TEST_CASE("experiment configs are validated") {
  auto cfg = ConsistencyConfig::default_regression();
  cfg.n_ladder.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ConsistencyConfig::default_regression();
  cfg.model.loss = SmoothLoss::logistic_classification();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  auto cov = CoverageConfig::default_regression();
  cov.level = 1.0;
  CHECK_THROWS_AS(cov.validate(), ConfigError);
  CHECK_THROWS_AS(coverage_experiment(cov, 1), ConfigError);
  cov = CoverageConfig::default_regression();
  cov.x0 = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(cov.validate(), ConfigError);

  ModelConfig m;
  CHECK(m.lambda_for(100) == m.lambda);
  m.lambda_perturbation = true;
  CHECK(m.lambda_for(100) == doctest::Approx(m.lambda + 0.01).epsilon(1e-15));
}

TEST_CASE("small consistency experiment is reproducible across worker counts") {
  const auto cfg = small_consistency();
  const auto a = consistency_experiment(cfg, 2024, 1);
  const auto b = consistency_experiment(cfg, 2024, 3);
  CHECK(to_json_value(a).dump() == to_json_value(b).dump());
  CHECK(consistency_csv(a) == consistency_csv(b));
  REQUIRE(a.ladder.size() == 2);
  for (const auto& rung : a.ladder) {
    REQUIRE(rung.points.size() == 5);
    for (const auto& p : rung.points) {
      for (double d : {p.ks_boot_mc, p.bl_boot_mc, p.ks_gauss_mc, p.bl_gauss_mc, p.ks_gauss_boot}) {
        CHECK(std::isfinite(d));
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
      }
    }
  }
  const auto c = consistency_experiment(cfg, 2025, 1);
  CHECK(to_json_value(a).dump() != to_json_value(c).dump());
}

TEST_CASE("small coverage experiment is reproducible across worker counts") {
  auto cfg = CoverageConfig::default_regression();
  cfg.n = 40;
  cfg.bootstrap_replicates = 50;
  cfg.reps = 12;
  cfg.model.n_ref = kMinReferenceSize;
  const auto a = coverage_experiment(cfg, 7, 1);
  const auto b = coverage_experiment(cfg, 7, 4);
  CHECK(to_json_value(a).dump() == to_json_value(b).dump());
  CHECK(a.completed + a.failed == 12);
  CHECK(a.coverage >= 0.0);
  CHECK(a.coverage <= 1.0);
  for (std::size_t r = 0; r < a.lower.size(); ++r) CHECK(a.lower[r] <= a.upper[r]);
}

TEST_CASE("a bootstrap law of identical observations is a point mass") {
  Dataset data{Points::Constant(10, 1, 0.1), Eigen::VectorXd::Constant(10, -0.3)};
  const Points grid = line_grid(2, -1.0, 1.0);
  const auto e = bootstrap_ensemble(data, KernelSpec::gaussian_rbf(1.0), SmoothLoss::logistic_regression(),
                                    0.05, 20, grid, 1);
  const EmpiricalLaw law(e.scaled_draws.unaryExpr([](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; }), "b");
  CHECK(kolmogorov_distance(law.marginal(0), law.marginal(0)) == 0.0);
  CHECK(law.marginal(0).sorted().front() == 0.0);
  CHECK(law.marginal(0).sorted().back() == 0.0);
}
