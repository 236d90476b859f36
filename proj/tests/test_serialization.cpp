#include <doctest.h>

#include "svmboot/error.hpp"
#include "svmboot/serialization.hpp"

using namespace svmboot;

TEST_CASE("object reader rejects unknown and mistyped keys") {
  const json j = json::parse(R"({"a": 1, "b": "x", "extra": true})");
  ObjectReader r(j, "root");
  CHECK(r.integer("a") == 1);
  CHECK(r.string("b") == "x");
  try {
    r.finish();
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "root.extra");
  }
  ObjectReader typed(j, "root");
  try {
    typed.number("b");
    FAIL("string read as number");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "root.b");
  }
  CHECK_THROWS_AS(typed.required("missing"), ConfigError);
  CHECK(typed.number_or("missing", 2.5) == 2.5);
}

TEST_CASE("kernel and loss round trip") {
  for (const auto& k : {KernelSpec::gaussian_rbf(0.3), KernelSpec::polynomial(3, 1.5), KernelSpec::linear()})
    CHECK(kernel_from_json(to_json_value(k)) == k);
  for (const auto& l : {SmoothLoss::logistic_classification(), SmoothLoss::logistic_regression(),
                        SmoothLoss::huber(0.4), smoothed_hinge(0.05)})
    CHECK(loss_from_json(to_json_value(l)) == l);
}

TEST_CASE("configuration errors name the offending key") {
  try {
    loss_from_json(json::parse(R"({"family": "hinge"})"));
    FAIL("hinge accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "loss.family");
    CHECK(std::string(e.what()).find("smoothed_hinge") != std::string::npos);
  }
  try {
    kernel_from_json(json::parse(R"({"family": "gaussian_rbf", "gamma": 1, "width": 2})"));
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "kernel.width");
  }
  try {
    kernel_from_json(json::parse(R"({"family": "gaussian_rbf", "gamma": -1})"));
    FAIL("negative gamma accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "kernel.gamma");
  }
  CHECK_THROWS_AS(points_from_json(json::parse("[[1, 2], [3]]"), "grid"), ConfigError);
}

TEST_CASE("generator round trip") {
  for (const auto& g : {GeneratorSpec::default_regression(), GeneratorSpec::default_classification()}) {
    const auto back = generator_from_json(to_json_value(g));
    CHECK(to_json_value(back) == to_json_value(g));
  }
}

TEST_CASE("fit round trip is exact") {
  Dataset data{Points(4, 1), Eigen::VectorXd(4)};
  data.xs << -1.0, 0.1, 0.7, 2.0;
  data.ys << 0.2, -0.4, 0.9, 1.3;
  const auto f = fit(WeightedSample::uniform(data), KernelSpec::gaussian_rbf(1.0),
                     SmoothLoss::logistic_regression(), 0.05);
  const auto back = fit_from_json(json::parse(to_json_value(f).dump()));
  CHECK(back.alpha == f.alpha);
  CHECK(back.support_points == f.support_points);
  CHECK(back.kernel == f.kernel);
  CHECK(back.loss == f.loss);
  CHECK(back.objective == f.objective);
}
