#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "svmboot/error.hpp"
#include "svmboot/loss.hpp"

using namespace svmboot;

namespace {

const Eigen::VectorXd kNoX = Eigen::VectorXd::Zero(1);

}  // namespace

TEST_CASE("loss values on hand inputs") {
  const auto lc = SmoothLoss::logistic_classification().evaluate(kNoX, 1.0, 0.0);
  CHECK(lc.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(lc.d1 == -0.5);
  CHECK(lc.d2 == 0.25);

  const auto lr = SmoothLoss::logistic_regression().evaluate(kNoX, 0.7, 0.7);
  CHECK(lr.value == 0.0);
  CHECK(lr.d1 == 0.0);
  CHECK(lr.d2 == 0.5);

  const auto hu = SmoothLoss::huber(1.0).evaluate(kNoX, 3.0, 0.0);
  CHECK(std::abs(hu.value - 2.5) <= 1e-7);
  CHECK(hu.d1 == -1.0);
  CHECK(hu.d2 == 0.0);

  const auto sh = smoothed_hinge(0.1);
  CHECK(sh.evaluate(kNoX, 1.0, 3.0).value <= 0.1);
  CHECK(std::abs(sh.evaluate(kNoX, 1.0, -2.0).value - 3.0) <= 0.1);
}

TEST_CASE("loss values agree with textbook formulas") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 500; ++i) {
    const double y = u(gen);
    const double t = u(gen);
    const double label = i % 2 == 0 ? 1.0 : -1.0;
    CHECK(SmoothLoss::logistic_regression().evaluate_unchecked(y, t).value ==
          doctest::Approx(oracle::logistic_regression(y, t)).epsilon(1e-12));
    CHECK(SmoothLoss::logistic_classification().evaluate_unchecked(label, t).value ==
          doctest::Approx(oracle::logistic_classification(label, t)).epsilon(1e-12));
    CHECK(std::abs(SmoothLoss::huber(1.3).evaluate_unchecked(y, t).value - oracle::huber(y, t, 1.3)) <=
          1e-6);
  }
}

TEST_CASE("labels and arguments are validated") {
  CHECK_THROWS_AS(SmoothLoss::logistic_classification().evaluate(kNoX, 0.5, 0.0), InputError);
  CHECK_THROWS_AS(smoothed_hinge(0.1).evaluate(kNoX, 0.0, 0.0), InputError);
  CHECK_THROWS_AS(SmoothLoss::logistic_regression().evaluate(kNoX, 0.0, NAN), InputError);
  CHECK_THROWS_AS(SmoothLoss::huber(0.0), ConfigError);
  CHECK_THROWS_AS(smoothed_hinge(-1.0), ConfigError);
  try {
    loss_family_from_string("hinge");
    FAIL("hinge accepted");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "loss.family");
    CHECK(std::string(e.what()).find("smoothed_hinge") != std::string::npos);
  }
}

TEST_CASE("derivatives match central differences") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const double h = 1e-5;
  for (const auto& loss : {SmoothLoss::logistic_classification(), SmoothLoss::logistic_regression(),
                           SmoothLoss::huber(1.0), smoothed_hinge(0.1)}) {
    CAPTURE(to_string(loss.family()));
    for (int i = 0; i < 1000; ++i) {
      const double y = loss.target_space() == TargetSpace::binary_labels ? (i % 2 ? 1.0 : -1.0) : u(gen);
      const double t = u(gen);
      const auto e = loss.evaluate_unchecked(y, t);
      const double fd1 =
          (loss.evaluate_unchecked(y, t + h).value - loss.evaluate_unchecked(y, t - h).value) / (2 * h);
      const double fd2 =
          (loss.evaluate_unchecked(y, t + h).d1 - loss.evaluate_unchecked(y, t - h).d1) / (2 * h);
      CHECK(std::abs(fd1 - e.d1) <= 1e-6 * std::abs(e.d1) + 1e-12);
      CHECK(std::abs(fd2 - e.d2) <= 1e-4 * std::abs(e.d2) + 1e-12);
    }
  }
}

TEST_CASE("smoothed hinge stays within eps of the hinge") {
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto loss = smoothed_hinge(eps);
    double gap = 0.0;
    for (double y : {-1.0, 1.0}) {
      for (int k = 0; k < 5000; ++k) {
        const double t = -5.0 + 10.0 * k / 4999.0;
        gap = std::max(gap, std::abs(loss.evaluate_unchecked(y, t).value - oracle::hinge(y, t)));
      }
    }
    CHECK(gap <= eps);
    CHECK(gap >= 0.45 * eps);
  }
}

TEST_CASE("losses are convex in t") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (const auto& loss : {SmoothLoss::logistic_classification(), SmoothLoss::logistic_regression(),
                           SmoothLoss::huber(0.5), smoothed_hinge(0.05)}) {
    for (int i = 0; i < 300; ++i) {
      const double y = loss.target_space() == TargetSpace::binary_labels ? 1.0 : u(gen);
      const double a = u(gen);
      const double b = u(gen);
      const double mid = loss.evaluate_unchecked(y, 0.5 * (a + b)).value;
      const double chord = 0.5 * (loss.evaluate_unchecked(y, a).value + loss.evaluate_unchecked(y, b).value);
      CHECK(mid <= chord + 1e-12);
      CHECK(loss.evaluate_unchecked(y, a).d2 >= 0.0);
    }
  }
}

TEST_CASE("envelope certificate") {
  Eigen::MatrixXd xs = Eigen::MatrixXd::Zero(4, 1);
  Eigen::VectorXd pos = Eigen::VectorXd::Ones(4);
  const auto lc = envelope_certificate(SmoothLoss::logistic_classification(), 1.0, xs, pos);
  CHECK(lc.b_dprime == doctest::Approx(0.25).epsilon(1e-15));
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(lc.b_prime(i) <= 1.0);
    CHECK(lc.b_prime(i) >= 1.0 / (1.0 + std::exp(1.0)) - 1e-15);
  }

  Eigen::VectorXd ys(4);
  ys << -2.0, -0.5, 1.0, 2.0;
  const auto hu = envelope_certificate(SmoothLoss::huber(1.0), 5.0, xs, ys);
  double oracle_max = 0.0;
  for (double y : ys) {
    for (int k = 0; k <= 100000; ++k) {
      const double t = -5.0 + 10.0 * k / 100000.0;
      const double r = std::abs(y - t);
      oracle_max = std::max(oracle_max, r <= 1.0 ? 1.0 : 0.0);
    }
  }
  CHECK(hu.b_dprime <= oracle_max);
  CHECK(hu.b_dprime <= 1.0);
  CHECK_THROWS_AS(envelope_certificate(SmoothLoss::huber(1.0), 0.0, xs, ys), InputError);
}

TEST_CASE("smoothed hinge gap shrinks with eps") {
  double previous = 1e300;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const auto loss = SmoothLoss::smoothed_hinge(eps);
    double gap = 0.0;
    for (int k = 0; k <= 20000; ++k) {
      const double t = -3.0 + 6.0 * k / 20000.0;
      gap = std::max(gap, std::abs(loss.evaluate_unchecked(1.0, t).value - oracle::hinge(1.0, t)));
    }
    CHECK(gap <= previous);
    previous = gap;
  }
}

TEST_CASE("envelope certificate dominates fresh probes") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double a = 2.5;
  std::uniform_real_distribution<double> ut(-a, a);
  for (const auto& loss : {SmoothLoss::logistic_classification(), SmoothLoss::logistic_regression(),
                           SmoothLoss::huber(0.8), SmoothLoss::smoothed_hinge(0.1)}) {
    const bool labels = loss.target_space() == TargetSpace::binary_labels;
    Eigen::MatrixXd xs = Eigen::MatrixXd::Zero(20, 1);
    Eigen::VectorXd ys(20);
    for (auto& y : ys) y = labels ? (u(gen) > 0 ? 1.0 : -1.0) : u(gen);
    const auto cert = envelope_certificate(loss, a, xs, ys);
    for (int k = 0; k < 200; ++k) {
      const int i = k % 20;
      const auto e = loss.evaluate_unchecked(ys(i), ut(gen));
      CHECK(std::abs(e.d1) <= cert.b_prime(i) + 1e-12);
      CHECK(std::abs(e.d2) <= cert.b_dprime + 1e-12);
    }
  }
}
