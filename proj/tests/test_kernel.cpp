#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "svmboot/error.hpp"
#include "svmboot/kernel.hpp"

using namespace svmboot;

namespace {

Points random_points(int n, int d, unsigned seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Points p(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) p(i, j) = u(gen);
  return p;
}

}  // namespace

TEST_CASE("kernel values on hand inputs") {
  Eigen::Vector2d a(0.3, -0.7);
  CHECK(eval_kernel(KernelSpec::gaussian_rbf(1.0), a, a) == 1.0);
  CHECK(eval_kernel(KernelSpec::linear(), Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) == 11.0);
  Eigen::VectorXd x0(1), x1(1);
  x0 << 0.0;
  x1 << 1.0;
  CHECK(eval_kernel(KernelSpec::gaussian_rbf(1.0), x0, x1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(eval_kernel(KernelSpec::polynomial(2, 1.0), Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) ==
        144.0);
}

TEST_CASE("kernel parameters and dimensions are validated") {
  CHECK_THROWS_AS(KernelSpec::gaussian_rbf(0.0), ConfigError);
  CHECK_THROWS_AS(KernelSpec::gaussian_rbf(-1.0), ConfigError);
  CHECK_THROWS_AS(KernelSpec::polynomial(0, 1.0), ConfigError);
  CHECK_THROWS_AS(KernelSpec::polynomial(2, -1.0), ConfigError);
  CHECK_THROWS_AS(eval_kernel(KernelSpec::linear(), Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3)),
                  InputError);
  CHECK_THROWS_AS(kernel_family_from_string("sigmoid"), ConfigError);
  CHECK(kernel_family_from_string("gaussian_rbf") == KernelFamily::gaussian_rbf);
}

TEST_CASE("gram matrix of identical points is all ones") {
  Points p = Points::Constant(3, 2, 0.25);
  const auto g = gram_matrix(KernelSpec::gaussian_rbf(3.0), p);
  CHECK(g.entries == Eigen::MatrixXd::Ones(3, 3));
}

TEST_CASE("gram matrix is exactly symmetric and matches pointwise evaluation") {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Points p = random_points(17, 3, seed, -2.0, 2.0);
    for (const auto& k : {KernelSpec::gaussian_rbf(0.7), KernelSpec::polynomial(3, 0.5),
                          KernelSpec::linear()}) {
      const auto g = gram_matrix(k, p);
      CHECK(g.entries == g.entries.transpose());
      for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 17; ++j)
          CHECK(g.entries(i, j) == doctest::Approx(k.eval(p.row(i).transpose(), p.row(j).transpose())).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(gram_matrix(KernelSpec::linear(), Points(0, 2)), InputError);
}

TEST_CASE("rbf gram matrix is positive semidefinite") {
  const Points p = random_points(10, 2, 11);
  const auto g = gram_matrix(KernelSpec::gaussian_rbf(2.0), p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.entries);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  CHECK(min_eigenvalue(g.entries) == doctest::Approx(eig.eigenvalues().minCoeff()).epsilon(1e-12));
}

TEST_CASE("cross gram agrees with the oracle kernel") {
  const Points a = random_points(4, 2, 3);
  const Points b = random_points(6, 2, 4);
  const auto c = cross_gram(KernelSpec::gaussian_rbf(1.5), a, b);
  REQUIRE(c.rows() == 4);
  REQUIRE(c.cols() == 6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(c(i, j) == doctest::Approx(oracle::rbf(a.row(i), b.row(j), 1.5)).epsilon(1e-15));
}

TEST_CASE("rkhs norm squared") {
  const Points one = Points::Zero(1, 1);
  const auto g1 = gram_matrix(KernelSpec::gaussian_rbf(1.0), one);
  CHECK(rkhs_norm_sq(Eigen::VectorXd::Zero(1), g1) == 0.0);
  CHECK(rkhs_norm_sq(Eigen::VectorXd::Constant(1, 3.0), g1) == 9.0);

  const Points p = random_points(6, 2, 8);
  const auto g = gram_matrix(KernelSpec::gaussian_rbf(1.0), p);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> nd;
  Eigen::VectorXd alpha(6);
  for (auto& v : alpha) v = nd(gen);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) sum += alpha(i) * alpha(j) * oracle::rbf(p.row(i), p.row(j), 1.0);
  CHECK(std::abs(rkhs_norm_sq(alpha, g) - sum) <= 1e-12);
  CHECK(std::abs(rkhs_norm_sq(alpha, g.entries) - sum) <= 1e-12);
}
