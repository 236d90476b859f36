#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace svmboot {

/// A finite sample of draws standing in for a distribution. Scalar laws have
/// one column; grid laws have one column per grid point.
class EmpiricalLaw {
 public:
  EmpiricalLaw(Eigen::MatrixXd draws, std::string label);
  static EmpiricalLaw scalar(const std::vector<double>& draws, std::string label = {});

  const Eigen::MatrixXd& draws() const noexcept { return draws_; }
  const std::string& label() const noexcept { return label_; }
  Eigen::Index count() const noexcept { return draws_.rows(); }
  Eigen::Index width() const noexcept { return draws_.cols(); }
  bool is_scalar() const noexcept { return draws_.cols() == 1; }

  /// Scalar law of column j.
  EmpiricalLaw marginal(Eigen::Index j) const;
  /// Sorted values of a scalar law.
  std::vector<double> sorted() const;

 private:
  Eigen::MatrixXd draws_;
  std::string label_;
};

/// sup_t |F_a(t) - F_b(t)| over the merged support, exact.
double kolmogorov_distance(const EmpiricalLaw& a, const EmpiricalLaw& b);

/// Integral of |F_a - F_b| over the merged support, clipped at 1. The ECDF
/// difference is piecewise constant, so it is integrated exactly on the union
/// of the support points and a uniform grid of `grid_resolution` nodes.
double bounded_lipschitz_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                                  int grid_resolution = 1024);

/// Sample quantile with linear interpolation between order statistics at
/// position (m - 1) q (the "type 7" rule). q = 0 gives the min, q = 1 the max.
double quantile(const EmpiricalLaw& a, double q);

/// Percentile interval (quantile((1 - level)/2), quantile((1 + level)/2)).
std::pair<double, double> percentile_ci(const EmpiricalLaw& a, double level);

/// One-line header (column names) followed by one row per draw.
void write_law_csv(const std::filesystem::path& path, const EmpiricalLaw& law,
                   const std::vector<std::string>& header = {});
EmpiricalLaw read_law_csv(const std::filesystem::path& path);

}  // namespace svmboot
