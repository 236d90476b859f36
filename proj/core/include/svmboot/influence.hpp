#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "svmboot/solver.hpp"

namespace svmboot {

/// The Hessian-like operator
///
///   K_P f = 2 lambda f + E_Pn[ L''(X, Y, f_n(X)) f(X) k(., X) ]
///
/// in coefficient coordinates over representation points p_1..p_m (training
/// inputs in sample order, then extra points). For f = sum_j beta_j k(., p_j),
/// K_P f has coefficients kp_matrix * beta with
///
///   kp_matrix = 2 lambda I + (1/n) D K~,   D_jj = L''(x_j, y_j, f_n(x_j))
///
/// (D_jj = 0 for extra points) and K~ the Gram matrix over the p_j. Both the
/// range of the correction term and every right-hand side used here lie in this
/// span, so restricting the operator to it is exact.
class InfluenceModel {
 public:
  const SvmFit& fit() const noexcept { return fit_; }
  const Dataset& data() const noexcept { return data_; }
  const Points& representation_points() const noexcept { return points_; }
  const Eigen::MatrixXd& representation_gram() const noexcept { return gram_; }
  const Eigen::MatrixXd& kp_matrix() const noexcept { return kp_; }
  /// L''(x_j, y_j, f_n(x_j)) for training points, 0 for extra points.
  const Eigen::VectorXd& curvature() const noexcept { return curvature_; }
  /// L'(x_i, y_i, f_n(x_i)) for the training points.
  const Eigen::VectorXd& slopes() const noexcept { return slopes_; }
  Eigen::Index training_size() const noexcept { return data_.size(); }
  Eigen::Index size() const noexcept { return points_.rows(); }

  /// Index of a representation point equal to x, or -1.
  Eigen::Index find_point(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& beta) const;
  /// Solves kp_matrix * beta = rhs through the stored factorization.
  Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

  friend InfluenceModel build_influence_model(const SvmFit&, const Dataset&, const Points&);

 private:
  InfluenceModel() = default;

  SvmFit fit_;
  Dataset data_;
  Points points_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd kp_;
  Eigen::VectorXd curvature_;
  Eigen::VectorXd slopes_;
  // kp * beta = rhs  <=>  (2 lambda I + S K~ S) t = S K~ rhs,
  // beta = (rhs - S t) / (2 lambda), with S = sqrt(D / n).
  Eigen::VectorXd root_curvature_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// `fit` must be the uniform-weight fit of `data` (support points = data.xs).
/// Extra points equal to an existing representation point are skipped.
InfluenceModel build_influence_model(const SvmFit& fit, const Dataset& data,
                                     const Points& extra_points = {});

/// A function sum_j coefficients_j k(., points_j).
struct KernelExpansion {
  Points points;
  Eigen::VectorXd coefficients;
  KernelSpec kernel = KernelSpec::linear();

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd on_grid(const Points& grid) const;
  double norm() const;
};

/// The derivative of the SVM map at Pn in the direction delta_z - Pn:
///
///   -K_P^{-1}( L'(z, f_n(x_z)) k(., x_z) - (1/n) sum_i L'_i k(., x_i) ).
///
/// If x_z is not a representation point the model is extended by it first.
KernelExpansion influence_function(const InfluenceModel& model,
                                   const Eigen::Ref<const Eigen::VectorXd>& x, double y);

/// Smallest singular value of K_P on the representation span, measured in an
/// RKHS-orthonormal basis of that span (the operator is self-adjoint there).
double kp_min_singular_value(const InfluenceModel& model);

/// Smallest singular value of the raw coefficient matrix kp_matrix. This is
/// basis dependent and may fall below 2 lambda when K~ is ill-conditioned.
double kp_coefficient_min_singular_value(const InfluenceModel& model);

/// Zero-mean Gaussian law of the grid marginals of the limit of
/// sqrt(n) (f_n - f_P), estimated by the plug-in covariance
/// (1/n) sum_i IF(z_i)(grid) IF(z_i)(grid)^T.
struct AsymptoticLaw {
  Points grid;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd mean;
  Eigen::Index sample_size = 0;
  Eigen::Index basis_size = 0;
};

/// Every grid row must be a representation point of `model`.
AsymptoticLaw asymptotic_law(const InfluenceModel& model, const Dataset& data, const Points& grid);

/// Influence values IF(z_i)(grid_g), one column per training point.
Eigen::MatrixXd influence_on_grid(const InfluenceModel& model, const Points& grid);

struct GaussianDraws {
  Eigen::MatrixXd draws;  // count x g
  /// Sum of |negative eigenvalues| clamped to zero before the square root.
  double clamped_mass = 0.0;
};

/// Draws via the symmetric square root of the covariance. Throws NumericError
/// when the clamped mass exceeds 1e-8 times the trace.
GaussianDraws sample_gaussian(const AsymptoticLaw& law, int count, std::uint64_t seed);

}  // namespace svmboot
