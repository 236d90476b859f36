#pragma once

#include <Eigen/Dense>
#include <vector>

#include "svmboot/kernel.hpp"
#include "svmboot/loss.hpp"

namespace svmboot {

/// Inputs xs (n x d, one row per observation) and targets ys.
struct Dataset {
  Points xs;
  Eigen::VectorXd ys;

  Eigen::Index size() const noexcept { return ys.size(); }
  Eigen::Index dim() const noexcept { return xs.cols(); }

  /// Throws InputError unless n >= 1, shapes agree, entries are finite and
  /// targets are legal for `loss`.
  void validate(const SmoothLoss& loss) const;
};

/// A probability measure supported on the points of a dataset.
struct WeightedSample {
  Dataset data;
  Eigen::VectorXd w;

  /// The empirical measure: w_i = 1/n.
  static WeightedSample uniform(Dataset data);
  /// Bootstrap measure from multinomial counts: w_i = counts_i / n.
  static WeightedSample from_counts(Dataset data, const std::vector<int>& counts);

  void validate(const SmoothLoss& loss) const;
};

/// f = sum_j alpha_j k(., support_points_j), the minimizer of
///   sum_i w_i L(x_i, y_i, f(x_i)) + lambda |f|_H^2.
struct SvmFit {
  Points support_points;
  Eigen::VectorXd alpha;
  double lambda = 0.0;
  KernelSpec kernel = KernelSpec::linear();
  SmoothLoss loss = SmoothLoss::logistic_regression();
  double objective = 0.0;
  /// Sup-norm of the objective gradient in the solver's coordinates.
  double grad_norm = 0.0;
  /// max_i |alpha_i + w_i L'_i / (2 lambda)|; zero at an exact fixed point.
  double stationarity = 0.0;
  int iterations = 0;
  /// Objective value at every accepted iterate, starting from alpha = 0.
  std::vector<double> objective_trace;

  Eigen::Index dim() const noexcept { return support_points.cols(); }
};

struct SolverOptions {
  double tol_kkt = 1e-8;
  int max_iter = 100;
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

/// Damped Newton on alpha with Armijo backtracking, started at alpha = 0.
/// Points with zero weight keep alpha_i = 0 and are left out of the linear
/// algebra. Throws ConvergenceError or NumericError.
SvmFit fit(const WeightedSample& sample, const KernelSpec& kernel, const SmoothLoss& loss,
           double lambda, const SolverOptions& options = {});

/// Same, reusing a Gram matrix over sample.data.xs (shared read-only between
/// bootstrap replicates).
SvmFit fit(const WeightedSample& sample, const GramMatrix& gram, const KernelSpec& kernel,
           const SmoothLoss& loss, double lambda, const SolverOptions& options = {});

/// Minimizes the same objective over span{k(., c_j)} for a fixed center set
/// instead of the sample points. Used for very large samples where the full
/// Gram matrix does not fit in memory. The centers' Gram matrix is
/// diagonalized and directions with eigenvalue below `rank_tol` times the
/// largest are dropped.
SvmFit fit_on_centers(const WeightedSample& sample, const Points& centers,
                      const KernelSpec& kernel, const SmoothLoss& loss, double lambda,
                      const SolverOptions& options = {}, double rank_tol = 1e-12);

double decision_function(const SvmFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x);

/// decision_function at each grid row; bitwise equal to the per-point calls.
Eigen::VectorXd evaluate_on_grid(const SvmFit& fit, const Points& grid);

/// Evaluates sum_j alpha_j cross(g, j) with the same summation order as
/// decision_function, for a precomputed cross-kernel matrix (grid x support).
Eigen::VectorXd expand(const Eigen::MatrixXd& cross, const Eigen::VectorXd& alpha);

/// sqrt(sum_i w_i L(x_i, y_i, 0) / lambda): every minimizer has |f|_H at
/// most this, since f = 0 is feasible.
double norm_bound(const WeightedSample& sample, const SmoothLoss& loss, double lambda);

/// |f|_H for a fit, using its own support points.
double rkhs_norm(const SvmFit& fit);

}  // namespace svmboot
