#include "svmboot/influence.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "svmboot/error.hpp"
#include "svmboot/random.hpp"

namespace svmboot {

namespace {

bool same_point(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

Eigen::Index InfluenceModel::find_point(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != points_.cols()) {
    throw InputError("influence", "point dimension does not match the model");
  }
  for (Eigen::Index j = 0; j < points_.rows(); ++j) {
    if (same_point(points_.row(j).transpose(), x)) return j;
  }
  return -1;
}

Eigen::VectorXd InfluenceModel::apply(const Eigen::Ref<const Eigen::VectorXd>& beta) const {
  if (beta.size() != size()) throw InputError("influence", "coefficient length mismatch");
  return kp_ * beta;
}

Eigen::MatrixXd InfluenceModel::solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  if (rhs.rows() != size()) throw InputError("influence", "right-hand side length mismatch");
  const double two_lambda = 2.0 * fit_.lambda;
  const Eigen::MatrixXd k_rhs = gram_ * rhs;
  const Eigen::MatrixXd t = factor_.solve(root_curvature_.asDiagonal() * k_rhs);
  Eigen::MatrixXd beta = (rhs - root_curvature_.asDiagonal() * t) / two_lambda;
  if (!beta.allFinite()) throw NumericError("influence", "K_P solve produced non-finite values");
  return beta;
}

InfluenceModel build_influence_model(const SvmFit& fit, const Dataset& data,
                                     const Points& extra_points) {
  data.validate(fit.loss);
  if (fit.support_points.rows() != data.size() || fit.support_points.cols() != data.dim() ||
      fit.support_points != data.xs) {
    throw InputError("influence", "fit must be represented on the training inputs of data");
  }
  if (extra_points.rows() > 0 && extra_points.cols() != data.dim()) {
    throw InputError("influence", "extra points have the wrong dimension");
  }

  InfluenceModel model;
  model.fit_ = fit;
  model.data_ = data;

  const Eigen::Index n = data.size();
  std::vector<Eigen::Index> extras;
  for (Eigen::Index e = 0; e < extra_points.rows(); ++e) {
    bool duplicate = false;
    for (Eigen::Index j = 0; j < n && !duplicate; ++j) {
      duplicate = same_point(data.xs.row(j).transpose(), extra_points.row(e).transpose());
    }
    for (Eigen::Index prev : extras) {
      if (duplicate) break;
      duplicate = same_point(extra_points.row(prev).transpose(), extra_points.row(e).transpose());
    }
    if (!duplicate) extras.push_back(e);
  }
  const Eigen::Index m = n + static_cast<Eigen::Index>(extras.size());
  model.points_.resize(m, data.dim());
  model.points_.topRows(n) = data.xs;
  for (std::size_t e = 0; e < extras.size(); ++e) {
    model.points_.row(n + static_cast<Eigen::Index>(e)) = extra_points.row(extras[e]);
  }
  model.gram_ = gram_matrix(fit.kernel, model.points_).entries;

  const Eigen::VectorXd f_train = model.gram_.topLeftCorner(n, n) * fit.alpha;
  model.curvature_ = Eigen::VectorXd::Zero(m);
  model.slopes_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LossEval e = fit.loss.evaluate_unchecked(data.ys[i], f_train[i]);
    model.curvature_[i] = e.d2;
    model.slopes_[i] = e.d1;
  }

  const double two_lambda = 2.0 * fit.lambda;
  const double inv_n = 1.0 / static_cast<double>(n);
  model.kp_ = inv_n * model.curvature_.asDiagonal() * model.gram_;
  model.kp_.diagonal().array() += two_lambda;

  model.root_curvature_ = (inv_n * model.curvature_).cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd system =
      model.root_curvature_.asDiagonal() * model.gram_ * model.root_curvature_.asDiagonal();
  system.diagonal().array() += two_lambda;
  model.factor_.compute(system);
  if (model.factor_.info() != Eigen::Success) {
    throw NumericError("influence", "K_P factorization failed; lambda too small for conditioning");
  }
  return model;
}

double KernelExpansion::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != points.cols()) throw InputError("influence", "evaluation point dimension mismatch");
  Points row(1, x.size());
  row.row(0) = x.transpose();
  return expand(cross_gram(kernel, row, points), coefficients)[0];
}

Eigen::VectorXd KernelExpansion::on_grid(const Points& grid) const {
  if (grid.rows() == 0) return Eigen::VectorXd(0);
  if (grid.cols() != points.cols()) throw InputError("influence", "grid dimension mismatch");
  return expand(cross_gram(kernel, grid, points), coefficients);
}

double KernelExpansion::norm() const {
  return std::sqrt(std::max(0.0, rkhs_norm_sq(coefficients, gram_matrix(kernel, points))));
}

namespace {

// Coefficients of E_Q[L'(X, Y, f_n(X)) k(., X)] for Q = delta_z - Pn.
Eigen::VectorXd influence_rhs(const InfluenceModel& model, Eigen::Index z_index, double slope_z) {
  const Eigen::Index n = model.training_size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(model.size());
  rhs.head(n) = -model.slopes() / static_cast<double>(n);
  rhs[z_index] += slope_z;
  return rhs;
}

}  // namespace

KernelExpansion influence_function(const InfluenceModel& model,
                                   const Eigen::Ref<const Eigen::VectorXd>& x, double y) {
  model.fit().loss.check_target(y);
  Eigen::Index idx = model.find_point(x);
  if (idx < 0) {
    Points extended(model.size() - model.training_size() + 1, x.size());
    extended.topRows(extended.rows() - 1) = model.representation_points().bottomRows(
        model.size() - model.training_size());
    extended.row(extended.rows() - 1) = x.transpose();
    const InfluenceModel bigger = build_influence_model(model.fit(), model.data(), extended);
    return influence_function(bigger, x, y);
  }
  const double f_z = [&] {
    const Eigen::Index n = model.training_size();
    return model.representation_gram().row(idx).head(n).dot(model.fit().alpha);
  }();
  const double slope_z = model.fit().loss.evaluate_unchecked(y, f_z).d1;
  KernelExpansion out;
  out.points = model.representation_points();
  out.coefficients = -model.solve(influence_rhs(model, idx, slope_z));
  out.kernel = model.fit().kernel;
  return out;
}

double kp_min_singular_value(const InfluenceModel& model) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.representation_gram());
  if (es.info() != Eigen::Success) throw NumericError("influence", "Gram eigensolver failed");
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index r = 0; r < es.eigenvalues().size(); ++r) {
    if (es.eigenvalues()[r] > 1e-12 * top) kept.push_back(r);
  }
  const double two_lambda = 2.0 * model.fit().lambda;
  if (kept.empty()) return two_lambda;
  // psi_r = sum_j V_jr mu_r^{-1/2} k(., p_j) is orthonormal in H, and
  // <psi_r, K_P psi_s> = 2 lambda delta_rs + (1/n) sum_i L''_i psi_r(x_i) psi_s(x_i)
  // with psi_s(p_i) = V_is mu_s^{1/2}.
  const auto r = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd values(model.size(), r);
  for (Eigen::Index c = 0; c < r; ++c) {
    values.col(c) = es.eigenvectors().col(kept[c]) * std::sqrt(es.eigenvalues()[kept[c]]);
  }
  const double inv_n = 1.0 / static_cast<double>(model.training_size());
  Eigen::MatrixXd op = inv_n * values.transpose() * model.curvature().asDiagonal() * values;
  op.diagonal().array() += two_lambda;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(op);
  return svd.singularValues().minCoeff();
}

double kp_coefficient_min_singular_value(const InfluenceModel& model) {
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(model.kp_matrix());
  return svd.singularValues().minCoeff();
}

Eigen::MatrixXd influence_on_grid(const InfluenceModel& model, const Points& grid) {
  std::vector<Eigen::Index> grid_index(static_cast<std::size_t>(grid.rows()));
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    grid_index[g] = model.find_point(grid.row(g).transpose());
    if (grid_index[g] < 0) {
      throw InputError("influence", "grid point " + std::to_string(g) +
                                        " is not a representation point of the model");
    }
  }
  const Eigen::Index n = model.training_size();
  // Column i: right-hand side for z_i = (x_i, y_i), whose index is i.
  Eigen::MatrixXd rhs(model.size(), n);
  const Eigen::VectorXd base = influence_rhs(model, 0, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs.col(i) = base;
    rhs(i, i) += model.slopes()[i];
  }
  const Eigen::MatrixXd coeffs = -model.solve(rhs);
  Eigen::MatrixXd values(grid.rows(), n);
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    values.row(g) = model.representation_gram().row(grid_index[g]) * coeffs;
  }
  return values;
}

AsymptoticLaw asymptotic_law(const InfluenceModel& model, const Dataset& data, const Points& grid) {
  if (data.size() != model.training_size() || data.xs != model.data().xs ||
      data.ys != model.data().ys) {
    throw InputError("influence", "asymptotic_law needs the model's own training data");
  }
  const Eigen::MatrixXd values = influence_on_grid(model, grid);
  AsymptoticLaw law;
  law.grid = grid;
  law.covariance = values * values.transpose() / static_cast<double>(data.size());
  law.covariance = 0.5 * (law.covariance + law.covariance.transpose()).eval();
  law.mean = Eigen::VectorXd::Zero(grid.rows());
  law.sample_size = data.size();
  law.basis_size = model.size();
  return law;
}

GaussianDraws sample_gaussian(const AsymptoticLaw& law, int count, std::uint64_t seed) {
  if (count < 0) throw InputError("influence", "draw count must be >= 0");
  const Eigen::Index g = law.covariance.rows();
  GaussianDraws out;
  out.draws = Eigen::MatrixXd::Zero(count, g);
  if (g == 0) return out;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(law.covariance);
  if (es.info() != Eigen::Success) throw NumericError("influence", "covariance eigensolver failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < g; ++k) {
    if (ev[k] < 0.0) {
      out.clamped_mass += -ev[k];
      ev[k] = 0.0;
    }
  }
  const double trace = law.covariance.trace();
  if (out.clamped_mass > 1e-8 * std::abs(trace)) {
    throw NumericError("influence", "covariance has negative eigenvalues beyond rounding (" +
                                        std::to_string(out.clamped_mass) + " vs trace " +
                                        std::to_string(trace) + ")");
  }
  const Eigen::MatrixXd root =
      es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Rng rng(seed);
  Eigen::VectorXd z(g);
  for (int c = 0; c < count; ++c) {
    for (Eigen::Index k = 0; k < g; ++k) z[k] = rng.normal();
    out.draws.row(c) = (root * z).transpose();
  }
  return out;
}

}  // namespace svmboot
