#include "svmboot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svmboot/error.hpp"

namespace svmboot {

void Dataset::validate(const SmoothLoss& loss) const {
  if (ys.size() < 1) throw InputError("solver", "dataset must contain at least one point");
  if (xs.rows() != ys.size()) {
    throw InputError("solver", "dataset has " + std::to_string(xs.rows()) + " inputs but " +
                                   std::to_string(ys.size()) + " targets");
  }
  if (xs.cols() < 1) throw InputError("solver", "inputs must have dimension >= 1");
  if (!xs.allFinite()) throw InputError("solver", "dataset inputs must be finite");
  for (Eigen::Index i = 0; i < ys.size(); ++i) loss.check_target(ys[i]);
}

WeightedSample WeightedSample::uniform(Dataset data) {
  const Eigen::Index n = data.size();
  if (n < 1) throw InputError("solver", "dataset must contain at least one point");
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return WeightedSample{std::move(data), std::move(w)};
}

WeightedSample WeightedSample::from_counts(Dataset data, const std::vector<int>& counts) {
  const Eigen::Index n = data.size();
  if (static_cast<Eigen::Index>(counts.size()) != n) {
    throw InputError("solver", "count vector length does not match dataset size");
  }
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (counts[i] < 0) throw InputError("solver", "multinomial counts must be nonnegative");
    w[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return WeightedSample{std::move(data), std::move(w)};
}

void WeightedSample::validate(const SmoothLoss& loss) const {
  data.validate(loss);
  if (w.size() != data.size()) throw InputError("solver", "weight vector length mismatch");
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw InputError("solver", "weights must be finite and nonnegative");
  }
  if (std::abs(w.sum() - 1.0) > 1e-12) {
    throw InputError("solver", "weights must sum to 1 (sum is " + std::to_string(w.sum()) + ")");
  }
}

namespace {

struct LossTerms {
  double value = 0.0;      // sum_i w_i L_i
  Eigen::VectorXd g;       // w_i L'_i
  Eigen::VectorXd curv;    // w_i L''_i
};

LossTerms loss_terms(const SmoothLoss& loss, const Eigen::VectorXd& ys, const Eigen::VectorXd& w,
                     const Eigen::VectorXd& f) {
  LossTerms out;
  out.g.resize(f.size());
  out.curv.resize(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const LossEval e = loss.evaluate_unchecked(ys[i], f[i]);
    out.value += w[i] * e.value;
    out.g[i] = w[i] * e.d1;
    out.curv[i] = w[i] * e.d2;
  }
  return out;
}

double loss_value(const SmoothLoss& loss, const Eigen::VectorXd& ys, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& f) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) v += w[i] * loss.evaluate_unchecked(ys[i], f[i]).value;
  return v;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Residual below this fraction of the loss-gradient scale is treated as an
// exact fixed point (it is at the level of rounding in g + 2 lambda alpha).
constexpr double kRelativeResidualFloor = 1e-13;
// Newton steps in a row that fail to halve the best residual, once the
// gradient is within tolerance, before the iteration is declared stalled at
// the rounding floor.
constexpr int kMaxSlowSteps = 3;
// Objective changes this small relative to |G| are rounding noise.
constexpr double kObjectiveRounding = 1e-14;
// Rows per block when streaming a large sample through the center basis.
constexpr Eigen::Index kCenterBlockRows = 4096;

struct CoreResult {
  Eigen::VectorXd alpha;
  double objective = 0.0;
  double stationarity = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

[[noreturn]] void fail_convergence(const std::string& why, int iter, double obj, double grad,
                                   double station) {
  throw ConvergenceError("solver", why, ConvergenceDiagnostics{iter, obj, grad, station});
}

// Newton iteration on G(alpha) = sum w_i L(y_i, (K alpha)_i) + lambda alpha^T K alpha
// for points that all carry positive weight.
//
// The Newton system (K D K + 2 lambda K) s = -K r, with r = g + 2 lambda alpha,
// is solved in the equivalent form (D K + 2 lambda I) s = -r. Writing S = D^{1/2}
// and t = S K s this becomes the SPD system (2 lambda I + S K S) t = -S K r with
// s = -(r + S t) / (2 lambda); its eigenvalues are >= 2 lambda, so no jitter is
// needed even when K is singular (duplicate points).
CoreResult newton_core(const Eigen::MatrixXd& k, const Eigen::VectorXd& ys,
                       const Eigen::VectorXd& w, const SmoothLoss& loss, double lambda,
                       const SolverOptions& opt) {
  const Eigen::Index m = k.rows();
  const double two_lambda = 2.0 * lambda;
  CoreResult out;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m);
  LossTerms terms = loss_terms(loss, ys, w, f);
  double obj = terms.value;
  out.trace.push_back(obj);

  bool converged = false;
  bool stalled = false;
  double grad_norm = 0.0;
  double r_norm = 0.0;
  double best_r = std::numeric_limits<double>::infinity();
  int slow_steps = 0;
  int iter = 0;
  for (; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd r = terms.g + two_lambda * alpha;
    const Eigen::VectorXd grad = k.selfadjointView<Eigen::Lower>() * r;
    r_norm = sup_norm(r);
    grad_norm = sup_norm(grad);
    const double scale = std::max(sup_norm(terms.g), two_lambda * sup_norm(alpha));
    if (r_norm <= kRelativeResidualFloor * scale || r_norm == 0.0) {
      converged = true;
      break;
    }
    slow_steps = r_norm <= 0.5 * best_r ? 0 : slow_steps + 1;
    best_r = std::min(best_r, r_norm);
    if (slow_steps >= kMaxSlowSteps && grad_norm <= opt.tol_kkt) {
      stalled = true;
      break;
    }
    if (iter == opt.max_iter) break;

    const Eigen::VectorXd s_diag = terms.curv.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd system = s_diag.asDiagonal() * k * s_diag.asDiagonal();
    system.diagonal().array() += two_lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success) {
      throw NumericError("solver", "Newton system is not positive definite");
    }
    const Eigen::VectorXd t = llt.solve(-(s_diag.cwiseProduct(grad)));
    const Eigen::VectorXd step = -(r + s_diag.cwiseProduct(t)) / two_lambda;
    if (!step.allFinite()) throw NumericError("solver", "non-finite Newton step");
    const Eigen::VectorXd k_step = k.selfadjointView<Eigen::Lower>() * step;
    const double slope = grad.dot(step);

    Eigen::VectorXd alpha_new = alpha + step;
    Eigen::VectorXd f_new = f + k_step;
    double obj_new = loss_value(loss, ys, w, f_new) + lambda * std::max(0.0, alpha_new.dot(f_new));
    // Near the optimum the predicted decrease is below the rounding of G and
    // Armijo would accept a vanishing step on noise; judge the full step by
    // its residual instead.
    bool accepted = false;
    if (std::abs(obj_new - obj) <= kObjectiveRounding * std::max(1.0, std::abs(obj))) {
      const LossTerms trial = loss_terms(loss, ys, w, f_new);
      accepted = sup_norm(trial.g + two_lambda * alpha_new) < r_norm;
    }
    if (!accepted && slope < 0.0) {
      double tau = 1.0;
      for (int bt = 0; bt <= opt.max_backtracks; ++bt, tau *= 0.5) {
        alpha_new = alpha + tau * step;
        f_new = f + tau * k_step;
        obj_new = loss_value(loss, ys, w, f_new) + lambda * std::max(0.0, alpha_new.dot(f_new));
        if (obj_new <= obj + opt.armijo_c * tau * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      // Rounding regime: the objective no longer resolves the decrease. Take
      // the full step only if it does not increase G and shrinks the residual.
      alpha_new = alpha + step;
      f_new = f + k_step;
      obj_new = loss_value(loss, ys, w, f_new) + lambda * std::max(0.0, alpha_new.dot(f_new));
      const LossTerms trial = loss_terms(loss, ys, w, f_new);
      const double r_new = sup_norm(trial.g + two_lambda * alpha_new);
      if (!(obj_new <= obj) || !(r_new < r_norm)) {
        stalled = true;
        break;
      }
    }
    alpha = std::move(alpha_new);
    f = std::move(f_new);
    obj = obj_new;
    terms = loss_terms(loss, ys, w, f);
    out.trace.push_back(obj);
  }

  // Recompute from alpha so the reported state does not carry update drift.
  f = k.selfadjointView<Eigen::Lower>() * alpha;
  terms = loss_terms(loss, ys, w, f);
  const Eigen::VectorXd r = terms.g + two_lambda * alpha;
  r_norm = sup_norm(r);
  grad_norm = sup_norm(k.selfadjointView<Eigen::Lower>() * r);
  obj = terms.value + lambda * std::max(0.0, alpha.dot(f));
  const double station = r_norm / two_lambda;

  if (!converged) {
    if (!(stalled && grad_norm <= opt.tol_kkt)) {
      fail_convergence(stalled ? "Newton iteration stalled above tolerance"
                               : "Newton iteration hit max_iter",
                       iter, obj, grad_norm, station);
    }
  }
  out.alpha = std::move(alpha);
  out.objective = obj;
  out.stationarity = station;
  out.iterations = iter;
  return out;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("solver", "lambda must be finite and > 0", "lambda");
  }
}

}  // namespace

SvmFit fit(const WeightedSample& sample, const KernelSpec& kernel, const SmoothLoss& loss,
           double lambda, const SolverOptions& options) {
  check_lambda(lambda);
  sample.validate(loss);
  return fit(sample, gram_matrix(kernel, sample.data.xs), kernel, loss, lambda, options);
}

SvmFit fit(const WeightedSample& sample, const GramMatrix& gram, const KernelSpec& kernel,
           const SmoothLoss& loss, double lambda, const SolverOptions& options) {
  check_lambda(lambda);
  sample.validate(loss);
  const Eigen::Index n = sample.data.size();
  if (gram.size() != n) throw InputError("solver", "Gram matrix does not match the sample");

  std::vector<Eigen::Index> active;
  active.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sample.w[i] > 0.0) active.push_back(i);
  }
  const auto m = static_cast<Eigen::Index>(active.size());

  CoreResult core;
  if (m == n) {
    core = newton_core(gram.entries, sample.data.ys, sample.w, loss, lambda, options);
  } else {
    Eigen::MatrixXd k_active(m, m);
    Eigen::VectorXd ys(m);
    Eigen::VectorXd w(m);
    for (Eigen::Index b = 0; b < m; ++b) {
      ys[b] = sample.data.ys[active[b]];
      w[b] = sample.w[active[b]];
      for (Eigen::Index a = 0; a < m; ++a) k_active(a, b) = gram.entries(active[a], active[b]);
    }
    core = newton_core(k_active, ys, w, loss, lambda, options);
  }

  SvmFit out;
  out.support_points = sample.data.xs;
  out.alpha = Eigen::VectorXd::Zero(n);
  for (Eigen::Index b = 0; b < m; ++b) out.alpha[active[b]] = core.alpha[b];
  out.lambda = lambda;
  out.kernel = kernel;
  out.loss = loss;
  out.objective = core.objective;
  out.iterations = core.iterations;
  out.objective_trace = std::move(core.trace);

  // Full-space gradient K (g + 2 lambda alpha); zero-weight rows have r_i = 0.
  const Eigen::VectorXd f = gram.entries * out.alpha;
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r[i] = sample.w[i] * loss.evaluate_unchecked(sample.data.ys[i], f[i]).d1 +
           2.0 * lambda * out.alpha[i];
  }
  out.grad_norm = sup_norm(gram.entries * r);
  out.stationarity = sup_norm(r) / (2.0 * lambda);
  return out;
}

SvmFit fit_on_centers(const WeightedSample& sample, const Points& centers,
                      const KernelSpec& kernel, const SmoothLoss& loss, double lambda,
                      const SolverOptions& opt, double rank_tol) {
  check_lambda(lambda);
  sample.validate(loss);
  if (centers.rows() < 1 || centers.cols() != sample.data.dim()) {
    throw InputError("solver", "centers must be nonempty and match the input dimension");
  }
  // Orthonormal basis psi_r = sum_j basis(j, r) k(., c_j) of the center span.
  const GramMatrix kcc = gram_matrix(kernel, centers);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kcc.entries);
  if (es.info() != Eigen::Success) throw NumericError("solver", "center Gram eigensolver failed");
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0)) throw NumericError("solver", "center Gram matrix is zero");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index r = 0; r < es.eigenvalues().size(); ++r) {
    if (es.eigenvalues()[r] > rank_tol * top) kept.push_back(r);
  }
  const auto rank = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd basis(centers.rows(), rank);
  for (Eigen::Index c = 0; c < rank; ++c) {
    basis.col(c) = es.eigenvectors().col(kept[c]) / std::sqrt(es.eigenvalues()[kept[c]]);
  }
  const Eigen::Index n = sample.data.size();
  Eigen::MatrixXd features(n, rank);
  for (Eigen::Index start = 0; start < n; start += kCenterBlockRows) {
    const Eigen::Index len = std::min(kCenterBlockRows, n - start);
    features.middleRows(start, len) =
        cross_gram(kernel, sample.data.xs.middleRows(start, len), centers) * basis;
  }

  const Eigen::VectorXd& ys = sample.data.ys;
  const Eigen::VectorXd& w = sample.w;
  const double two_lambda = 2.0 * lambda;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(rank);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ys.size());
  LossTerms terms = loss_terms(loss, ys, w, f);
  double obj = terms.value;
  std::vector<double> trace{obj};

  bool converged = false;
  bool stalled = false;
  double grad_norm = 0.0;
  double best_grad = std::numeric_limits<double>::infinity();
  int slow_steps = 0;
  int iter = 0;
  for (; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd grad = features.transpose() * terms.g + two_lambda * theta;
    grad_norm = sup_norm(grad);
    const double scale =
        std::max(sup_norm(features.transpose() * terms.g), two_lambda * sup_norm(theta));
    if (grad_norm <= kRelativeResidualFloor * scale || grad_norm == 0.0) {
      converged = true;
      break;
    }
    slow_steps = grad_norm <= 0.5 * best_grad ? 0 : slow_steps + 1;
    best_grad = std::min(best_grad, grad_norm);
    if (slow_steps >= kMaxSlowSteps && grad_norm <= opt.tol_kkt) {
      stalled = true;
      break;
    }
    if (iter == opt.max_iter) break;
    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(rank, rank);
    for (Eigen::Index start = 0; start < n; start += kCenterBlockRows) {
      const Eigen::Index len = std::min(kCenterBlockRows, n - start);
      const Eigen::MatrixXd scaled =
          terms.curv.segment(start, len).cwiseMax(0.0).cwiseSqrt().asDiagonal() *
          features.middleRows(start, len);
      hessian.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    }
    hessian = hessian.selfadjointView<Eigen::Lower>();
    hessian.diagonal().array() += two_lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() != Eigen::Success) throw NumericError("solver", "Hessian not positive definite");
    const Eigen::VectorXd step = llt.solve(-grad);
    const Eigen::VectorXd f_step = features * step;
    const double slope = grad.dot(step);

    Eigen::VectorXd theta_new;
    Eigen::VectorXd f_new;
    double obj_new = 0.0;
    bool accepted = false;
    if (slope < 0.0) {
      double tau = 1.0;
      for (int bt = 0; bt <= opt.max_backtracks; ++bt, tau *= 0.5) {
        theta_new = theta + tau * step;
        f_new = f + tau * f_step;
        obj_new = loss_value(loss, ys, w, f_new) + lambda * theta_new.squaredNorm();
        if (obj_new <= obj + opt.armijo_c * tau * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      theta_new = theta + step;
      f_new = f + f_step;
      obj_new = loss_value(loss, ys, w, f_new) + lambda * theta_new.squaredNorm();
      const LossTerms trial = loss_terms(loss, ys, w, f_new);
      const double g_new = sup_norm(features.transpose() * trial.g + two_lambda * theta_new);
      if (!(obj_new <= obj) || !(g_new < grad_norm)) {
        stalled = true;
        break;
      }
    }
    theta = std::move(theta_new);
    f = std::move(f_new);
    obj = obj_new;
    terms = loss_terms(loss, ys, w, f);
    trace.push_back(obj);
  }
  if (!converged && !(stalled && grad_norm <= opt.tol_kkt)) {
    fail_convergence("center-span Newton iteration did not converge", iter, obj, grad_norm,
                     grad_norm / two_lambda);
  }

  SvmFit out;
  out.support_points = centers;
  out.alpha = basis * theta;
  out.lambda = lambda;
  out.kernel = kernel;
  out.loss = loss;
  out.objective = obj;
  out.grad_norm = grad_norm;
  out.stationarity = std::numeric_limits<double>::quiet_NaN();
  out.iterations = iter;
  out.objective_trace = std::move(trace);
  return out;
}

Eigen::VectorXd expand(const Eigen::MatrixXd& cross, const Eigen::VectorXd& alpha) {
  if (cross.cols() != alpha.size()) throw InputError("solver", "expansion size mismatch");
  Eigen::VectorXd out(cross.rows());
  for (Eigen::Index g = 0; g < cross.rows(); ++g) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) sum += alpha[j] * cross(g, j);
    out[g] = sum;
  }
  return out;
}

double decision_function(const SvmFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != fit.dim()) {
    throw InputError("solver", "input has dimension " + std::to_string(x.size()) +
                                   ", fit expects " + std::to_string(fit.dim()));
  }
  Points row(1, x.size());
  row.row(0) = x.transpose();
  return expand(cross_gram(fit.kernel, row, fit.support_points), fit.alpha)[0];
}

Eigen::VectorXd evaluate_on_grid(const SvmFit& fit, const Points& grid) {
  if (grid.rows() == 0) return Eigen::VectorXd(0);
  if (grid.cols() != fit.dim()) {
    throw InputError("solver", "grid has dimension " + std::to_string(grid.cols()) +
                                   ", fit expects " + std::to_string(fit.dim()));
  }
  return expand(cross_gram(fit.kernel, grid, fit.support_points), fit.alpha);
}

double norm_bound(const WeightedSample& sample, const SmoothLoss& loss, double lambda) {
  check_lambda(lambda);
  double risk_at_zero = 0.0;
  for (Eigen::Index i = 0; i < sample.data.size(); ++i) {
    risk_at_zero += sample.w[i] * loss.evaluate_unchecked(sample.data.ys[i], 0.0).value;
  }
  return std::sqrt(risk_at_zero / lambda);
}

double rkhs_norm(const SvmFit& fit) {
  return std::sqrt(std::max(0.0, rkhs_norm_sq(fit.alpha, gram_matrix(fit.kernel, fit.support_points))));
}

}  // namespace svmboot
