#include "svmboot/kernel.hpp"

#include <cmath>
#include <string>

#include "svmboot/error.hpp"

namespace svmboot {

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::gaussian_rbf: return "gaussian_rbf";
    case KernelFamily::polynomial: return "polynomial";
    case KernelFamily::linear: return "linear";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian_rbf") return KernelFamily::gaussian_rbf;
  if (name == "polynomial") return KernelFamily::polynomial;
  if (name == "linear") return KernelFamily::linear;
  throw ConfigError("kernel", "unknown kernel family '" + std::string(name) +
                                  "' (expected gaussian_rbf, polynomial or linear)",
                    "kernel.family");
}

KernelSpec KernelSpec::gaussian_rbf(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("kernel", "gaussian_rbf gamma must be finite and > 0", "kernel.gamma");
  }
  return KernelSpec(KernelFamily::gaussian_rbf, gamma, 0, 0.0);
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  if (degree < 1) {
    throw ConfigError("kernel", "polynomial degree must be >= 1", "kernel.degree");
  }
  if (!(offset >= 0.0) || !std::isfinite(offset)) {
    throw ConfigError("kernel", "polynomial offset must be finite and >= 0", "kernel.offset");
  }
  return KernelSpec(KernelFamily::polynomial, 0.0, degree, offset);
}

KernelSpec KernelSpec::linear() { return KernelSpec(KernelFamily::linear, 0.0, 0, 0.0); }

template <typename A, typename B>
double KernelSpec::eval_unchecked(const A& x, const B& x2) const {
  switch (family_) {
    case KernelFamily::gaussian_rbf:
      return std::exp(-gamma_ * (x - x2).squaredNorm());
    case KernelFamily::polynomial: {
      const double base = x.dot(x2) + offset_;
      double r = 1.0;
      for (int p = 0; p < degree_; ++p) r *= base;
      return r;
    }
    case KernelFamily::linear:
      return x.dot(x2);
  }
  return 0.0;
}

double KernelSpec::eval(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& x2) const {
  if (x.size() != x2.size() || x.size() == 0) {
    throw InputError("kernel", "kernel arguments must have equal, nonzero dimension (got " +
                                   std::to_string(x.size()) + " and " +
                                   std::to_string(x2.size()) + ")");
  }
  return eval_unchecked(x, x2);
}

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  return spec.eval(x, x2);
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Points& a, const Points& b) {
  if (a.rows() > 0 && b.rows() > 0 && a.cols() != b.cols()) {
    throw InputError("kernel", "point sets have different dimensions");
  }
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out(i, j) = spec.eval_unchecked(a.row(i), b.row(j));
    }
  }
  return out;
}

GramMatrix gram_matrix(const KernelSpec& spec, const Points& points) {
  if (points.rows() == 0 || points.cols() == 0) {
    throw InputError("kernel", "gram_matrix needs a nonempty point set");
  }
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = spec.eval_unchecked(points.row(i), points.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return GramMatrix{points, std::move(k)};
}

double rkhs_norm_sq(const Eigen::Ref<const Eigen::VectorXd>& alpha, const Eigen::MatrixXd& gram) {
  if (alpha.size() != gram.rows()) {
    throw InputError("kernel", "coefficient vector length " + std::to_string(alpha.size()) +
                                   " does not match Gram dimension " +
                                   std::to_string(gram.rows()));
  }
  return alpha.dot(gram.selfadjointView<Eigen::Upper>() * alpha);
}

double rkhs_norm_sq(const Eigen::Ref<const Eigen::VectorXd>& alpha, const GramMatrix& gram) {
  return rkhs_norm_sq(alpha, gram.entries);
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace svmboot
