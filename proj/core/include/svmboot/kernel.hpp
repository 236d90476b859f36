#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace svmboot {

/// A set of n points in R^d, one point per row.
using Points = Eigen::MatrixXd;

struct GramMatrix;

enum class KernelFamily { gaussian_rbf, polynomial, linear };

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily kernel_family_from_string(std::string_view name);

/// Positive-definite kernel with validated parameters.
///
///   gaussian_rbf: k(x, x') = exp(-gamma |x - x'|^2)
///   polynomial:   k(x, x') = (<x, x'> + offset)^degree
///   linear:       k(x, x') = <x, x'>
///
/// Parameters are checked once by the factories; eval() only checks
/// dimensions.
class KernelSpec {
 public:
  static KernelSpec gaussian_rbf(double gamma);
  static KernelSpec polynomial(int degree, double offset);
  static KernelSpec linear();

  KernelFamily family() const noexcept { return family_; }
  double gamma() const noexcept { return gamma_; }
  int degree() const noexcept { return degree_; }
  double offset() const noexcept { return offset_; }

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& x2) const;

  /// sup_x sqrt(k(x, x)) when it is finite for every input (RBF: 1).
  bool has_unit_diagonal() const noexcept { return family_ == KernelFamily::gaussian_rbf; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelSpec(KernelFamily family, double gamma, int degree, double offset)
      : family_(family), gamma_(gamma), degree_(degree), offset_(offset) {}

  // Unchecked evaluation on two rows of equal length.
  template <typename A, typename B>
  double eval_unchecked(const A& x, const B& x2) const;

  friend Eigen::MatrixXd cross_gram(const KernelSpec&, const Points&, const Points&);
  friend GramMatrix gram_matrix(const KernelSpec&, const Points&);

  KernelFamily family_;
  double gamma_ = 0.0;
  int degree_ = 0;
  double offset_ = 0.0;
};

/// Gram matrix K[i][j] = k(points_i, points_j) over a fixed point set.
struct GramMatrix {
  Points points;
  Eigen::MatrixXd entries;

  Eigen::Index size() const noexcept { return entries.rows(); }
};

inline constexpr double kTolPsd = 1e-9;
inline constexpr double kSolveJitter = 1e-10;

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

/// Builds the symmetric Gram matrix. Only the upper triangle is evaluated and
/// mirrored, so entries[i][j] == entries[j][i] bit for bit.
GramMatrix gram_matrix(const KernelSpec& spec, const Points& points);

/// Rectangular kernel matrix C[i][j] = k(a_i, b_j).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Points& a, const Points& b);

/// alpha^T K alpha, the squared RKHS norm of sum_j alpha_j k(., x_j).
/// May be slightly negative from rounding; callers clamp before use.
double rkhs_norm_sq(const Eigen::Ref<const Eigen::VectorXd>& alpha, const GramMatrix& gram);
double rkhs_norm_sq(const Eigen::Ref<const Eigen::VectorXd>& alpha, const Eigen::MatrixXd& gram);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace svmboot
