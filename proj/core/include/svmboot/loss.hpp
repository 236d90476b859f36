#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace svmboot {

enum class LossFamily { logistic_classification, logistic_regression, huber, smoothed_hinge };
enum class TargetSpace { binary_labels, real };

std::string_view to_string(LossFamily family) noexcept;
LossFamily loss_family_from_string(std::string_view name);

/// L, dL/dt and d2L/dt2 at one (x, y, t).
struct LossEval {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Half-width of the quadratic blend that rounds Huber's kink at |r| = delta.
inline constexpr double kHuberBlendHalfWidth = 0.5e-3;

/// A convex loss L(x, y, t) that is twice differentiable in t.
///
/// Regression losses act on the residual r = y - t, classification losses on
/// the margin m = y t with y in {-1, +1}. None of the families here depend on
/// x; the argument is kept so the call shape matches L(x, y, t).
class SmoothLoss {
 public:
  static SmoothLoss logistic_classification();
  static SmoothLoss logistic_regression();
  static SmoothLoss huber(double delta);
  static SmoothLoss smoothed_hinge(double eps);

  LossFamily family() const noexcept { return family_; }
  TargetSpace target_space() const noexcept;
  /// delta for huber, eps for smoothed_hinge, 0 otherwise.
  double parameter() const noexcept { return param_; }

  /// Throws InputError on an invalid label or non-finite t.
  LossEval evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, double y, double t) const;

  /// No validation; for inner loops over already-checked data.
  LossEval evaluate_unchecked(double y, double t) const noexcept;

  /// Throws InputError if y is not a legal target for this loss.
  void check_target(double y) const;

  /// Values of t at which |L''(., y, .)| peaks for this y.
  std::vector<double> curvature_peaks(double y) const;

  friend bool operator==(const SmoothLoss&, const SmoothLoss&) = default;

 private:
  SmoothLoss(LossFamily family, double param) : family_(family), param_(param) {}

  LossFamily family_;
  double param_ = 0.0;
};

/// Quadratic-spline smoothing of the hinge max(0, 1 - y t) over a margin
/// window of width 4 eps. The sup-distance to the hinge is eps / 2.
SmoothLoss smoothed_hinge(double eps);

/// Plain hinge loss, used only as a reference for the smoothed version.
double hinge(double y, double t) noexcept;

struct EnvelopeCertificate {
  /// Per sample point: sup over t in [-a, a] of |L'(x_i, y_i, t)|.
  Eigen::VectorXd b_prime;
  /// sup over the sample and t in [-a, a] of |L''|.
  double b_dprime = 0.0;
};

inline constexpr int kEnvelopeGridSize = 512;

EnvelopeCertificate envelope_certificate(const SmoothLoss& loss, double a,
                                         const Eigen::MatrixXd& xs,
                                         const Eigen::VectorXd& ys);

}  // namespace svmboot
