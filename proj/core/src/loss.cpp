#include "svmboot/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svmboot/error.hpp"

namespace svmboot {

namespace {

double sigmoid(double u) noexcept {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// log(1 + exp(u)) without overflow.
double softplus(double u) noexcept {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

// -ln(4 e^r / (1 + e^r)^2) = 2 ln cosh(r / 2), accurate near r = 0.
double logistic_residual_value(double r) noexcept {
  const double ar = std::abs(r);
  if (ar < 40.0) {
    const double s = std::sinh(ar / 4.0);
    return 2.0 * std::log1p(2.0 * s * s);
  }
  return ar + 2.0 * std::log1p(std::exp(-ar)) - 2.0 * std::numbers::ln2;
}

// Huber rho(r) with the kink at |r| = delta replaced by a linear ramp of rho''
// from 1 to 0 on [delta - h, delta + h]. Returns (rho, rho', rho'').
LossEval huber_residual(double r, double delta) noexcept {
  const double h = std::min(kHuberBlendHalfWidth, 0.5 * delta);
  const double ar = std::abs(r);
  const double sign = r < 0.0 ? -1.0 : 1.0;
  const double lo = delta - h;
  if (ar <= lo) return {0.5 * r * r, r, 1.0};
  if (ar >= delta + h) {
    // Matches delta * (|r| - delta / 2) up to the blend's h^2 / 6 offset.
    return {delta * (ar - 0.5 * delta) - h * h / 6.0, sign * delta, 0.0};
  }
  const double u = ar - lo;
  const double d2 = (2.0 * h - u) / (2.0 * h);
  const double d1 = lo + u - u * u / (4.0 * h);
  const double value = 0.5 * lo * lo + lo * u + 0.5 * u * u - u * u * u / (12.0 * h);
  return {value, sign * d1, d2};
}

}  // namespace

std::string_view to_string(LossFamily family) noexcept {
  switch (family) {
    case LossFamily::logistic_classification: return "logistic_classification";
    case LossFamily::logistic_regression: return "logistic_regression";
    case LossFamily::huber: return "huber";
    case LossFamily::smoothed_hinge: return "smoothed_hinge";
  }
  return "unknown";
}

LossFamily loss_family_from_string(std::string_view name) {
  if (name == "logistic_classification") return LossFamily::logistic_classification;
  if (name == "logistic_regression") return LossFamily::logistic_regression;
  if (name == "huber") return LossFamily::huber;
  if (name == "smoothed_hinge") return LossFamily::smoothed_hinge;
  if (name == "hinge") {
    throw ConfigError("loss",
                      "loss 'hinge' is not differentiable and is not supported; "
                      "use 'smoothed_hinge' with a small eps instead",
                      "loss.family");
  }
  throw ConfigError("loss",
                    "unknown loss family '" + std::string(name) +
                        "' (expected logistic_classification, logistic_regression, huber "
                        "or smoothed_hinge)",
                    "loss.family");
}

SmoothLoss SmoothLoss::logistic_classification() {
  return SmoothLoss(LossFamily::logistic_classification, 0.0);
}

SmoothLoss SmoothLoss::logistic_regression() {
  return SmoothLoss(LossFamily::logistic_regression, 0.0);
}

SmoothLoss SmoothLoss::huber(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("loss", "huber delta must be finite and > 0", "loss.delta");
  }
  return SmoothLoss(LossFamily::huber, delta);
}

SmoothLoss SmoothLoss::smoothed_hinge(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ConfigError("loss", "smoothed_hinge eps must be finite and > 0", "loss.eps");
  }
  return SmoothLoss(LossFamily::smoothed_hinge, eps);
}

SmoothLoss smoothed_hinge(double eps) { return SmoothLoss::smoothed_hinge(eps); }

double hinge(double y, double t) noexcept { return std::max(0.0, 1.0 - y * t); }

TargetSpace SmoothLoss::target_space() const noexcept {
  switch (family_) {
    case LossFamily::logistic_classification:
    case LossFamily::smoothed_hinge:
      return TargetSpace::binary_labels;
    case LossFamily::logistic_regression:
    case LossFamily::huber:
      return TargetSpace::real;
  }
  return TargetSpace::real;
}

void SmoothLoss::check_target(double y) const {
  if (!std::isfinite(y)) throw InputError("loss", "target must be finite");
  if (target_space() == TargetSpace::binary_labels && y != 1.0 && y != -1.0) {
    throw InputError("loss", std::string(to_string(family_)) +
                                 " needs labels in {-1, +1}, got " + std::to_string(y));
  }
}

LossEval SmoothLoss::evaluate(const Eigen::Ref<const Eigen::VectorXd>& /*x*/, double y,
                              double t) const {
  check_target(y);
  if (!std::isfinite(t)) throw InputError("loss", "loss evaluated at non-finite t");
  return evaluate_unchecked(y, t);
}

LossEval SmoothLoss::evaluate_unchecked(double y, double t) const noexcept {
  switch (family_) {
    case LossFamily::logistic_classification: {
      const double m = y * t;
      const double s = sigmoid(-m);
      return {softplus(-m), -y * s, s * (1.0 - s)};
    }
    case LossFamily::logistic_regression: {
      const double r = y - t;
      const double c = std::cosh(0.5 * r);
      const double d2 = std::isfinite(c) ? 0.5 / (c * c) : 0.0;
      return {logistic_residual_value(r), -std::tanh(0.5 * r), d2};
    }
    case LossFamily::huber: {
      const LossEval rho = huber_residual(y - t, param_);
      return {rho.value, -rho.d1, rho.d2};
    }
    case LossFamily::smoothed_hinge: {
      const double eps = param_;
      const double m = y * t;
      const double lo = 1.0 - 2.0 * eps;
      const double hi = 1.0 + 2.0 * eps;
      if (m >= hi) return {0.0, 0.0, 0.0};
      if (m < lo) return {1.0 - m, -y, 0.0};
      const double gap = hi - m;
      return {gap * gap / (8.0 * eps), -y * gap / (4.0 * eps), 1.0 / (4.0 * eps)};
    }
  }
  return {};
}

std::vector<double> SmoothLoss::curvature_peaks(double y) const {
  switch (family_) {
    case LossFamily::logistic_classification: return {0.0};
    case LossFamily::logistic_regression:
    case LossFamily::huber:
    case LossFamily::smoothed_hinge:
      return {y};
  }
  return {};
}

EnvelopeCertificate envelope_certificate(const SmoothLoss& loss, double a,
                                         const Eigen::MatrixXd& xs,
                                         const Eigen::VectorXd& ys) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw InputError("loss", "envelope radius a must be finite and > 0");
  }
  if (ys.size() == 0) throw InputError("loss", "envelope_certificate needs a nonempty sample");
  if (xs.rows() != ys.size()) throw InputError("loss", "sample xs/ys length mismatch");

  std::vector<double> grid(kEnvelopeGridSize);
  for (int k = 0; k < kEnvelopeGridSize; ++k) {
    grid[k] = -a + 2.0 * a * k / (kEnvelopeGridSize - 1);
  }

  EnvelopeCertificate cert;
  cert.b_prime.resize(ys.size());
  for (Eigen::Index i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    loss.check_target(y);
    double sup_d1 = 0.0;
    double sup_d2 = 0.0;
    auto probe = [&](double t) {
      const LossEval e = loss.evaluate_unchecked(y, t);
      sup_d1 = std::max(sup_d1, std::abs(e.d1));
      sup_d2 = std::max(sup_d2, std::abs(e.d2));
    };
    for (double t : grid) probe(t);
    for (double t : loss.curvature_peaks(y)) {
      if (t >= -a && t <= a) probe(t);
    }
    cert.b_prime[i] = sup_d1;
    cert.b_dprime = std::max(cert.b_dprime, sup_d2);
  }
  return cert;
}

}  // namespace svmboot
