#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "svmboot/bootstrap.hpp"
#include "svmboot/solver.hpp"

namespace svmboot {

enum class GeneratorKind { classification_gaussian_mixture, regression_sine_noise };

std::string_view to_string(GeneratorKind kind) noexcept;
GeneratorKind generator_kind_from_string(std::string_view name);

/// Synthetic data-generating distribution P.
///
///   regression_sine_noise: X ~ U[x_min, x_max]^dim,
///                          Y = amplitude sin(X_1) + noise_sd N(0, 1)
///   classification_gaussian_mixture: Y = +1 with prob positive_weight else -1,
///                          X | Y ~ N(mean_{Y}, spread^2 I)
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::regression_sine_noise;
  int dim = 1;
  double x_min = -3.0;
  double x_max = 3.0;
  double amplitude = 1.0;
  double noise_sd = 0.5;
  double positive_weight = 0.5;
  Eigen::VectorXd mean_positive;
  Eigen::VectorXd mean_negative;
  double spread = 1.0;

  static GeneratorSpec default_regression();
  static GeneratorSpec default_classification();
  void validate() const;
};

Dataset generate(const GeneratorSpec& spec, int n, std::uint64_t seed);

/// E[Y | X = x] for the regression generator.
double regression_function(const GeneratorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Center set on which reference fits are represented: a tensor grid covering
/// the bulk of P's input support, spaced finely relative to the kernel width.
Points reference_centers(const GeneratorSpec& spec, const KernelSpec& kernel);

inline constexpr int kMinReferenceSize = 10000;

/// Proxy for the population minimizer f_{L,P,lambda}: a fit on n_ref fresh
/// draws, represented on reference_centers().
SvmFit reference_fit(const GeneratorSpec& spec, const KernelSpec& kernel, const SmoothLoss& loss,
                     double lambda, int n_ref, std::uint64_t seed);

/// Monte-Carlo sampling law of sqrt(n) (f_n - f_ref) on a grid. Replicate m
/// (1-based) draws its dataset with derive_seed(master_seed, m).
struct SamplingLaw {
  Eigen::MatrixXd draws;
  std::vector<int> replicate_index;
  std::vector<int> failed;
};

SamplingLaw mc_sampling_law(const GeneratorSpec& spec, const KernelSpec& kernel,
                            const SmoothLoss& loss, double lambda, int n, int replicates,
                            const Points& grid, const SvmFit& reference,
                            std::uint64_t master_seed, int jobs = 1);

/// The part of an experiment configuration that defines P and the estimator.
struct ModelConfig {
  GeneratorSpec generator = GeneratorSpec::default_regression();
  KernelSpec kernel = KernelSpec::gaussian_rbf(1.0);
  SmoothLoss loss = SmoothLoss::logistic_regression();
  double lambda = 0.05;
  /// Use lambda_n = lambda + 1/n instead of a fixed lambda.
  bool lambda_perturbation = false;
  /// The reference error enters sqrt(n) (f_n - f_ref) as sqrt(n / n_ref) times
  /// the sampling sd, so n_ref must be large against the biggest n studied.
  int n_ref = 1000000;

  double lambda_for(int n) const;
};

struct ConsistencyConfig {
  ModelConfig model;
  std::vector<int> n_ladder{50, 200, 800};
  int bootstrap_replicates = 2000;
  int mc_replicates = 2000;
  int gaussian_draws = 10000;
  int bl_resolution = 1024;
  Points grid;

  static ConsistencyConfig default_regression();
  static ConsistencyConfig default_classification();
  void validate() const;
};

struct CoverageConfig {
  ModelConfig model;
  int n = 400;
  int bootstrap_replicates = 1000;
  int reps = 500;
  double level = 0.9;
  Eigen::VectorXd x0;

  static CoverageConfig default_regression();
  void validate() const;
};

/// Distances between laws at one grid point.
struct GridPointMetrics {
  double ks_boot_mc = 0.0;
  double bl_boot_mc = 0.0;
  double ks_gauss_mc = 0.0;
  double bl_gauss_mc = 0.0;
  double ks_gauss_boot = 0.0;
  double sd_boot = 0.0;
  double sd_mc = 0.0;
  double sd_gauss = 0.0;
  double mean_mc = 0.0;
};

struct LadderResult {
  int n = 0;
  double lambda = 0.0;
  std::vector<GridPointMetrics> points;
  double median_ks_boot_mc = 0.0;
  double median_bl_boot_mc = 0.0;
  double median_ks_gauss_mc = 0.0;
  double median_ks_gauss_boot = 0.0;
  int bootstrap_failures = 0;
  int mc_failures = 0;
  double covariance_clamped_mass = 0.0;
};

struct ConsistencyReport {
  ConsistencyConfig config;
  std::uint64_t seed = 0;
  Eigen::VectorXd reference_on_grid;
  std::vector<LadderResult> ladder;
  /// Median bootstrap-vs-MC Kolmogorov distance never increases along the ladder.
  bool monotone = false;
};

struct CoverageReport {
  CoverageConfig config;
  std::uint64_t seed = 0;
  double reference_at_x0 = 0.0;
  int hits = 0;
  int completed = 0;
  int failed = 0;
  double coverage = 0.0;
  double standard_error = 0.0;
  double mean_width = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
};

ConsistencyReport consistency_experiment(const ConsistencyConfig& config, std::uint64_t seed,
                                         int jobs = 1);
CoverageReport coverage_experiment(const CoverageConfig& config, std::uint64_t seed, int jobs = 1);

/// Sub-stream identifiers for derive_seed(seed, stream, index).
namespace streams {
inline constexpr std::uint64_t reference = 1;
inline constexpr std::uint64_t data = 2;
inline constexpr std::uint64_t bootstrap = 3;
inline constexpr std::uint64_t monte_carlo = 4;
inline constexpr std::uint64_t gaussian = 5;
inline constexpr std::uint64_t coverage_data = 6;
inline constexpr std::uint64_t coverage_bootstrap = 7;
}  // namespace streams

}  // namespace svmboot
