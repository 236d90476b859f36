#include "svmboot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "svmboot/error.hpp"
#include "svmboot/influence.hpp"
#include "svmboot/law.hpp"
#include "svmboot/parallel.hpp"
#include "svmboot/random.hpp"

namespace svmboot {

std::string_view to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::classification_gaussian_mixture: return "classification_gaussian_mixture";
    case GeneratorKind::regression_sine_noise: return "regression_sine_noise";
  }
  return "unknown";
}

GeneratorKind generator_kind_from_string(std::string_view name) {
  if (name == "classification_gaussian_mixture") return GeneratorKind::classification_gaussian_mixture;
  if (name == "regression_sine_noise") return GeneratorKind::regression_sine_noise;
  throw ConfigError("harness", "unknown generator kind '" + std::string(name) + "'",
                    "generator.kind");
}

GeneratorSpec GeneratorSpec::default_regression() { return GeneratorSpec{}; }

GeneratorSpec GeneratorSpec::default_classification() {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::classification_gaussian_mixture;
  spec.dim = 2;
  spec.positive_weight = 0.5;
  spec.mean_positive = Eigen::Vector2d(1.0, 0.0);
  spec.mean_negative = Eigen::Vector2d(-1.0, 0.0);
  spec.spread = 1.0;
  return spec;
}

void GeneratorSpec::validate() const {
  if (dim < 1) throw ConfigError("harness", "generator dim must be >= 1", "generator.dim");
  if (kind == GeneratorKind::regression_sine_noise) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
      throw ConfigError("harness", "need finite x_min < x_max", "generator.x_min");
    }
    if (!std::isfinite(amplitude)) {
      throw ConfigError("harness", "amplitude must be finite", "generator.amplitude");
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
      throw ConfigError("harness", "noise_sd must be finite and >= 0", "generator.noise_sd");
    }
  } else {
    if (!(positive_weight >= 0.0 && positive_weight <= 1.0)) {
      throw ConfigError("harness", "positive_weight must be in [0, 1]", "generator.positive_weight");
    }
    if (mean_positive.size() != dim || mean_negative.size() != dim || !mean_positive.allFinite() ||
        !mean_negative.allFinite()) {
      throw ConfigError("harness", "class means must be finite vectors of length dim",
                        "generator.mean_positive");
    }
    if (!(spread >= 0.0) || !std::isfinite(spread)) {
      throw ConfigError("harness", "spread must be finite and >= 0", "generator.spread");
    }
  }
}

Dataset generate(const GeneratorSpec& spec, int n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw InputError("harness", "generate needs n >= 1");
  Rng rng(seed);
  Dataset data{Points(n, spec.dim), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    if (spec.kind == GeneratorKind::regression_sine_noise) {
      for (int c = 0; c < spec.dim; ++c) data.xs(i, c) = rng.uniform(spec.x_min, spec.x_max);
      data.ys[i] = spec.amplitude * std::sin(data.xs(i, 0)) + spec.noise_sd * rng.normal();
    } else {
      const bool positive = rng.uniform01() < spec.positive_weight;
      const Eigen::VectorXd& mean = positive ? spec.mean_positive : spec.mean_negative;
      for (int c = 0; c < spec.dim; ++c) data.xs(i, c) = mean[c] + spec.spread * rng.normal();
      data.ys[i] = positive ? 1.0 : -1.0;
    }
  }
  return data;
}

double regression_function(const GeneratorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (spec.kind != GeneratorKind::regression_sine_noise) {
    throw InputError("harness", "regression_function needs a regression generator");
  }
  return spec.amplitude * std::sin(x[0]);
}

Points reference_centers(const GeneratorSpec& spec, const KernelSpec& kernel) {
  spec.validate();
  Eigen::VectorXd lo(spec.dim);
  Eigen::VectorXd hi(spec.dim);
  if (spec.kind == GeneratorKind::regression_sine_noise) {
    lo.setConstant(spec.x_min);
    hi.setConstant(spec.x_max);
  } else {
    lo = spec.mean_positive.cwiseMin(spec.mean_negative).array() - 4.0 * spec.spread;
    hi = spec.mean_positive.cwiseMax(spec.mean_negative).array() + 4.0 * spec.spread;
  }
  const int cap = spec.dim == 1 ? 200 : (spec.dim == 2 ? 25 : 6);
  int per_axis = 9;
  if (kernel.family() == KernelFamily::gaussian_rbf) {
    // Spacing 0.15 / sqrt(gamma) with one kernel length of margin per side.
    const double length = 1.0 / std::sqrt(kernel.gamma());
    lo.array() -= length;
    hi.array() += length;
    const double spacing = 0.15 * length;
    per_axis = static_cast<int>(std::ceil((hi - lo).maxCoeff() / spacing)) + 1;
  }
  per_axis = std::clamp(per_axis, 2, cap);
  Eigen::Index total = 1;
  for (int c = 0; c < spec.dim; ++c) total *= per_axis;
  Points centers(total, spec.dim);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index rem = k;
    for (int c = 0; c < spec.dim; ++c) {
      const Eigen::Index idx = rem % per_axis;
      rem /= per_axis;
      centers(k, c) = lo[c] + (hi[c] - lo[c]) * static_cast<double>(idx) / (per_axis - 1);
    }
  }
  return centers;
}

SvmFit reference_fit(const GeneratorSpec& spec, const KernelSpec& kernel, const SmoothLoss& loss,
                     double lambda, int n_ref, std::uint64_t seed) {
  if (n_ref < kMinReferenceSize) {
    throw ConfigError("harness", "n_ref must be >= " + std::to_string(kMinReferenceSize), "n_ref");
  }
  const Dataset data = generate(spec, n_ref, seed);
  return fit_on_centers(WeightedSample::uniform(data), reference_centers(spec, kernel), kernel,
                        loss, lambda);
}

SamplingLaw mc_sampling_law(const GeneratorSpec& spec, const KernelSpec& kernel,
                            const SmoothLoss& loss, double lambda, int n, int replicates,
                            const Points& grid, const SvmFit& reference,
                            std::uint64_t master_seed, int jobs) {
  if (replicates < 1) throw InputError("harness", "mc_sampling_law needs M >= 1");
  if (n < 1) throw InputError("harness", "mc_sampling_law needs n >= 1");
  spec.validate();
  const Eigen::VectorXd ref_on_grid = evaluate_on_grid(reference, grid);
  const double root_n = std::sqrt(static_cast<double>(n));

  std::vector<std::optional<Eigen::VectorXd>> rows(static_cast<std::size_t>(replicates));
  parallel_for(rows.size(), jobs, [&](std::size_t k) {
    const Dataset data = generate(spec, n, derive_seed(master_seed, k + 1));
    try {
      const SvmFit f = fit(WeightedSample::uniform(data), kernel, loss, lambda);
      rows[k] = root_n * (evaluate_on_grid(f, grid) - ref_on_grid);
    } catch (const ConvergenceError&) {
      rows[k].reset();
    } catch (const NumericError&) {
      rows[k].reset();
    }
  });

  SamplingLaw law;
  for (int k = 0; k < replicates; ++k) {
    if (rows[k]) {
      law.replicate_index.push_back(k + 1);
    } else {
      law.failed.push_back(k + 1);
    }
  }
  law.draws.resize(static_cast<Eigen::Index>(law.replicate_index.size()), grid.rows());
  for (std::size_t r = 0; r < law.replicate_index.size(); ++r) {
    law.draws.row(static_cast<Eigen::Index>(r)) = rows[law.replicate_index[r] - 1]->transpose();
  }
  return law;
}

double ModelConfig::lambda_for(int n) const {
  return lambda_perturbation ? lambda + 1.0 / static_cast<double>(n) : lambda;
}

namespace {

void validate_model(const ModelConfig& model) {
  model.generator.validate();
  if (!(model.lambda > 0.0) || !std::isfinite(model.lambda)) {
    throw ConfigError("harness", "lambda must be finite and > 0", "lambda");
  }
  if (model.n_ref < kMinReferenceSize) {
    throw ConfigError("harness", "n_ref must be >= " + std::to_string(kMinReferenceSize), "n_ref");
  }
  const bool binary = model.loss.target_space() == TargetSpace::binary_labels;
  const bool classification =
      model.generator.kind == GeneratorKind::classification_gaussian_mixture;
  if (binary != classification) {
    throw ConfigError("harness", "loss and generator disagree on the target space", "loss");
  }
}

Points default_grid(const GeneratorSpec& spec) {
  Points grid = Points::Zero(5, spec.dim);
  for (int j = 0; j < 5; ++j) {
    const double frac = 0.1 + 0.2 * j;  // 0.1, 0.3, ..., 0.9 of the range
    if (spec.kind == GeneratorKind::regression_sine_noise) {
      grid(j, 0) = spec.x_min + frac * (spec.x_max - spec.x_min);
    } else {
      grid.row(j) = (spec.mean_negative +
                     (-0.25 + 1.5 * frac) * (spec.mean_positive - spec.mean_negative))
                        .transpose();
    }
  }
  return grid;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double column_sd(const Eigen::MatrixXd& m, Eigen::Index j) {
  if (m.rows() < 2) return 0.0;
  const double mean = m.col(j).mean();
  return std::sqrt((m.col(j).array() - mean).square().sum() / static_cast<double>(m.rows() - 1));
}

}  // namespace

ConsistencyConfig ConsistencyConfig::default_regression() {
  ConsistencyConfig cfg;
  cfg.grid = default_grid(cfg.model.generator);
  return cfg;
}

ConsistencyConfig ConsistencyConfig::default_classification() {
  ConsistencyConfig cfg;
  cfg.model.generator = GeneratorSpec::default_classification();
  cfg.model.kernel = KernelSpec::gaussian_rbf(0.5);
  cfg.model.loss = SmoothLoss::logistic_classification();
  cfg.model.lambda = 0.1;
  cfg.model.n_ref = 200000;
  cfg.grid = default_grid(cfg.model.generator);
  return cfg;
}

void ConsistencyConfig::validate() const {
  validate_model(model);
  if (n_ladder.empty()) throw ConfigError("harness", "n_ladder must not be empty", "n_ladder");
  for (int n : n_ladder) {
    if (n < 2) throw ConfigError("harness", "every ladder size must be >= 2", "n_ladder");
  }
  if (bootstrap_replicates < 2) throw ConfigError("harness", "B must be >= 2", "B");
  if (mc_replicates < 2) throw ConfigError("harness", "M must be >= 2", "M");
  if (gaussian_draws < 2) throw ConfigError("harness", "gaussian_draws must be >= 2", "gaussian_draws");
  if (bl_resolution < 2) throw ConfigError("harness", "bl_resolution must be >= 2", "bl_resolution");
  if (grid.rows() < 1 || grid.cols() != model.generator.dim || !grid.allFinite()) {
    throw ConfigError("harness", "grid must be a nonempty list of finite points of dimension dim",
                      "grid");
  }
}

CoverageConfig CoverageConfig::default_regression() {
  CoverageConfig cfg;
  cfg.x0 = Eigen::VectorXd::Constant(1, 1.0);
  return cfg;
}

void CoverageConfig::validate() const {
  validate_model(model);
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError("harness", "level must be in (0, 1)", "level");
  }
  if (reps < 1) throw ConfigError("harness", "reps must be >= 1", "reps");
  if (n < 2) throw ConfigError("harness", "n must be >= 2", "n");
  if (bootstrap_replicates < 2) throw ConfigError("harness", "B must be >= 2", "B");
  if (x0.size() != model.generator.dim || !x0.allFinite()) {
    throw ConfigError("harness", "x0 must be a finite point of dimension dim", "x0");
  }
}

ConsistencyReport consistency_experiment(const ConsistencyConfig& config, std::uint64_t seed,
                                         int jobs) {
  config.validate();
  const ModelConfig& model = config.model;
  ConsistencyReport report;
  report.config = config;
  report.seed = seed;

  const SvmFit reference =
      reference_fit(model.generator, model.kernel, model.loss, model.lambda, model.n_ref,
                    derive_seed(seed, streams::reference, 0));
  report.reference_on_grid = evaluate_on_grid(reference, config.grid);

  const Eigen::Index g = config.grid.rows();
  for (int n : config.n_ladder) {
    const auto un = static_cast<std::uint64_t>(n);
    const double lambda = model.lambda_for(n);
    const Dataset data = generate(model.generator, n, derive_seed(seed, streams::data, un));

    BootstrapOptions boot_opts;
    boot_opts.jobs = jobs;
    const BootstrapEnsemble ensemble =
        bootstrap_ensemble(data, model.kernel, model.loss, lambda, config.bootstrap_replicates,
                           config.grid, derive_seed(seed, streams::bootstrap, un), boot_opts);
    const SamplingLaw mc = mc_sampling_law(
        model.generator, model.kernel, model.loss, lambda, n, config.mc_replicates, config.grid,
        reference, derive_seed(seed, streams::monte_carlo, un), jobs);
    const InfluenceModel influence = build_influence_model(ensemble.base_fit, data, config.grid);
    const AsymptoticLaw asymptotic = asymptotic_law(influence, data, config.grid);
    const GaussianDraws gaussian = sample_gaussian(asymptotic, config.gaussian_draws,
                                                   derive_seed(seed, streams::gaussian, un));

    const EmpiricalLaw boot_law(ensemble.scaled_draws, "bootstrap");
    const EmpiricalLaw mc_law(mc.draws, "monte_carlo");
    const EmpiricalLaw gauss_law(gaussian.draws, "gaussian");

    LadderResult entry;
    entry.n = n;
    entry.lambda = lambda;
    entry.bootstrap_failures = static_cast<int>(ensemble.failed.size());
    entry.mc_failures = static_cast<int>(mc.failed.size());
    entry.covariance_clamped_mass = gaussian.clamped_mass;
    std::vector<double> ks_bm, bl_bm, ks_gm, ks_gb;
    for (Eigen::Index j = 0; j < g; ++j) {
      const EmpiricalLaw b = boot_law.marginal(j);
      const EmpiricalLaw m = mc_law.marginal(j);
      const EmpiricalLaw q = gauss_law.marginal(j);
      GridPointMetrics pm;
      pm.ks_boot_mc = kolmogorov_distance(b, m);
      pm.bl_boot_mc = bounded_lipschitz_distance(b, m, config.bl_resolution);
      pm.ks_gauss_mc = kolmogorov_distance(q, m);
      pm.bl_gauss_mc = bounded_lipschitz_distance(q, m, config.bl_resolution);
      pm.ks_gauss_boot = kolmogorov_distance(q, b);
      pm.sd_boot = column_sd(ensemble.scaled_draws, j);
      pm.sd_mc = column_sd(mc.draws, j);
      pm.sd_gauss = std::sqrt(std::max(0.0, asymptotic.covariance(j, j)));
      pm.mean_mc = mc.draws.col(j).mean();
      ks_bm.push_back(pm.ks_boot_mc);
      bl_bm.push_back(pm.bl_boot_mc);
      ks_gm.push_back(pm.ks_gauss_mc);
      ks_gb.push_back(pm.ks_gauss_boot);
      entry.points.push_back(pm);
    }
    entry.median_ks_boot_mc = median(ks_bm);
    entry.median_bl_boot_mc = median(bl_bm);
    entry.median_ks_gauss_mc = median(ks_gm);
    entry.median_ks_gauss_boot = median(ks_gb);
    report.ladder.push_back(std::move(entry));
  }

  report.monotone = true;
  for (std::size_t k = 1; k < report.ladder.size(); ++k) {
    if (report.ladder[k].median_ks_boot_mc > report.ladder[k - 1].median_ks_boot_mc) {
      report.monotone = false;
    }
  }
  return report;
}

CoverageReport coverage_experiment(const CoverageConfig& config, std::uint64_t seed, int jobs) {
  config.validate();
  const ModelConfig& model = config.model;
  CoverageReport report;
  report.config = config;
  report.seed = seed;

  const SvmFit reference =
      reference_fit(model.generator, model.kernel, model.loss, model.lambda, model.n_ref,
                    derive_seed(seed, streams::reference, 0));
  report.reference_at_x0 = decision_function(reference, config.x0);

  Points x0(1, config.x0.size());
  x0.row(0) = config.x0.transpose();
  const double lambda = model.lambda_for(config.n);
  const double root_n = std::sqrt(static_cast<double>(config.n));

  struct Interval {
    double lo;
    double hi;
  };
  std::vector<std::optional<Interval>> intervals(static_cast<std::size_t>(config.reps));
  parallel_for(intervals.size(), jobs, [&](std::size_t r) {
    const auto ur = static_cast<std::uint64_t>(r + 1);
    const Dataset data =
        generate(model.generator, config.n, derive_seed(seed, streams::coverage_data, ur));
    try {
      const BootstrapEnsemble ensemble = bootstrap_ensemble(
          data, model.kernel, model.loss, lambda, config.bootstrap_replicates, x0,
          derive_seed(seed, streams::coverage_bootstrap, ur));
      // Percentile method: quantiles of f*(x0) = f_n(x0) + draw / sqrt(n).
      const Eigen::MatrixXd replicate_values =
          (ensemble.scaled_draws.array() / root_n + ensemble.base_on_grid[0]).matrix();
      const auto [lo, hi] = percentile_ci(EmpiricalLaw(replicate_values, "f*"), config.level);
      intervals[r] = Interval{lo, hi};
    } catch (const ConvergenceError&) {
      intervals[r].reset();
    } catch (const NumericError&) {
      intervals[r].reset();
    }
  });

  double width_sum = 0.0;
  for (const auto& iv : intervals) {
    if (!iv) {
      ++report.failed;
      continue;
    }
    ++report.completed;
    report.lower.push_back(iv->lo);
    report.upper.push_back(iv->hi);
    width_sum += iv->hi - iv->lo;
    if (iv->lo <= report.reference_at_x0 && report.reference_at_x0 <= iv->hi) ++report.hits;
  }
  if (report.completed > 0) {
    const double p = static_cast<double>(report.hits) / report.completed;
    report.coverage = p;
    report.standard_error = std::sqrt(p * (1.0 - p) / report.completed);
    report.mean_width = width_sum / report.completed;
  }
  return report;
}

}  // namespace svmboot
