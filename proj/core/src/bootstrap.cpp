#include "svmboot/bootstrap.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "svmboot/error.hpp"
#include "svmboot/parallel.hpp"
#include "svmboot/random.hpp"

namespace svmboot {

MultinomialWeights draw_multinomial_weights(int n, std::uint64_t seed) {
  if (n < 1) throw InputError("bootstrap", "multinomial weights need n >= 1");
  MultinomialWeights out{std::vector<int>(static_cast<std::size_t>(n), 0), n};
  Rng rng(seed);
  for (int k = 0; k < n; ++k) ++out.counts[rng.index(static_cast<std::size_t>(n))];
  return out;
}

namespace {

Eigen::VectorXd scaled_row(const Eigen::MatrixXd& cross, const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& base_on_grid, double root_n) {
  return root_n * (expand(cross, alpha) - base_on_grid);
}

}  // namespace

BootstrapEnsemble bootstrap_ensemble(const Dataset& data, const KernelSpec& kernel,
                                     const SmoothLoss& loss, double lambda, int replicates,
                                     const Points& grid, std::uint64_t master_seed,
                                     const BootstrapOptions& options) {
  if (replicates < 0) throw ConfigError("bootstrap", "B must be >= 0", "B");
  data.validate(loss);
  if (grid.rows() > 0 && grid.cols() != data.dim()) {
    throw InputError("bootstrap", "grid dimension does not match the data");
  }
  const GramMatrix gram = gram_matrix(kernel, data.xs);
  const int n = static_cast<int>(data.size());

  BootstrapEnsemble out;
  out.base_fit = fit(WeightedSample::uniform(data), gram, kernel, loss, lambda, options.solver);
  out.grid = grid;
  out.master_seed = master_seed;
  out.requested = replicates;
  const Eigen::MatrixXd cross = cross_gram(kernel, grid, data.xs);
  out.base_on_grid = expand(cross, out.base_fit.alpha);

  std::vector<std::optional<Eigen::VectorXd>> results(static_cast<std::size_t>(replicates));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::size_t>(replicates), options.jobs, [&](std::size_t k) {
    const auto b = static_cast<std::uint64_t>(k + 1);
    seeds[k] = derive_seed(master_seed, b);
    const MultinomialWeights weights = draw_multinomial_weights(n, seeds[k]);
    try {
      results[k] = fit(WeightedSample::from_counts(data, weights.counts), gram, kernel, loss,
                       lambda, options.solver)
                       .alpha;
    } catch (const ConvergenceError&) {
      results[k].reset();
    } catch (const NumericError&) {
      results[k].reset();
    }
  });

  const double root_n = std::sqrt(static_cast<double>(n));
  for (int k = 0; k < replicates; ++k) {
    if (results[k]) {
      out.replicates.push_back(std::move(*results[k]));
      out.replicate_index.push_back(k + 1);
      out.replicate_seeds.push_back(seeds[k]);
    } else {
      out.failed.push_back(k + 1);
    }
  }
  if (replicates > 0 &&
      static_cast<double>(out.failed.size()) > options.max_failure_fraction * replicates) {
    throw ConvergenceError("bootstrap",
                           std::to_string(out.failed.size()) + " of " +
                               std::to_string(replicates) + " bootstrap replicates failed to fit",
                           ConvergenceDiagnostics{});
  }
  out.scaled_draws.resize(static_cast<Eigen::Index>(out.replicates.size()), grid.rows());
  for (std::size_t r = 0; r < out.replicates.size(); ++r) {
    out.scaled_draws.row(static_cast<Eigen::Index>(r)) =
        scaled_row(cross, out.replicates[r], out.base_on_grid, root_n).transpose();
  }
  return out;
}

Eigen::MatrixXd recompute_scaled_draws(const BootstrapEnsemble& ensemble) {
  const Eigen::MatrixXd cross =
      cross_gram(ensemble.base_fit.kernel, ensemble.grid, ensemble.base_fit.support_points);
  const Eigen::VectorXd base = expand(cross, ensemble.base_fit.alpha);
  const double root_n = std::sqrt(static_cast<double>(ensemble.base_fit.support_points.rows()));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ensemble.replicates.size()), ensemble.grid.rows());
  for (std::size_t r = 0; r < ensemble.replicates.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        scaled_row(cross, ensemble.replicates[r], base, root_n).transpose();
  }
  return out;
}

}  // namespace svmboot
