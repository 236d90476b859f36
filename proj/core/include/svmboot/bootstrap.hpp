#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "svmboot/solver.hpp"

namespace svmboot {

/// Multinomial(n; 1/n, ..., 1/n) resampling counts: counts[i] is how many
/// times observation i is redrawn.
struct MultinomialWeights {
  std::vector<int> counts;
  int n = 0;
};

/// Tallies n i.i.d. uniform draws from {0, ..., n-1}. Deterministic per seed.
MultinomialWeights draw_multinomial_weights(int n, std::uint64_t seed);

struct BootstrapOptions {
  int jobs = 1;
  /// Ensemble fails when more than this fraction of replicates fail to fit.
  double max_failure_fraction = 0.05;
  SolverOptions solver;
};

/// Efron bootstrap of the SVM map evaluated on a grid.
///
/// Row r of scaled_draws is sqrt(n) (f*_b - f_n)(grid) for replicate
/// b = replicate_index[r]; replicate b uses seed derive_seed(master_seed, b).
/// All replicate coefficient vectors live on the base sample's points.
struct BootstrapEnsemble {
  SvmFit base_fit;
  Points grid;
  Eigen::VectorXd base_on_grid;
  std::vector<Eigen::VectorXd> replicates;
  std::vector<int> replicate_index;
  std::vector<std::uint64_t> replicate_seeds;
  std::vector<int> failed;
  Eigen::MatrixXd scaled_draws;
  std::uint64_t master_seed = 0;
  int requested = 0;
};

BootstrapEnsemble bootstrap_ensemble(const Dataset& data, const KernelSpec& kernel,
                                     const SmoothLoss& loss, double lambda, int replicates,
                                     const Points& grid, std::uint64_t master_seed,
                                     const BootstrapOptions& options = {});

/// Rebuilds scaled_draws from replicates and base_fit.
Eigen::MatrixXd recompute_scaled_draws(const BootstrapEnsemble& ensemble);

}  // namespace svmboot
