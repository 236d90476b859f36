#pragma once

#include <cstdint>
#include <random>

namespace svmboot {

/// SplitMix64 finalizer. Used for all seed derivation so that streams are
/// identical on every platform.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of replicate `index` under `master`: splitmix64(master ^ splitmix64(index + golden)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seed for a named sub-stream (data, bootstrap, mc, ...) then an index within it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept;

/// Portable random source: mt19937_64 engine with Boost.Random distributions
/// (whose output, unlike <random>'s, is fixed across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace svmboot
