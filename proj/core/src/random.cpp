#include "svmboot/random.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace svmboot {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) noexcept {
  return derive_seed(derive_seed(master, stream), index);
}

double Rng::uniform01() { return boost::random::uniform_01<double>{}(engine_); }

double Rng::uniform(double lo, double hi) {
  return boost::random::uniform_real_distribution<double>{lo, hi}(engine_);
}

double Rng::normal() { return boost::random::normal_distribution<double>{}(engine_); }

std::size_t Rng::index(std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>{0, n - 1}(engine_);
}

}  // namespace svmboot
