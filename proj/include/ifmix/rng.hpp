#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ifmix {

/// Seeded random stream. Every stochastic routine takes one of these by
/// reference so callers own the state and runs are reproducible.
class Rng {
public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream for a (seed, tag...) tuple, e.g. (seed, run, fold).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

  std::vector<std::size_t> permutation(std::size_t n);

  engine_type& engine() { return engine_; }

private:
  engine_type engine_;
};

/// splitmix64 finalizer; used to mix seed tuples into well-separated streams.
std::uint64_t mix_seed(std::uint64_t x);

} // namespace ifmix
