#pragma once

#include <cstdint>
#include <random>

namespace zadr {

/// Mixes a master seed with a work-unit index (splitmix64 finalizer), so each
/// replicate owns an independent, order-free stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Local generator state. Not shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// log of a Gamma(shape, 1) variate (Marsaglia-Tsang; shape < 1 is boosted
  /// through Gamma(shape + 1) * U^(1/shape), kept in log space).
  double log_gamma_variate(double shape);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace zadr
