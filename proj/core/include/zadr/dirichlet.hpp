#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "zadr/random.hpp"

namespace zadr::dirichlet {

/// Precision parametrization: classical parameters are phi * a_star.
struct DirichletParams {
  double phi = 1.0;
  Eigen::VectorXd a_star;

  /// Throws DomainError unless phi > 0, a_star > 0 and sums to one (1e-12).
  void validate() const;
};

/// How a row with zeros is scored on its positive sub-simplex.
///  AsWritten:    lgamma(phi) is kept as the normalizer, exactly as the
///                zero-adjusted log-likelihood is usually printed. Grows
///                like (1 - sum_C a) phi log phi, so it has no maximum in phi.
///  Renormalized: lgamma(phi * sum_{i in C} a_i) replaces it, giving the
///                normalized marginal Dirichlet density. The default.
enum class ZeroMode { AsWritten, Renormalized };

double log_density(std::span<const double> y, const DirichletParams& params);

/// count x D matrix of draws; deterministic in `seed`.
Eigen::MatrixXd sample(const DirichletParams& params, std::size_t count, std::uint64_t seed);

/// One draw restricted to the index set `C` (|C| >= 2) with parameters
/// phi * a_star[i], i in C. Entries outside C are exactly zero.
Eigen::VectorXd sample_subcomposition(const DirichletParams& params, std::span<const std::size_t> C, Rng& rng);

double subcomposition_log_density(std::span<const double> y, const DirichletParams& params,
                                  std::span<const std::size_t> C, ZeroMode mode = ZeroMode::Renormalized);

}  // namespace zadr::dirichlet
