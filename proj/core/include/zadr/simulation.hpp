#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "zadr/compositions.hpp"
#include "zadr/model.hpp"
#include "zadr/random.hpp"

namespace zadr {

struct SimulationCell {
  std::size_t n = 0;
  std::string parameter;
  double mse = 0.0;
  std::size_t successes = 0;
};

struct SimulationReport {
  std::vector<std::size_t> sizes;
  std::vector<std::string> parameter_names;
  std::size_t reps = 0;
  double zero_fraction = 0.0;
  std::uint64_t seed = 0;
  /// sizes.size() x parameter_names.size(), row-major by size.
  std::vector<SimulationCell> cells;

  const SimulationCell& cell(std::size_t size_index, std::size_t param_index) const;
};

/// One synthetic dataset of n rows: design rows resampled with replacement
/// from `base_design`, responses drawn from `truth`, and round(zero_fraction*n)
/// randomly chosen rows given one zero in a component that is allowed to be
/// zero (p_hat < 1 in the truth; any component when none is). Those rows are
/// drawn from the sub-Dirichlet on the remaining parts.
std::pair<CompositionDataset, CovariateMatrix> simulate_dataset(const ZadrModel& truth, const CovariateMatrix& base_design,
                                                                std::size_t n, double zero_fraction, Rng& rng);

/// Monte-Carlo MSE of the final (zero-adjusted) estimates per parameter and
/// sample size. Replicates whose fit fails or does not converge are skipped
/// and show up in `successes`.
SimulationReport run_simulation_study(const ZadrModel& truth, const CovariateMatrix& base_design,
                                      const std::vector<std::size_t>& sizes, std::size_t reps, double zero_fraction,
                                      std::uint64_t seed, const FitOptions& opts = {});

/// CSV with header "n,parameter,MSE,successes".
void write_simulation_csv(const SimulationReport& report, std::ostream& out);

}  // namespace zadr
