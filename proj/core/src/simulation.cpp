#include "zadr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "zadr/error.hpp"
#include "zadr/format.hpp"
#include "zadr/inference.hpp"
#include "zadr/parallel.hpp"

namespace zadr {

const SimulationCell& SimulationReport::cell(std::size_t size_index, std::size_t param_index) const {
  return cells.at(size_index * parameter_names.size() + param_index);
}

std::pair<CompositionDataset, CovariateMatrix> simulate_dataset(const ZadrModel& truth, const CovariateMatrix& base_design,
                                                                std::size_t n, double zero_fraction, Rng& rng) {
  if (n == 0) throw Error(Errc::InvalidArgument, "sample size must be positive");
  if (!(zero_fraction >= 0.0 && zero_fraction < 1.0)) throw Error(Errc::InvalidArgument, "zero fraction must be in [0,1)");
  if (base_design.columns() != static_cast<std::size_t>(truth.B.cols()))
    throw Error(Errc::SchemaMismatch, "base design does not match the model");
  const std::size_t D = truth.D();

  std::vector<std::size_t> picks(n);
  for (auto& r : picks) r = static_cast<std::size_t>(rng.below(base_design.rows()));
  CovariateMatrix X = base_design.select_rows(picks);

  std::vector<std::size_t> allowed;
  for (std::size_t j = 0; j < D; ++j)
    if (truth.p_hat.size() == static_cast<Eigen::Index>(D) && truth.p_hat(static_cast<Eigen::Index>(j)) < 1.0)
      allowed.push_back(j);
  if (allowed.empty()) {
    allowed.resize(D);
    std::iota(allowed.begin(), allowed.end(), std::size_t{0});
  }

  const auto zero_rows = static_cast<std::size_t>(std::llround(zero_fraction * static_cast<double>(n)));
  if (zero_rows > 0 && D < 3) throw Error(Errc::InvalidArgument, "imposing zeros needs at least three components");

  ZeroPattern pattern;
  pattern.u = Eigen::MatrixXi::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(D));
  std::vector<std::size_t> full(D);
  std::iota(full.begin(), full.end(), std::size_t{0});
  pattern.nonzero_sets.assign(n, full);

  // Partial Fisher-Yates to choose the zero rows.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = 0; k < zero_rows; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(order[k], order[pick]);
    const std::size_t row = order[k];
    const std::size_t comp = allowed[static_cast<std::size_t>(rng.below(allowed.size()))];
    pattern.u(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(comp)) = 0;
    auto& C = pattern.nonzero_sets[row];
    C.erase(std::find(C.begin(), C.end(), comp));
  }

  CompositionDataset ds = simulate_responses(truth, X, pattern, rng);
  return {std::move(ds), std::move(X)};
}

SimulationReport run_simulation_study(const ZadrModel& truth, const CovariateMatrix& base_design,
                                      const std::vector<std::size_t>& sizes, std::size_t reps, double zero_fraction,
                                      std::uint64_t seed, const FitOptions& opts) {
  if (reps < 1) throw Error(Errc::InvalidArgument, "reps must be >= 1");
  if (sizes.empty()) throw Error(Errc::InvalidArgument, "at least one sample size is required");
  truth.validate();
  const Eigen::VectorXd target = truth.parameters();
  const auto P = static_cast<std::size_t>(target.size());

  const std::size_t units = sizes.size() * reps;
  std::vector<Eigen::VectorXd> sq_err(units);
  parallel_for(units, [&](std::size_t u) {
    const std::size_t s = u / reps;
    const std::size_t r = u % reps;
    const std::uint64_t unit_seed = derive_seed(derive_seed(seed, sizes[s]), r);
    Rng rng(unit_seed);
    FitOptions unit_opts = opts;
    unit_opts.random_seed = unit_seed;
    unit_opts.zero_mode = truth.zero_mode;
    try {
      auto [ds, X] = simulate_dataset(truth, base_design, sizes[s], zero_fraction, rng);
      const FitPair pair = fit(ds, X, truth.link, unit_opts);
      if (!pair.final.converged) return;
      sq_err[u] = (pair.final.parameters() - target).cwiseAbs2();
    } catch (const Error&) {
      // failed replicate
    }
  });

  SimulationReport report;
  report.sizes = sizes;
  report.parameter_names = truth.parameter_names();
  report.reps = reps;
  report.zero_fraction = zero_fraction;
  report.seed = seed;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
    std::size_t ok = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& e = sq_err[s * reps + r];
      if (e.size() == 0) continue;
      sum += e;
      ++ok;
    }
    for (std::size_t k = 0; k < P; ++k) {
      const double mse = ok > 0 ? sum(static_cast<Eigen::Index>(k)) / static_cast<double>(ok)
                                : std::numeric_limits<double>::quiet_NaN();
      report.cells.push_back(SimulationCell{sizes[s], report.parameter_names[k], mse, ok});
    }
  }
  return report;
}

void write_simulation_csv(const SimulationReport& report, std::ostream& out) {
  out << "n,parameter,MSE,successes\n";
  for (const auto& c : report.cells)
    out << c.n << ',' << csv_quote(c.parameter) << ',' << format_real(c.mse) << ',' << c.successes << '\n';
}

}  // namespace zadr
