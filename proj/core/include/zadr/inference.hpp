#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zadr/compositions.hpp"
#include "zadr/model.hpp"
#include "zadr/random.hpp"

namespace zadr {

/// Quadratic-form comparison of the zero-free and the zero-adjusted estimates.
struct DiagnosticResult {
  double T = 0.0;
  Eigen::VectorXd delta;                // [theta, vec(B_ini - B_final)]
  std::vector<std::string> delta_names;
  Eigen::MatrixXd sigma2;               // V_ini + V_final, in delta's order
  bool pseudo_inverse = false;          // sigma2 was ill-conditioned
  std::optional<double> pvalue;
  std::size_t B_reps = 0;
  std::size_t failures = 0;
  std::uint64_t seed = 0;
};

DiagnosticResult diagnostic_T(const ZadrModel& initial, const ZadrModel& final);

struct BootstrapResult {
  std::vector<double> replicate_stats;  // T per replicate; NaN for failures
  Eigen::MatrixXd replicate_params;     // bias mode: B x parameters; NaN rows for failures
  Eigen::VectorXd bias;                 // bias mode only
  Eigen::VectorXd bias_se;              // replicate standard deviation, bias mode only
  double pvalue = 1.0;
  double t_observed = 0.0;
  std::size_t B = 0;          // requested replicates
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::uint64_t master_seed = 0;
};

inline constexpr std::size_t kMinBootstrapReplicates = 19;

/// (#{T_b >= T_obs} + 1) / (B + 1) over the finite entries of `stats`.
double bootstrap_pvalue_from(std::span<const double> stats, double t_observed);

/// Draws a response matrix from `model` at the rows of X that reproduces the
/// given zero pattern exactly: zero-free rows come from the full Dirichlet,
/// the others from the sub-Dirichlet on their positive set.
CompositionDataset simulate_responses(const ZadrModel& model, const CovariateMatrix& X, const ZeroPattern& pattern,
                                      Rng& rng, const std::vector<std::string>& row_ids = {});

/// Parametric bootstrap calibration of the diagnostic. Each replicate is
/// regenerated from `final`, refitted through the full pipeline, and scored.
/// Non-converged replicates are dropped from both the count and B.
BootstrapResult bootstrap_pvalue(const ZadrModel& final, double t_observed, const CompositionDataset& ds,
                                 const CovariateMatrix& X, std::size_t B, std::uint64_t seed,
                                 const FitOptions& opts = {});

/// Same replicate mechanism; bias = mean(replicate estimates) - final estimates.
BootstrapResult bootstrap_bias(const ZadrModel& final, const CompositionDataset& ds, const CovariateMatrix& X,
                               std::size_t B, std::uint64_t seed, const FitOptions& opts = {});

struct LrtResult {
  double stat = 0.0;
  int df = 0;
  double pvalue = 1.0;
};

/// Likelihood-ratio test of the simple (constant precision) model nested in
/// the mixed one.
LrtResult lrt(const ZadrModel& simple, const ZadrModel& mixed);
LrtResult lrt_from_logliks(double loglik_simple, double loglik_mixed, int df);

struct FitMetrics {
  double kl = 0.0;
  double l2 = 0.0;
};

FitMetrics fit_metrics(const CompositionDataset& observed, const CompositionDataset& fitted);
/// Matrix form; rows need not be valid compositions.
FitMetrics fit_metrics(const Eigen::MatrixXd& observed, const Eigen::MatrixXd& fitted);

}  // namespace zadr
