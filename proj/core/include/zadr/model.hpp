#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zadr/compositions.hpp"
#include "zadr/likelihood.hpp"
#include "zadr/numerics.hpp"

namespace zadr {

enum class FitStage { ZeroFreeInitial, Final };

std::string_view to_string(FitStage stage) noexcept;

/// A fitted (or user-specified) zero-adjusted Dirichlet regression.
struct ZadrModel {
  LinkSpec link;
  std::vector<std::string> component_names;
  std::vector<std::string> covariate_names;  // includes the intercept

  Eigen::MatrixXd B;          // (D-1) x (p+1); the reference row is implicit zero
  Eigen::VectorXd precision;  // [phi] for Simple, gamma (p+1) for Mixed
  Eigen::VectorXd p_hat;      // per-component nonzero proportion

  /// Over the packed parameters (see ParamLayout), precision block on the
  /// natural scale (phi, not log phi).
  Eigen::MatrixXd covariance;
  bool covariance_pseudo_inverse = false;

  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  FitStage stage = FitStage::Final;
  ZeroMode zero_mode = ZeroMode::Renormalized;
  std::uint64_t seed = 0;

  /// Design the model was fitted on; used to resample covariates in
  /// simulations. May be empty.
  Eigen::MatrixXd training_design;

  std::size_t D() const noexcept { return static_cast<std::size_t>(B.rows()) + 1; }
  ParamLayout layout() const noexcept;
  double phi() const;                  // Simple only
  const Eigen::VectorXd& gamma() const;  // Mixed only
  /// Row-specific precision.
  double precision_at(const Eigen::Ref<const Eigen::RowVectorXd>& x_row) const;

  Eigen::VectorXd parameters() const;
  /// Names aligned with parameters(): "<component>:<covariate>", then "phi"
  /// or "gamma:<covariate>".
  std::vector<std::string> parameter_names() const;
  Eigen::VectorXd standard_errors() const;
  std::vector<std::string> non_reference_names() const;

  void validate() const;
};

enum class MixedInit { RandomNormal, Zeros };

struct FitOptions {
  numerics::OptimizerOptions optimizer{};
  ZeroMode zero_mode = ZeroMode::Renormalized;
  MixedInit mixed_init = MixedInit::RandomNormal;
  double mixed_init_scale = 0.1;
  std::uint64_t random_seed = 1;

  void validate() const;
};

struct FitPair {
  ZadrModel initial;  // zero-free rows, plain likelihood
  ZadrModel final;    // all rows, zero-adjusted likelihood
};

/// Least squares of alr-transformed responses on the design (the
/// log-ratio "Aitchison" regression). Rows must be zero-free. Returns
/// (D-1) x (p+1).
Eigen::MatrixXd ols_init(const CompositionDataset& ds_zero_free, const CovariateMatrix& X_zero_free,
                         const LinkSpec& link);

/// Four-stage fit: alr + least squares on zero-free rows, plain Dirichlet
/// maximum likelihood on those rows, then the zero-adjusted maximum
/// likelihood on all rows started from the zero-free estimates.
FitPair fit(const CompositionDataset& ds, const CovariateMatrix& X, const LinkSpec& link, const FitOptions& opts = {});

/// Dirichlet means at each design row.
CompositionDataset fitted_values(const ZadrModel& model, const CovariateMatrix& X);

/// Covariance from the negative numerical Hessian of `problem` at `params`.
numerics::SymmetricInverse covariance_at(const LikelihoodProblem& problem, const Eigen::VectorXd& params);

}  // namespace zadr
