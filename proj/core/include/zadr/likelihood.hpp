#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

#include "zadr/compositions.hpp"
#include "zadr/dirichlet.hpp"

namespace zadr {

using dirichlet::ZeroMode;

enum class ModelKind { Simple, Mixed };

std::string_view to_string(ModelKind kind) noexcept;
std::string_view to_string(ZeroMode mode) noexcept;
ModelKind parse_model_kind(std::string_view s);
ZeroMode parse_zero_mode(std::string_view s);

struct LinkSpec {
  std::size_t ref_index = 0;  // 0-based reference component
  ModelKind model_kind = ModelKind::Simple;
};

/// Linear predictors are clamped to this magnitude before exponentiation.
inline constexpr double kLinearPredictorClamp = 700.0;

/// Free-parameter layout shared by every likelihood, the covariance matrices
/// and the diagnostic: vec(B) component by component (beta_1, ..., beta_d, each
/// of length p+1), followed by phi (Simple) or gamma (Mixed, length p+1).
struct ParamLayout {
  std::size_t d = 0;     // non-reference components
  std::size_t cols = 0;  // p + 1
  ModelKind kind = ModelKind::Simple;

  std::size_t coefficient_count() const noexcept { return d * cols; }
  std::size_t precision_count() const noexcept { return kind == ModelKind::Simple ? 1 : cols; }
  std::size_t size() const noexcept { return coefficient_count() + precision_count(); }

  Eigen::VectorXd pack(const Eigen::MatrixXd& B, const Eigen::VectorXd& precision) const;
  Eigen::MatrixXd unpack_B(const Eigen::VectorXd& params) const;
  Eigen::VectorXd unpack_precision(const Eigen::VectorXd& params) const;
};

/// Asymmetric softmax: the reference slot's linear predictor is fixed at zero,
/// row k of B (d x (p+1)) drives the k-th non-reference component.
Eigen::VectorXd link_alpha(const Eigen::Ref<const Eigen::RowVectorXd>& x_row, const Eigen::MatrixXd& B,
                           std::size_t ref_index);

/// exp(x^T gamma) with the linear predictor clamped to +-700.
double link_phi(const Eigen::Ref<const Eigen::RowVectorXd>& x_row, const Eigen::VectorXd& gamma);

/// log b(u | p) for independent Bernoulli nonzero indicators, with
/// 0 log 0 = 0. Impossible patterns give -infinity.
double binary_log_prob(const Eigen::Ref<const Eigen::RowVectorXi>& u_row, const Eigen::VectorXd& p);

// Plain Dirichlet regression log-likelihoods; `ds` must be zero-free.
double loglik_simple(const Eigen::MatrixXd& B, double phi, const CompositionDataset& ds, const CovariateMatrix& X,
                     const LinkSpec& link);
double loglik_mixed(const Eigen::MatrixXd& B, const Eigen::VectorXd& gamma, const CompositionDataset& ds,
                    const CovariateMatrix& X, const LinkSpec& link);

// Zero-adjusted log-likelihoods: sub-composition density on each row's
// positive set plus the binary zero-pattern term.
double loglik_zadr_simple(const Eigen::MatrixXd& B, double phi, const Eigen::VectorXd& p, const CompositionDataset& ds,
                          const CovariateMatrix& X, const ZeroPattern& zp, const LinkSpec& link,
                          ZeroMode zero_mode = ZeroMode::Renormalized);
double loglik_zadr_mixed(const Eigen::MatrixXd& B, const Eigen::VectorXd& gamma, const Eigen::VectorXd& p,
                         const CompositionDataset& ds, const CovariateMatrix& X, const ZeroPattern& zp,
                         const LinkSpec& link, ZeroMode zero_mode = ZeroMode::Renormalized);

/// Selects one of the four likelihoods over the packed parameter vector.
/// With `zp == nullptr` the plain likelihood of link.model_kind is used.
struct LikelihoodProblem {
  const CompositionDataset& ds;
  const CovariateMatrix& X;
  LinkSpec link;
  const ZeroPattern* zp = nullptr;
  Eigen::VectorXd p;  // only read when zp != nullptr
  ZeroMode zero_mode = ZeroMode::Renormalized;

  ParamLayout layout() const;
  double loglik(const Eigen::VectorXd& params) const;
  /// Value and gradient in one sweep.
  double loglik(const Eigen::VectorXd& params, Eigen::VectorXd& gradient) const;
};

/// Gradient of the selected log-likelihood w.r.t. the packed free parameters
/// (B then phi or gamma), chain-ruled through the softmax and exp links.
Eigen::VectorXd analytic_gradient(const Eigen::VectorXd& params, const CompositionDataset& ds,
                                  const CovariateMatrix& X, const ZeroPattern* zp, const LinkSpec& link,
                                  ZeroMode zero_mode = ZeroMode::Renormalized);

}  // namespace zadr
