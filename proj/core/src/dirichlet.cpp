#include "zadr/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "zadr/error.hpp"
#include "zadr/numerics.hpp"

namespace zadr::dirichlet {

using numerics::lgamma_fn;

void DirichletParams::validate() const {
  if (!(phi > 0.0) || !std::isfinite(phi)) throw Error(Errc::DomainError, "precision must be positive");
  if (a_star.size() < 2) throw Error(Errc::DomainError, "need at least two components");
  if (!(a_star.array() > 0.0).all() || !a_star.allFinite())
    throw Error(Errc::DomainError, "mean parameters must be positive");
  if (std::abs(a_star.sum() - 1.0) > 1e-12) throw Error(Errc::DomainError, "mean parameters must sum to one");
}

double log_density(std::span<const double> y, const DirichletParams& params) {
  params.validate();
  if (y.size() != static_cast<std::size_t>(params.a_star.size()))
    throw Error(Errc::ShapeMismatch, "composition and parameter lengths differ");
  double out = lgamma_fn(params.phi);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw Error(Errc::DomainError, "Dirichlet density needs strictly positive parts");
    const double a = params.phi * params.a_star(static_cast<Eigen::Index>(i));
    out += (a - 1.0) * std::log(y[i]) - lgamma_fn(a);
  }
  return out;
}

double subcomposition_log_density(std::span<const double> y, const DirichletParams& params,
                                  std::span<const std::size_t> C, ZeroMode mode) {
  params.validate();
  const auto D = static_cast<std::size_t>(params.a_star.size());
  if (y.size() != D) throw Error(Errc::ShapeMismatch, "composition and parameter lengths differ");
  if (C.size() < 2) throw Error(Errc::DomainError, "sub-composition needs at least two parts");
  std::vector<bool> in_support(D, false);
  double support_mean = 0.0;
  double out = 0.0;
  for (std::size_t i : C) {
    if (i >= D || in_support[i]) throw Error(Errc::DomainError, "invalid support index set");
    in_support[i] = true;
    if (!(y[i] > 0.0)) throw Error(Errc::DomainError, "support component is not positive");
    const double a_star = params.a_star(static_cast<Eigen::Index>(i));
    const double a = params.phi * a_star;
    support_mean += a_star;
    out += (a - 1.0) * std::log(y[i]) - lgamma_fn(a);
  }
  for (std::size_t i = 0; i < D; ++i)
    if (!in_support[i] && y[i] != 0.0) throw Error(Errc::DomainError, "component outside the support is not zero");
  out += mode == ZeroMode::AsWritten ? lgamma_fn(params.phi) : lgamma_fn(params.phi * support_mean);
  return out;
}

namespace {

// Normalizes log-gamma variates into a composition, keeping every part positive.
void normalize_logs(Eigen::Ref<Eigen::VectorXd> logs) {
  const double top = logs.maxCoeff();
  for (Eigen::Index i = 0; i < logs.size(); ++i)
    logs(i) = std::max(std::exp(logs(i) - top), std::numeric_limits<double>::min());
  logs /= logs.sum();
}

}  // namespace

Eigen::VectorXd sample_subcomposition(const DirichletParams& params, std::span<const std::size_t> C, Rng& rng) {
  if (C.size() < 2) throw Error(Errc::DomainError, "sub-composition needs at least two parts");
  Eigen::VectorXd logs(static_cast<Eigen::Index>(C.size()));
  for (std::size_t k = 0; k < C.size(); ++k)
    logs(static_cast<Eigen::Index>(k)) = rng.log_gamma_variate(params.phi * params.a_star(static_cast<Eigen::Index>(C[k])));
  normalize_logs(logs);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(params.a_star.size());
  for (std::size_t k = 0; k < C.size(); ++k) y(static_cast<Eigen::Index>(C[k])) = logs(static_cast<Eigen::Index>(k));
  return y;
}

Eigen::MatrixXd sample(const DirichletParams& params, std::size_t count, std::uint64_t seed) {
  params.validate();
  if (count == 0) throw Error(Errc::InvalidArgument, "sample count must be >= 1");
  const Eigen::Index D = params.a_star.size();
  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), D);
  Eigen::VectorXd logs(D);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index i = 0; i < D; ++i) logs(i) = rng.log_gamma_variate(params.phi * params.a_star(i));
    normalize_logs(logs);
    out.row(r) = logs.transpose();
  }
  return out;
}

}  // namespace zadr::dirichlet
