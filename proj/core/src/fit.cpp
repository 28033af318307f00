#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zadr/error.hpp"
#include "zadr/model.hpp"
#include "zadr/random.hpp"

namespace zadr {

std::string_view to_string(FitStage stage) noexcept {
  return stage == FitStage::ZeroFreeInitial ? "zero-free-initial" : "final";
}

ParamLayout ZadrModel::layout() const noexcept {
  return ParamLayout{static_cast<std::size_t>(B.rows()), static_cast<std::size_t>(B.cols()), link.model_kind};
}

double ZadrModel::phi() const {
  if (link.model_kind != ModelKind::Simple || precision.size() != 1)
    throw Error(Errc::KindMismatch, "phi is only defined for the simple model");
  return precision(0);
}

const Eigen::VectorXd& ZadrModel::gamma() const {
  if (link.model_kind != ModelKind::Mixed) throw Error(Errc::KindMismatch, "gamma is only defined for the mixed model");
  return precision;
}

double ZadrModel::precision_at(const Eigen::Ref<const Eigen::RowVectorXd>& x_row) const {
  return link.model_kind == ModelKind::Simple ? phi() : link_phi(x_row, precision);
}

Eigen::VectorXd ZadrModel::parameters() const { return layout().pack(B, precision); }

std::vector<std::string> ZadrModel::non_reference_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < component_names.size(); ++i)
    if (i != link.ref_index) out.push_back(component_names[i]);
  return out;
}

std::vector<std::string> ZadrModel::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& comp : non_reference_names())
    for (const auto& cov : covariate_names) out.push_back(comp + ":" + cov);
  if (link.model_kind == ModelKind::Simple) {
    out.emplace_back("phi");
  } else {
    for (const auto& cov : covariate_names) out.push_back("gamma:" + cov);
  }
  return out;
}

Eigen::VectorXd ZadrModel::standard_errors() const {
  if (covariance.rows() != static_cast<Eigen::Index>(layout().size()))
    throw Error(Errc::ShapeMismatch, "covariance does not match the parameter count");
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

void ZadrModel::validate() const {
  const auto D = this->D();
  if (D < 2) throw Error(Errc::InvalidArgument, "model needs at least two components");
  if (component_names.size() != D) throw Error(Errc::SchemaMismatch, "component names do not match B");
  if (covariate_names.size() != static_cast<std::size_t>(B.cols()))
    throw Error(Errc::SchemaMismatch, "covariate names do not match B");
  if (link.ref_index >= D) throw Error(Errc::InvalidArgument, "reference index out of range");
  if (static_cast<std::size_t>(precision.size()) != layout().precision_count())
    throw Error(Errc::SchemaMismatch, "precision block has the wrong length");
  if (link.model_kind == ModelKind::Simple && !(precision(0) > 0.0))
    throw Error(Errc::DomainError, "phi must be positive");
  if (static_cast<std::size_t>(p_hat.size()) != D) throw Error(Errc::SchemaMismatch, "p_hat length");
  if (!((p_hat.array() >= 0.0) && (p_hat.array() <= 1.0)).all()) throw Error(Errc::DomainError, "p_hat outside [0,1]");
  if (covariance.size() != 0 &&
      (covariance.rows() != static_cast<Eigen::Index>(layout().size()) || covariance.cols() != covariance.rows()))
    throw Error(Errc::SchemaMismatch, "covariance has the wrong dimensions");
  if (!B.allFinite() || !precision.allFinite()) throw Error(Errc::DomainError, "non-finite parameters");
}

void FitOptions::validate() const {
  optimizer.validate();
  if (mixed_init == MixedInit::RandomNormal && !(mixed_init_scale > 0.0))
    throw Error(Errc::InvalidArgument, "mixed initialization scale must be positive");
}

Eigen::MatrixXd ols_init(const CompositionDataset& ds_zero_free, const CovariateMatrix& X_zero_free,
                         const LinkSpec& link) {
  check_paired(ds_zero_free, X_zero_free);
  if (ds_zero_free.rows() == 0) throw Error(Errc::NoZeroFreeRows, "no zero-free rows");
  if (ds_zero_free.rows() < X_zero_free.columns() + 1)
    throw Error(Errc::InsufficientRows, "least squares needs at least p+2 zero-free rows, got " +
                                            std::to_string(ds_zero_free.rows()));
  const Eigen::MatrixXd Z = alr(ds_zero_free, link.ref_index);
  const Eigen::MatrixXd& X = X_zero_free.design();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) throw Error(Errc::SingularDesign, "design matrix of zero-free rows is rank deficient");
  return qr.solve(Z).transpose();
}

numerics::SymmetricInverse covariance_at(const LikelihoodProblem& problem, const Eigen::VectorXd& params) {
  const numerics::Objective f = [&](const Eigen::VectorXd& v) {
    try {
      return problem.loglik(v);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const Eigen::MatrixXd H = numerics::numerical_hessian(f, params);
  return numerics::invert_symmetric(-H);
}

namespace {

// Beyond these a fit is treated as having run off to the boundary.
constexpr double kMaxLinearPredictor = 100.0;
constexpr double kMaxPrecision = 1e8;

bool diverged(const ParamLayout& layout, const Eigen::VectorXd& params, const CovariateMatrix& X) {
  if (!params.allFinite()) return true;
  const Eigen::MatrixXd eta = X.design() * layout.unpack_B(params).transpose();
  if (eta.size() > 0 && eta.cwiseAbs().maxCoeff() > kMaxLinearPredictor) return true;
  const Eigen::VectorXd prec = layout.unpack_precision(params);
  if (layout.kind == ModelKind::Simple) return !(prec(0) <= kMaxPrecision);
  const Eigen::VectorXd log_phi = X.design() * prec;
  return log_phi.maxCoeff() > std::log(kMaxPrecision);
}

// Method-of-moments precision from Var(y_i) = a_i (1 - a_i) / (phi + 1).
double moment_phi(const CompositionDataset& ds, const CovariateMatrix& X, const Eigen::MatrixXd& B, std::size_t ref) {
  double spread = 0.0;
  double resid = 0.0;
  for (Eigen::Index j = 0; j < ds.values().rows(); ++j) {
    const Eigen::VectorXd a = link_alpha(X.design().row(j), B, ref);
    spread += (a.array() * (1.0 - a.array())).sum();
    resid += (ds.values().row(j).transpose() - a).squaredNorm();
  }
  if (!(resid > 0.0)) return 100.0;
  return std::clamp(spread / resid - 1.0, 0.1, 1e6);
}

struct StageResult {
  Eigen::VectorXd params;  // natural scale
  double loglik = 0.0;
  numerics::OptimResult optim;
};

// Maximizes problem.loglik. The simple model's phi is optimized on the log
// scale; everything reported back is on the natural scale.
StageResult maximize(const LikelihoodProblem& problem, const Eigen::VectorXd& start, const FitOptions& opts) {
  const ParamLayout layout = problem.layout();
  const bool log_phi = layout.kind == ModelKind::Simple;
  const Eigen::Index last = static_cast<Eigen::Index>(layout.size()) - 1;

  auto natural = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd v = u;
    if (log_phi) v(last) = std::exp(std::clamp(u(last), -kLinearPredictorClamp, kLinearPredictorClamp));
    return v;
  };

  const numerics::Objective objective = [&](const Eigen::VectorXd& u) {
    try {
      return -problem.loglik(natural(u));
    } catch (const Error& e) {
      if (e.code() == Errc::DomainError) return std::numeric_limits<double>::infinity();
      throw;
    }
  };
  const numerics::GradientFn gradient = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd v = natural(u);
    Eigen::VectorXd g;
    problem.loglik(v, g);
    if (log_phi) g(last) *= v(last);
    return Eigen::VectorXd(-g);
  };

  Eigen::VectorXd u0 = start;
  if (log_phi) u0(last) = std::log(start(last));
  StageResult out;
  out.optim = numerics::minimize(objective, gradient, u0, opts.optimizer);
  out.params = natural(out.optim.argmin);
  out.loglik = -out.optim.value;
  return out;
}

ZadrModel make_model(const CompositionDataset& ds, const CovariateMatrix& X, const LinkSpec& link,
                     const FitOptions& opts, const LikelihoodProblem& problem, const StageResult& stage,
                     FitStage which, Eigen::VectorXd p_hat) {
  const ParamLayout layout = problem.layout();
  ZadrModel m;
  m.link = link;
  m.component_names = ds.component_names();
  m.covariate_names = X.covariate_names();
  m.B = layout.unpack_B(stage.params);
  m.precision = layout.unpack_precision(stage.params);
  m.p_hat = std::move(p_hat);
  m.loglik = stage.loglik;
  m.converged = stage.optim.converged && std::isfinite(stage.loglik) && !diverged(layout, stage.params, X);
  try {
    const auto cov = covariance_at(problem, stage.params);
    m.covariance = cov.inverse;
    m.covariance_pseudo_inverse = cov.pseudo;
  } catch (const Error&) {
    if (m.converged) throw;
    const auto k = static_cast<Eigen::Index>(layout.size());
    m.covariance = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
  }
  m.iterations = stage.optim.iterations;
  m.stage = which;
  m.zero_mode = opts.zero_mode;
  m.seed = opts.random_seed;
  m.training_design = X.design();
  return m;
}

}  // namespace

FitPair fit(const CompositionDataset& ds, const CovariateMatrix& X, const LinkSpec& link, const FitOptions& opts) {
  opts.validate();
  check_paired(ds, X);
  if (link.ref_index >= ds.components()) throw Error(Errc::InvalidArgument, "reference index out of range");

  const std::vector<std::size_t> clean = zero_free_rows(ds);
  if (clean.empty()) throw Error(Errc::NoZeroFreeRows, "every row contains a zero");
  const CompositionDataset ds_clean = ds.select_rows(clean);
  const CovariateMatrix X_clean = X.select_rows(clean);

  // Steps 1-2: alr + least squares.
  const Eigen::MatrixXd B0 = ols_init(ds_clean, X_clean, link);

  Eigen::VectorXd precision0;
  const double phi0 = moment_phi(ds_clean, X_clean, B0, link.ref_index);
  if (link.model_kind == ModelKind::Simple) {
    precision0 = Eigen::VectorXd::Constant(1, phi0);
  } else {
    precision0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(X.columns()));
    if (opts.mixed_init == MixedInit::RandomNormal) {
      Rng rng(opts.random_seed);
      precision0(0) = std::log(phi0);
      for (Eigen::Index k = 1; k < precision0.size(); ++k) precision0(k) = opts.mixed_init_scale * rng.normal();
    }
  }

  // Step 3: plain Dirichlet likelihood on zero-free rows.
  const LikelihoodProblem clean_problem{ds_clean, X_clean, link, nullptr, {}};
  const Eigen::VectorXd start = clean_problem.layout().pack(B0, precision0);
  const StageResult initial = maximize(clean_problem, start, opts);

  // Step 4: zero-adjusted likelihood on all rows, p held at its closed form.
  const ZeroPattern zp = zero_pattern(ds);
  const Eigen::VectorXd p_hat = estimate_p(zp);
  const LikelihoodProblem full_problem{ds, X, link, &zp, p_hat, opts.zero_mode};
  const StageResult final_stage = maximize(full_problem, initial.params, opts);

  FitPair out{
      make_model(ds_clean, X_clean, link, opts, clean_problem, initial, FitStage::ZeroFreeInitial,
                 Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ds.components()))),
      make_model(ds, X, link, opts, full_problem, final_stage, FitStage::Final, p_hat),
  };
  out.initial.training_design = X.design();
  return out;
}

CompositionDataset fitted_values(const ZadrModel& model, const CovariateMatrix& X) {
  if (X.columns() != static_cast<std::size_t>(model.B.cols()))
    throw Error(Errc::SchemaMismatch, "design columns do not match the model");
  Eigen::MatrixXd out(X.design().rows(), static_cast<Eigen::Index>(model.D()));
  for (Eigen::Index j = 0; j < out.rows(); ++j)
    out.row(j) = link_alpha(X.design().row(j), model.B, model.link.ref_index).transpose();
  return load_dataset(out, model.component_names, 1e-8);
}

}  // namespace zadr
