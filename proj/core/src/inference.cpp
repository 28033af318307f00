#include "zadr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "zadr/error.hpp"
#include "zadr/parallel.hpp"

namespace zadr {

DiagnosticResult diagnostic_T(const ZadrModel& initial, const ZadrModel& final) {
  if (initial.link.model_kind != final.link.model_kind)
    throw Error(Errc::KindMismatch, "diagnostic needs two models of the same kind");
  if (initial.link.ref_index != final.link.ref_index || initial.B.rows() != final.B.rows() ||
      initial.B.cols() != final.B.cols())
    throw Error(Errc::ShapeMismatch, "models do not share a parameter layout");
  const ParamLayout layout = final.layout();
  const auto n = static_cast<Eigen::Index>(layout.size());
  if (initial.covariance.rows() != n || final.covariance.rows() != n)
    throw Error(Errc::ShapeMismatch, "covariance matrices do not match the parameter layout");

  // Reorder from [vec(B), precision] to [precision, vec(B)].
  const auto pc = static_cast<Eigen::Index>(layout.coefficient_count());
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = pc; i < n; ++i) order.push_back(i);
  for (Eigen::Index i = 0; i < pc; ++i) order.push_back(i);

  const Eigen::VectorXd diff = initial.parameters() - final.parameters();
  const Eigen::MatrixXd sum = initial.covariance + final.covariance;
  const std::vector<std::string> names = final.parameter_names();

  DiagnosticResult out;
  out.delta.resize(n);
  out.sigma2.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    out.delta(a) = diff(order[static_cast<std::size_t>(a)]);
    out.delta_names.push_back(names[static_cast<std::size_t>(order[static_cast<std::size_t>(a)])]);
    for (Eigen::Index b = 0; b < n; ++b)
      out.sigma2(a, b) = sum(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
  }
  const auto inv = numerics::invert_symmetric(out.sigma2);
  out.pseudo_inverse = inv.pseudo;
  out.T = out.delta.dot(inv.inverse * out.delta);
  return out;
}

double bootstrap_pvalue_from(std::span<const double> stats, double t_observed) {
  std::size_t valid = 0;
  std::size_t exceed = 0;
  for (double t : stats) {
    if (!std::isfinite(t)) continue;
    ++valid;
    if (t >= t_observed) ++exceed;
  }
  return (static_cast<double>(exceed) + 1.0) / (static_cast<double>(valid) + 1.0);
}

CompositionDataset simulate_responses(const ZadrModel& model, const CovariateMatrix& X, const ZeroPattern& pattern,
                                      Rng& rng, const std::vector<std::string>& row_ids) {
  if (pattern.nonzero_sets.size() != X.rows()) throw Error(Errc::ShapeMismatch, "pattern rows differ from design rows");
  if (X.columns() != static_cast<std::size_t>(model.B.cols()))
    throw Error(Errc::SchemaMismatch, "design columns do not match the model");
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(X.rows()), static_cast<Eigen::Index>(model.D()));
  dirichlet::DirichletParams params;
  for (Eigen::Index j = 0; j < Y.rows(); ++j) {
    const auto x = X.design().row(j);
    params.a_star = link_alpha(x, model.B, model.link.ref_index);
    params.phi = model.precision_at(x);
    Y.row(j) = dirichlet::sample_subcomposition(params, pattern.nonzero_sets[static_cast<std::size_t>(j)], rng).transpose();
  }
  return load_dataset(Y, model.component_names, 1e-8, row_ids);
}

namespace {

struct Replicate {
  bool ok = false;
  double T = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd params;
};

std::vector<Replicate> run_replicates(const ZadrModel& final, const CompositionDataset& ds, const CovariateMatrix& X,
                                      std::size_t B, std::uint64_t seed, const FitOptions& opts, bool want_T) {
  if (B < kMinBootstrapReplicates)
    throw Error(Errc::InvalidArgument, "B must be >= " + std::to_string(kMinBootstrapReplicates));
  check_paired(ds, X);
  final.validate();
  const ZeroPattern pattern = zero_pattern(ds);
  std::vector<Replicate> reps(B);
  parallel_for(B, [&](std::size_t b) {
    const std::uint64_t rep_seed = derive_seed(seed, b);
    Rng rng(rep_seed);
    FitOptions rep_opts = opts;
    rep_opts.random_seed = rep_seed;
    rep_opts.zero_mode = final.zero_mode;
    try {
      const CompositionDataset sim = simulate_responses(final, X, pattern, rng, ds.row_ids());
      const FitPair pair = fit(sim, X, final.link, rep_opts);
      if (!pair.initial.converged || !pair.final.converged) return;
      Replicate r;
      if (want_T) {
        r.T = diagnostic_T(pair.initial, pair.final).T;
        if (!std::isfinite(r.T)) return;
      }
      r.params = pair.final.parameters();
      r.ok = true;
      reps[b] = std::move(r);
    } catch (const Error&) {
      // counted as a failed replicate
    }
  });
  return reps;
}

void require_successes(std::size_t successes) {
  if (successes < kMinBootstrapReplicates)
    throw Error(Errc::TooFewSuccessfulReplicates,
                "only " + std::to_string(successes) + " bootstrap replicates converged");
}

}  // namespace

BootstrapResult bootstrap_pvalue(const ZadrModel& final, double t_observed, const CompositionDataset& ds,
                                 const CovariateMatrix& X, std::size_t B, std::uint64_t seed, const FitOptions& opts) {
  const auto reps = run_replicates(final, ds, X, B, seed, opts, true);
  BootstrapResult out;
  out.B = B;
  out.master_seed = seed;
  out.t_observed = t_observed;
  out.replicate_stats.reserve(B);
  for (const auto& r : reps) {
    out.replicate_stats.push_back(r.ok ? r.T : std::numeric_limits<double>::quiet_NaN());
    if (r.ok) ++out.successes;
  }
  out.failures = B - out.successes;
  require_successes(out.successes);
  out.pvalue = bootstrap_pvalue_from(out.replicate_stats, t_observed);
  return out;
}

BootstrapResult bootstrap_bias(const ZadrModel& final, const CompositionDataset& ds, const CovariateMatrix& X,
                               std::size_t B, std::uint64_t seed, const FitOptions& opts) {
  const auto reps = run_replicates(final, ds, X, B, seed, opts, false);
  const Eigen::VectorXd truth = final.parameters();
  BootstrapResult out;
  out.B = B;
  out.master_seed = seed;
  out.replicate_params =
      Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(B), truth.size(), std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(truth.size());
  for (std::size_t b = 0; b < B; ++b) {
    if (!reps[b].ok) continue;
    out.replicate_params.row(static_cast<Eigen::Index>(b)) = reps[b].params.transpose();
    sum += reps[b].params;
    ++out.successes;
  }
  out.failures = B - out.successes;
  require_successes(out.successes);
  const double k = static_cast<double>(out.successes);
  const Eigen::VectorXd mean = sum / k;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(truth.size());
  for (std::size_t b = 0; b < B; ++b)
    if (reps[b].ok) ss += (reps[b].params - mean).cwiseAbs2();
  out.bias = mean - truth;
  out.bias_se = (ss / (k - 1.0)).cwiseSqrt();
  return out;
}

LrtResult lrt_from_logliks(double loglik_simple, double loglik_mixed, int df) {
  if (df < 1) throw Error(Errc::InvalidArgument, "likelihood-ratio test needs df >= 1");
  double stat = 2.0 * (loglik_mixed - loglik_simple);
  if (stat < -1e-6)
    throw Error(Errc::NegativeStat, "mixed log-likelihood is below the simple one (stat " + std::to_string(stat) +
                                        "); models are not nested or did not converge");
  stat = std::max(stat, 0.0);
  return LrtResult{stat, df, numerics::chi_square_upper_tail(stat, df)};
}

LrtResult lrt(const ZadrModel& simple, const ZadrModel& mixed) {
  if (simple.link.model_kind != ModelKind::Simple || mixed.link.model_kind != ModelKind::Mixed)
    throw Error(Errc::KindMismatch, "lrt expects a simple and a mixed model");
  if (simple.link.ref_index != mixed.link.ref_index || simple.B.rows() != mixed.B.rows() ||
      simple.B.cols() != mixed.B.cols())
    throw Error(Errc::ShapeMismatch, "models were not fitted to the same data layout");
  return lrt_from_logliks(simple.loglik, mixed.loglik, static_cast<int>(mixed.precision.size()) - 1);
}

FitMetrics fit_metrics(const CompositionDataset& observed, const CompositionDataset& fitted) {
  return fit_metrics(observed.values(), fitted.values());
}

FitMetrics fit_metrics(const Eigen::MatrixXd& y, const Eigen::MatrixXd& yhat) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols())
    throw Error(Errc::ShapeMismatch, "observed and fitted compositions differ in shape");
  FitMetrics m;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double diff = y(i, j) - yhat(i, j);
      m.l2 += diff * diff;
      if (y(i, j) > 0.0) {
        if (!(yhat(i, j) > 0.0)) throw Error(Errc::DomainError, "fitted value is zero where observed is positive");
        m.kl += y(i, j) * std::log(y(i, j) / yhat(i, j));
      }
    }
  }
  return m;
}

}  // namespace zadr
