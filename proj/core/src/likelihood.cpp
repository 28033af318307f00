#include "zadr/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zadr/error.hpp"
#include "zadr/numerics.hpp"

namespace zadr {

using numerics::digamma_fn;
using numerics::lgamma_fn;

std::string_view to_string(ModelKind kind) noexcept { return kind == ModelKind::Simple ? "simple" : "mixed"; }

std::string_view to_string(ZeroMode mode) noexcept {
  return mode == ZeroMode::AsWritten ? "as-written" : "renormalized";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "simple") return ModelKind::Simple;
  if (s == "mixed") return ModelKind::Mixed;
  throw Error(Errc::InvalidArgument, "unknown model kind '" + std::string(s) + "'");
}

ZeroMode parse_zero_mode(std::string_view s) {
  if (s == "as-written") return ZeroMode::AsWritten;
  if (s == "renormalized") return ZeroMode::Renormalized;
  throw Error(Errc::InvalidArgument, "unknown zero mode '" + std::string(s) + "'");
}

Eigen::VectorXd ParamLayout::pack(const Eigen::MatrixXd& B, const Eigen::VectorXd& precision) const {
  if (static_cast<std::size_t>(B.rows()) != d || static_cast<std::size_t>(B.cols()) != cols ||
      static_cast<std::size_t>(precision.size()) != precision_count())
    throw Error(Errc::ShapeMismatch, "parameter blocks do not match the layout");
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < B.rows(); ++r)
    for (Eigen::Index c = 0; c < B.cols(); ++c) out(k++) = B(r, c);
  out.tail(precision.size()) = precision;
  return out;
}

Eigen::MatrixXd ParamLayout::unpack_B(const Eigen::VectorXd& params) const {
  if (static_cast<std::size_t>(params.size()) != size()) throw Error(Errc::ShapeMismatch, "parameter vector length");
  Eigen::MatrixXd B(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(cols));
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < B.rows(); ++r)
    for (Eigen::Index c = 0; c < B.cols(); ++c) B(r, c) = params(k++);
  return B;
}

Eigen::VectorXd ParamLayout::unpack_precision(const Eigen::VectorXd& params) const {
  if (static_cast<std::size_t>(params.size()) != size()) throw Error(Errc::ShapeMismatch, "parameter vector length");
  return params.tail(static_cast<Eigen::Index>(precision_count()));
}

namespace {

double clamp_lp(double v) { return std::clamp(v, -kLinearPredictorClamp, kLinearPredictorClamp); }

void check_dims(const Eigen::MatrixXd& B, const CompositionDataset& ds, const CovariateMatrix& X,
                const LinkSpec& link) {
  check_paired(ds, X);
  if (static_cast<std::size_t>(B.rows()) + 1 != ds.components() || static_cast<std::size_t>(B.cols()) != X.columns())
    throw Error(Errc::ShapeMismatch, "coefficient matrix must be (D-1) x (p+1)");
  if (link.ref_index >= ds.components()) throw Error(Errc::InvalidArgument, "reference index out of range");
}

// Fills `a` with the softmax and `in_range` with whether each non-reference
// predictor was left unclamped (clamped predictors carry no gradient).
void softmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& x, const Eigen::MatrixXd& B, std::size_t ref,
                 Eigen::VectorXd& a, std::vector<bool>* in_range) {
  const Eigen::Index D = B.rows() + 1;
  a.resize(D);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < D; ++i) {
    if (static_cast<std::size_t>(i) == ref) {
      a(i) = 0.0;
      continue;
    }
    const double lp = x.dot(B.row(k));
    if (in_range) (*in_range)[static_cast<std::size_t>(k)] = std::abs(lp) < kLinearPredictorClamp;
    a(i) = clamp_lp(lp);
    ++k;
  }
  const double top = a.maxCoeff();
  a = (a.array() - top).exp();
  a /= a.sum();
}

double evaluate(const LikelihoodProblem& pb, const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
  const ParamLayout layout = pb.layout();
  const Eigen::MatrixXd B = layout.unpack_B(params);
  const Eigen::VectorXd precision = layout.unpack_precision(params);
  check_dims(B, pb.ds, pb.X, pb.link);
  const bool mixed = pb.link.model_kind == ModelKind::Mixed;
  const bool adjusted = pb.zp != nullptr;
  if (adjusted && pb.zp->nonzero_sets.size() != pb.ds.rows())
    throw Error(Errc::ShapeMismatch, "zero pattern does not match the dataset");
  const bool renormalized = adjusted && pb.zero_mode == ZeroMode::Renormalized;

  const auto& Y = pb.ds.values();
  const auto& design = pb.X.design();
  const auto D = static_cast<Eigen::Index>(pb.ds.components());
  const auto ref = pb.link.ref_index;

  if (grad) grad->setZero(static_cast<Eigen::Index>(layout.size()));

  std::vector<std::size_t> full(static_cast<std::size_t>(D));
  for (std::size_t i = 0; i < full.size(); ++i) full[i] = i;

  Eigen::VectorXd a;
  Eigen::VectorXd g(D);
  std::vector<bool> in_range(layout.d);
  double total = 0.0;

  for (Eigen::Index j = 0; j < Y.rows(); ++j) {
    const auto x = design.row(j);
    softmax_row(x, B, ref, a, grad ? &in_range : nullptr);

    double phi;
    double dphi_dlp = 0.0;
    if (mixed) {
      const double lp = x.dot(precision);
      phi = std::exp(clamp_lp(lp));
      dphi_dlp = std::abs(lp) < kLinearPredictorClamp ? phi : 0.0;
    } else {
      phi = precision(0);
    }
    if (!(phi > 0.0) || !std::isfinite(phi)) throw Error(Errc::DomainError, "precision must be positive and finite");

    const std::vector<std::size_t>& C = adjusted ? pb.zp->nonzero_sets[static_cast<std::size_t>(j)] : full;
    if (!adjusted && !(Y.row(j).array() > 0.0).all())
      throw Error(Errc::DomainError, "row " + std::to_string(j + 1) + " has a zero; use the zero-adjusted likelihood");

    double support_mean = 0.0;
    double row = 0.0;
    double dphi = 0.0;
    g.setZero();
    for (std::size_t i : C) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double ai = phi * a(ii);
      const double log_y = std::log(Y(j, ii));
      support_mean += a(ii);
      row += (ai - 1.0) * log_y - lgamma_fn(ai);
      if (grad) {
        const double w = log_y - digamma_fn(ai);
        g(ii) = phi * w;
        dphi += a(ii) * w;
      }
    }
    if (renormalized) {
      if (C.size() == full.size()) support_mean = 1.0;
      const double s = phi * support_mean;
      row += lgamma_fn(s);
      if (grad) {
        const double psi = digamma_fn(s);
        for (std::size_t i : C) g(static_cast<Eigen::Index>(i)) += phi * psi;
        dphi += support_mean * psi;
      }
    } else {
      row += lgamma_fn(phi);
      if (grad) dphi += digamma_fn(phi);
    }
    total += row;

    if (grad) {
      const double centre = g.dot(a);
      Eigen::Index k = 0;
      for (Eigen::Index i = 0; i < D; ++i) {
        if (static_cast<std::size_t>(i) == ref) continue;
        if (in_range[static_cast<std::size_t>(k)]) {
          const double deta = a(i) * (g(i) - centre);
          grad->segment(k * static_cast<Eigen::Index>(layout.cols), static_cast<Eigen::Index>(layout.cols)) +=
              deta * x.transpose();
        }
        ++k;
      }
      const auto pc = static_cast<Eigen::Index>(layout.coefficient_count());
      if (mixed)
        grad->segment(pc, static_cast<Eigen::Index>(layout.cols)) += dphi * dphi_dlp * x.transpose();
      else
        (*grad)(pc) += dphi;
    }
  }

  if (adjusted) {
    if (pb.p.size() != D) throw Error(Errc::ShapeMismatch, "zero probability vector length");
    for (Eigen::Index j = 0; j < Y.rows(); ++j) total += binary_log_prob(pb.zp->u.row(j), pb.p);
  }
  return total;
}

}  // namespace

Eigen::VectorXd link_alpha(const Eigen::Ref<const Eigen::RowVectorXd>& x_row, const Eigen::MatrixXd& B,
                           std::size_t ref_index) {
  if (x_row.size() != B.cols()) throw Error(Errc::ShapeMismatch, "covariate row does not match coefficients");
  if (ref_index > static_cast<std::size_t>(B.rows())) throw Error(Errc::InvalidArgument, "reference index out of range");
  Eigen::VectorXd a;
  softmax_row(x_row, B, ref_index, a, nullptr);
  return a;
}

double link_phi(const Eigen::Ref<const Eigen::RowVectorXd>& x_row, const Eigen::VectorXd& gamma) {
  if (x_row.size() != gamma.size()) throw Error(Errc::ShapeMismatch, "covariate row does not match gamma");
  return std::exp(clamp_lp(x_row.dot(gamma)));
}

double binary_log_prob(const Eigen::Ref<const Eigen::RowVectorXi>& u_row, const Eigen::VectorXd& p) {
  if (u_row.size() != p.size()) throw Error(Errc::ShapeMismatch, "pattern and probability lengths differ");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double out = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double pj = p(j);
    if (!(pj >= 0.0 && pj <= 1.0)) throw Error(Errc::DomainError, "probabilities must lie in [0, 1]");
    if (u_row(j) == 1) {
      if (pj == 0.0) return kNegInf;
      if (pj < 1.0) out += std::log(pj);
    } else if (u_row(j) == 0) {
      if (pj == 1.0) return kNegInf;
      if (pj > 0.0) out += std::log1p(-pj);
    } else {
      throw Error(Errc::DomainError, "pattern entries must be 0 or 1");
    }
  }
  return out;
}

ParamLayout LikelihoodProblem::layout() const {
  if (ds.components() < 2) throw Error(Errc::InvalidArgument, "need at least two components");
  return ParamLayout{ds.components() - 1, X.columns(), link.model_kind};
}

double LikelihoodProblem::loglik(const Eigen::VectorXd& params) const { return evaluate(*this, params, nullptr); }

double LikelihoodProblem::loglik(const Eigen::VectorXd& params, Eigen::VectorXd& gradient) const {
  return evaluate(*this, params, &gradient);
}

double loglik_simple(const Eigen::MatrixXd& B, double phi, const CompositionDataset& ds, const CovariateMatrix& X,
                     const LinkSpec& link) {
  LikelihoodProblem pb{ds, X, {link.ref_index, ModelKind::Simple}, nullptr, {}};
  return pb.loglik(pb.layout().pack(B, Eigen::VectorXd::Constant(1, phi)));
}

double loglik_mixed(const Eigen::MatrixXd& B, const Eigen::VectorXd& gamma, const CompositionDataset& ds,
                    const CovariateMatrix& X, const LinkSpec& link) {
  LikelihoodProblem pb{ds, X, {link.ref_index, ModelKind::Mixed}, nullptr, {}};
  return pb.loglik(pb.layout().pack(B, gamma));
}

double loglik_zadr_simple(const Eigen::MatrixXd& B, double phi, const Eigen::VectorXd& p, const CompositionDataset& ds,
                          const CovariateMatrix& X, const ZeroPattern& zp, const LinkSpec& link, ZeroMode zero_mode) {
  LikelihoodProblem pb{ds, X, {link.ref_index, ModelKind::Simple}, &zp, p, zero_mode};
  return pb.loglik(pb.layout().pack(B, Eigen::VectorXd::Constant(1, phi)));
}

double loglik_zadr_mixed(const Eigen::MatrixXd& B, const Eigen::VectorXd& gamma, const Eigen::VectorXd& p,
                         const CompositionDataset& ds, const CovariateMatrix& X, const ZeroPattern& zp,
                         const LinkSpec& link, ZeroMode zero_mode) {
  LikelihoodProblem pb{ds, X, {link.ref_index, ModelKind::Mixed}, &zp, p, zero_mode};
  return pb.loglik(pb.layout().pack(B, gamma));
}

Eigen::VectorXd analytic_gradient(const Eigen::VectorXd& params, const CompositionDataset& ds,
                                  const CovariateMatrix& X, const ZeroPattern* zp, const LinkSpec& link,
                                  ZeroMode zero_mode) {
  // The binary term is constant in the free parameters, so any valid p works.
  const Eigen::VectorXd p = zp ? estimate_p(*zp) : Eigen::VectorXd();
  LikelihoodProblem pb{ds, X, link, zp, p, zero_mode};
  Eigen::VectorXd g;
  pb.loglik(params, g);
  return g;
}

}  // namespace zadr
