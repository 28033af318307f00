#include "zadr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "zadr/error.hpp"

namespace zadr::numerics {

namespace {

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(Errc::DomainError, std::string(fn) + " requires a finite positive argument, got " + std::to_string(x));
}

using fast_policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double second_step(double xi) noexcept { return 1e-4 * std::max(1.0, std::abs(xi)); }

}  // namespace

double lgamma_fn(double x) {
  require_positive(x, "lgamma_fn");
  return boost::math::lgamma(x, fast_policy());
}

double digamma_fn(double x) {
  require_positive(x, "digamma_fn");
  return boost::math::digamma(x, fast_policy());
}

double trigamma_fn(double x) {
  require_positive(x, "trigamma_fn");
  return boost::math::trigamma(x, fast_policy());
}

double chi_square_upper_tail(double stat, int df) {
  if (df < 1) throw Error(Errc::DomainError, "chi-square needs df >= 1");
  if (std::isnan(stat)) throw Error(Errc::DomainError, "chi-square statistic is NaN");
  if (stat <= 0.0) return 1.0;
  if (std::isinf(stat)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * stat, fast_policy());
}

void OptimizerOptions::validate() const {
  if (max_iterations < 1) throw Error(Errc::InvalidArgument, "max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(function_tolerance > 0.0))
    throw Error(Errc::InvalidArgument, "optimizer tolerances must be positive");
}

std::string_view to_string(TerminationReason reason) noexcept {
  switch (reason) {
    case TerminationReason::GradientTol: return "GradientTol";
    case TerminationReason::StepTol: return "StepTol";
    case TerminationReason::FunctionTol: return "FunctionTol";
    case TerminationReason::MaxIter: return "MaxIter";
  }
  return "Unknown";
}

double gradient_step(double xi) noexcept { return std::max(1e-6, 1e-6 * std::abs(xi)); }

Eigen::VectorXd finite_diff_gradient(const Objective& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = gradient_step(x(i));
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    if (!std::isfinite(up) || !std::isfinite(down))
      throw Error(Errc::NonFiniteObjective, "objective not finite near the differencing point");
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd probe = x;
  auto eval = [&]() {
    const double v = f(probe);
    if (!std::isfinite(v)) throw Error(Errc::NonFiniteObjective, "objective not finite near the Hessian point");
    return v;
  };
  const double f0 = eval();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = second_step(x(i));
    probe(i) = x(i) + hi;
    const double up = eval();
    probe(i) = x(i) - hi;
    const double down = eval();
    probe(i) = x(i);
    H(i, i) = (up - 2.0 * f0 + down) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = second_step(x(j));
      probe(i) = x(i) + hi; probe(j) = x(j) + hj;
      const double pp = eval();
      probe(j) = x(j) - hj;
      const double pm = eval();
      probe(i) = x(i) - hi;
      const double mm = eval();
      probe(j) = x(j) + hj;
      const double mp = eval();
      probe(i) = x(i); probe(j) = x(j);
      H(i, j) = H(j, i) = (pp - pm - mp + mm) / (4.0 * hi * hj);
    }
  }
  return 0.5 * (H + H.transpose());
}

SymmetricInverse invert_symmetric(const Eigen::MatrixXd& m, double max_condition) {
  SymmetricInverse out;
  if (m.size() == 0) {
    out.inverse = m;
    out.condition = 1.0;
    return out;
  }
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double largest = lambda.cwiseAbs().maxCoeff();
  const double smallest = lambda.minCoeff();
  out.condition = smallest > 0.0 ? largest / smallest : std::numeric_limits<double>::infinity();
  if (smallest > 0.0 && out.condition <= max_condition) {
    out.inverse = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    return out;
  }
  out.pseudo = true;
  const double cutoff = largest / max_condition;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
  out.inverse = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

OptimResult minimize(const Objective& objective, const std::optional<GradientFn>& gradient,
                     const Eigen::VectorXd& x0, const OptimizerOptions& opts) {
  opts.validate();
  const Eigen::Index n = x0.size();
  auto grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return gradient ? (*gradient)(x) : finite_diff_gradient(objective, x);
  };

  OptimResult res;
  Eigen::VectorXd x = x0;
  double fx = objective(x);
  if (!std::isfinite(fx)) throw Error(Errc::NonFiniteObjective, "objective is not finite at the starting point");
  Eigen::VectorXd g = grad(x);
  if (!g.allFinite()) throw Error(Errc::NonFiniteObjective, "gradient is not finite at the starting point");

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;

  auto finish = [&](TerminationReason why) {
    res.argmin = x;
    res.value = fx;
    res.gradient_norm = sup_norm(g);
    res.termination_reason = why;
    res.converged = why != TerminationReason::MaxIter;
    return res;
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (sup_norm(g) <= opts.gradient_tolerance) return finish(TerminationReason::GradientTol);

    Eigen::VectorXd dir = -Hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      // Lost positive definiteness; restart from steepest descent.
      Hinv.setIdentity();
      scaled = false;
      dir = -g;
      slope = -g.squaredNorm();
    }

    constexpr double kArmijo = 1e-4;
    double step = 1.0;
    double f_new = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x_new;
    bool accepted = false;
    bool any_finite = false;
    for (int k = 0; k < 60; ++k) {
      x_new = x + step * dir;
      f_new = objective(x_new);
      if (std::isfinite(f_new)) {
        any_finite = true;
        if (f_new <= fx + kArmijo * step * slope) {
          accepted = true;
          break;
        }
        // Safeguarded quadratic interpolation of the backtracking step.
        const double denom = 2.0 * (f_new - fx - slope * step);
        double trial = denom > 0.0 ? -slope * step * step / denom : 0.5 * step;
        step = std::clamp(trial, 0.1 * step, 0.5 * step);
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) {
      if (!any_finite) throw Error(Errc::NonFiniteObjective, "objective not finite along the search direction");
      if (scaled) {
        // Retry once from steepest descent before giving up.
        Hinv.setIdentity();
        scaled = false;
        continue;
      }
      return finish(TerminationReason::StepTol);
    }

    Eigen::VectorXd g_new = grad(x_new);
    if (!g_new.allFinite()) throw Error(Errc::NonFiniteObjective, "gradient is not finite during the search");

    // Secant refinement on the directional derivative; exact on quadratics.
    const double slope_new = g_new.dot(dir);
    if (slope_new - slope > 0.0) {
      const double secant = std::clamp(-slope * step / (slope_new - slope), 1e-3 * step, 100.0 * step);
      if (std::abs(secant - step) > 1e-3 * step) {
        const Eigen::VectorXd x_sec = x + secant * dir;
        const double f_sec = objective(x_sec);
        if (std::isfinite(f_sec) && f_sec < f_new && f_sec <= fx + kArmijo * secant * slope) {
          Eigen::VectorXd g_sec = grad(x_sec);
          if (g_sec.allFinite()) {
            x_new = x_sec;
            f_new = f_sec;
            g_new = std::move(g_sec);
          }
        }
      }
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double f_old = fx;
    x = x_new;
    fx = f_new;
    g = g_new;

    if (opts.verbose)
      std::cerr << "bfgs iter " << iter + 1 << " f=" << fx << " |g|=" << sup_norm(g) << '\n';

    if (sup_norm(g) <= opts.gradient_tolerance) {
      res.iterations = iter + 1;
      return finish(TerminationReason::GradientTol);
    }
    if (sup_norm(s) <= opts.step_tolerance * (1.0 + sup_norm(x))) {
      res.iterations = iter + 1;
      return finish(TerminationReason::StepTol);
    }
    if (std::abs(f_old - fx) <= opts.function_tolerance * (1.0 + std::abs(fx))) {
      res.iterations = iter + 1;
      return finish(TerminationReason::FunctionTol);
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        Hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  res.iterations = opts.max_iterations;
  return finish(TerminationReason::MaxIter);
}

}  // namespace zadr::numerics
