#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace zadr::numerics {

// Log-gamma, digamma and trigamma for x > 0. Throw DomainError otherwise.
double lgamma_fn(double x);
double digamma_fn(double x);
double trigamma_fn(double x);

/// Upper tail P(X >= stat) of a chi-square with `df` degrees of freedom, via
/// the regularized upper incomplete gamma function.
double chi_square_upper_tail(double stat, int df);

struct OptimizerOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;  // sup-norm
  double step_tolerance = 1e-12;     // relative to 1 + |x|_inf
  double function_tolerance = 1e-14; // relative to 1 + |f|
  bool verbose = false;

  void validate() const;
};

enum class TerminationReason { GradientTol, StepTol, FunctionTol, MaxIter };

std::string_view to_string(TerminationReason reason) noexcept;

struct OptimResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  double gradient_norm = 0.0;  // sup-norm at argmin
  int iterations = 0;
  bool converged = false;
  TerminationReason termination_reason = TerminationReason::MaxIter;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// BFGS with backtracking Armijo line search. Without an analytic gradient,
/// central finite differences are used. Non-convergence is reported through
/// the result; NonFiniteObjective is thrown when the start is not finite or
/// every trial point along a search direction is.
OptimResult minimize(const Objective& objective, const std::optional<GradientFn>& gradient,
                     const Eigen::VectorXd& x0, const OptimizerOptions& opts = {});

/// Componentwise step used by finite_diff_gradient: max(1e-6, 1e-6 |x_i|).
double gradient_step(double xi) noexcept;

Eigen::VectorXd finite_diff_gradient(const Objective& f, const Eigen::VectorXd& x);

/// Central second differences, symmetrized as (H + H^T) / 2.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x);

/// Inverse of a symmetric matrix. Falls back to the Moore-Penrose
/// pseudo-inverse (and sets `pseudo`) when the eigenvalue condition number
/// exceeds `max_condition` or the matrix is not positive definite.
struct SymmetricInverse {
  Eigen::MatrixXd inverse;
  double condition = 0.0;
  bool pseudo = false;
};

SymmetricInverse invert_symmetric(const Eigen::MatrixXd& m, double max_condition = 1e12);

}  // namespace zadr::numerics
