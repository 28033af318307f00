#pragma once

// Test-only helpers: random problem generators and a naive row-by-row
// log-likelihood oracle that shares no code with the library's evaluation
// path (std::lgamma, unshifted softmax, product-form Bernoulli term).

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "zadr/compositions.hpp"
#include "zadr/likelihood.hpp"
#include "zadr/model.hpp"

namespace zadr::testing {

struct Instance {
  CompositionDataset ds;
  CovariateMatrix X;
  Eigen::MatrixXd B;
  double phi = 1.0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd p;
  LinkSpec link;
};

inline Eigen::MatrixXd random_compositions(std::mt19937_64& gen, int n, int D, bool with_zeros) {
  std::gamma_distribution<double> g(2.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd Y(n, D);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < D; ++j) Y(i, j) = g(gen) + 1e-3;
    if (with_zeros && D >= 3 && u(gen) < 0.4) {
      const int zeros = D >= 4 && u(gen) < 0.3 ? 2 : 1;
      for (int z = 0; z < zeros; ++z) Y(i, static_cast<int>(gen() % static_cast<unsigned>(D))) = 0.0;
      int pos = 0;
      for (int j = 0; j < D; ++j) pos += Y(i, j) > 0.0;
      if (pos < 2) Y(i, 0) = Y(i, 1) = 0.5;  // keep at least two parts
    }
    Y.row(i) /= Y.row(i).sum();
  }
  return Y;
}

inline Instance random_instance(std::mt19937_64& gen, bool with_zeros, int max_n = 10, int max_D = 4, int max_p = 2) {
  std::uniform_int_distribution<int> n_dist(1, max_n);
  std::uniform_int_distribution<int> D_dist(2, max_D);
  std::uniform_int_distribution<int> p_dist(0, max_p);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = n_dist(gen);
  const int D = D_dist(gen);
  const int p = p_dist(gen);
  Eigen::MatrixXd raw(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) raw(i, k) = z(gen);
  Instance inst{load_dataset(random_compositions(gen, n, D, with_zeros), {}), CovariateMatrix::with_intercept(raw, {}),
                Eigen::MatrixXd(D - 1, p + 1), 0.5 + 20.0 * u(gen), Eigen::VectorXd(p + 1), Eigen::VectorXd(D),
                LinkSpec{static_cast<std::size_t>(gen() % static_cast<unsigned>(D)), ModelKind::Simple}};
  for (int r = 0; r < D - 1; ++r)
    for (int c = 0; c <= p; ++c) inst.B(r, c) = 0.7 * z(gen);
  inst.gamma(0) = std::log(inst.phi);
  for (int c = 1; c <= p; ++c) inst.gamma(c) = 0.3 * z(gen);
  const Eigen::VectorXd observed = estimate_p(zero_pattern(inst.ds));
  for (int j = 0; j < D; ++j) {
    // Any p consistent with the observed pattern (strictly inside (0,1) when
    // the component has both zero and nonzero entries).
    const double o = observed(j);
    inst.p(j) = (o == 1.0 || o == 0.0) ? o : 0.05 + 0.9 * u(gen);
  }
  return inst;
}

inline Eigen::VectorXd naive_softmax(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& B, std::size_t ref) {
  const Eigen::Index D = B.rows() + 1;
  Eigen::VectorXd e(D);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < D; ++i) e(i) = static_cast<std::size_t>(i) == ref ? 1.0 : std::exp(x.dot(B.row(k++)));
  return e / e.sum();
}

/// Row-by-row log-likelihood. precision_per_row[j] is phi_j. With
/// `adjusted`, rows are scored on their positive set and the Bernoulli term
/// is added as log of the product prod p^u (1-p)^(1-u).
inline double oracle_loglik(const Instance& inst, const Eigen::VectorXd& precision_per_row, bool adjusted,
                            ZeroMode mode) {
  const auto& Y = inst.ds.values();
  double total = 0.0;
  for (Eigen::Index j = 0; j < Y.rows(); ++j) {
    const Eigen::VectorXd a = naive_softmax(inst.X.design().row(j), inst.B, inst.link.ref_index);
    const double phi = precision_per_row(j);
    double mass = 0.0;
    double row = 0.0;
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
      if (Y(j, i) == 0.0) continue;
      mass += a(i);
      row += (phi * a(i) - 1.0) * std::log(Y(j, i)) - std::lgamma(phi * a(i));
    }
    row += (adjusted && mode == ZeroMode::Renormalized) ? std::lgamma(phi * mass) : std::lgamma(phi);
    total += row;
    if (adjusted) {
      double prob = 1.0;
      for (Eigen::Index i = 0; i < Y.cols(); ++i)
        prob *= Y(j, i) > 0.0 ? std::pow(inst.p(i), 1.0) : std::pow(1.0 - inst.p(i), 1.0);
      total += std::log(prob);
    }
  }
  return total;
}

inline Eigen::VectorXd row_precisions(const Instance& inst, bool mixed) {
  Eigen::VectorXd out(inst.ds.values().rows());
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out(j) = mixed ? std::exp(inst.X.design().row(j).dot(inst.gamma)) : inst.phi;
  return out;
}

/// Intercept plus log(depth) for depth 1..30.
inline CovariateMatrix log_depth_design() {
  Eigen::MatrixXd raw(30, 1);
  for (int i = 0; i < 30; ++i) raw(i, 0) = std::log(static_cast<double>(i + 1));
  return CovariateMatrix::with_intercept(raw, {"log_depth"});
}

/// Simple model at the published foraminiferal estimates, reference Triloba.
inline ZadrModel table_truth() {
  ZadrModel m;
  m.link = LinkSpec{3, ModelKind::Simple};
  m.component_names = {"Obesa", "Pachyderma", "Atlantica", "Triloba"};
  m.covariate_names = {"(Intercept)", "log_depth"};
  m.B.resize(3, 2);
  m.B << -1.225, 0.117, -2.392, 0.087, -2.298, -0.046;
  m.precision = Eigen::VectorXd::Constant(1, 15.889);
  m.p_hat.resize(4);
  m.p_hat << 1.0, 1.0, 28.0 / 30.0, 27.0 / 30.0;
  m.converged = true;
  m.training_design = log_depth_design().design();
  return m;
}

}  // namespace zadr::testing
