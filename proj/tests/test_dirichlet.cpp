#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "zadr/dirichlet.hpp"
#include "zadr/error.hpp"

using namespace zadr;
using namespace zadr::dirichlet;

namespace {

DirichletParams params(double phi, std::initializer_list<double> a) {
  DirichletParams out;
  out.phi = phi;
  out.a_star = Eigen::VectorXd(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (double v : a) out.a_star(i++) = v;
  return out;
}

double dens(std::initializer_list<double> y, const DirichletParams& p) {
  const std::vector<double> v(y);
  return log_density(v, p);
}

double beta_log_density(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x);
}

}  // namespace

TEST_CASE("log_density closed forms") {
  CHECK(std::abs(dens({0.2, 0.8}, params(2.0, {0.5, 0.5}))) < 1e-14);
  CHECK(dens({0.5, 0.5}, params(4.0, {0.5, 0.5})) == doctest::Approx(0.405465108108164).epsilon(1e-13));
  CHECK(dens({1.0 / 3, 1.0 / 3, 1.0 / 3}, params(3.0, {1.0 / 3, 1.0 / 3, 1.0 / 3})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("log_density rejects support violations and bad parameters") {
  CHECK_THROWS_AS(dens({0.0, 1.0}, params(2.0, {0.5, 0.5})), Error);
  CHECK_THROWS_AS(dens({0.5, 0.5}, params(-1.0, {0.5, 0.5})), Error);
  CHECK_THROWS_AS(dens({0.5, 0.5}, params(2.0, {0.4, 0.5})), Error);
  CHECK_THROWS_AS(dens({0.5, 0.5}, params(2.0, {0.5, 0.3, 0.2})), Error);
}

TEST_CASE("property: density integrates to one over the 2-simplex") {
  // Midpoint rule on the unit square mapped to the simplex: x1 = u, x2 = (1-u) v.
  const std::array<DirichletParams, 3> sets{params(3.0, {1.0 / 3, 1.0 / 3, 1.0 / 3}), params(5.0, {0.2, 0.3, 0.5}),
                                            params(12.0, {0.15, 0.25, 0.6})};
  constexpr int N = 800;
  for (const auto& p : sets) {
    double total = 0.0;
    for (int a = 0; a < N; ++a) {
      const double u = (a + 0.5) / N;
      for (int b = 0; b < N; ++b) {
        const double v = (b + 0.5) / N;
        const double x1 = u;
        const double x2 = (1.0 - u) * v;
        const std::array<double, 3> y{x1, x2, 1.0 - x1 - x2};
        total += std::exp(log_density(y, p)) * (1.0 - u);
      }
    }
    total /= static_cast<double>(N) * N;
    CHECK(std::abs(total - 1.0) < 1e-3);
  }
}

TEST_CASE("property: log_density is permutation invariant") {
  std::mt19937_64 gen(17);
  std::gamma_distribution<double> g(1.5, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int D = 2 + trial % 5;
    std::vector<double> y(D);
    DirichletParams p;
    p.phi = 0.5 + 10.0 * std::generate_canonical<double, 53>(gen);
    p.a_star.resize(D);
    for (int i = 0; i < D; ++i) {
      y[i] = g(gen) + 1e-6;
      p.a_star(i) = g(gen) + 1e-3;
    }
    const double ys = std::accumulate(y.begin(), y.end(), 0.0);
    for (auto& v : y) v /= ys;
    p.a_star /= p.a_star.sum();

    std::vector<int> perm(D);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> yp(D);
    DirichletParams pp = p;
    for (int i = 0; i < D; ++i) {
      yp[i] = y[perm[i]];
      pp.a_star(i) = p.a_star(perm[i]);
    }
    pp.a_star /= pp.a_star.sum();
    const double base = log_density(y, p);
    CHECK(std::abs(log_density(yp, pp) - base) < 1e-10 * std::max(1.0, std::abs(base)));
  }
}

TEST_CASE("sample moments") {
  const auto p = params(10.0, {0.2, 0.2, 0.6});
  constexpr std::size_t n = 100000;
  const Eigen::MatrixXd draws = sample(p, n, 2024);
  CHECK((draws.array() > 0.0).all());
  CHECK((draws.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  for (int i = 0; i < 3; ++i) {
    const double a = p.a_star(i);
    const double se = std::sqrt(a * (1.0 - a) / 11.0 / n);
    CHECK(std::abs(draws.col(i).mean() - a) < 4.0 * se);
  }

  const Eigen::MatrixXd two = sample(params(10.0, {0.5, 0.5}), n, 99);
  const Eigen::VectorXd c = two.col(0).array() - two.col(0).mean();
  const double var = c.squaredNorm() / (n - 1);
  // Var of the sample variance uses the Beta(5,5) fourth central moment.
  const double sigma2 = 0.25 / 11.0;
  const double mu4 = 3.0 * 5 * 5 * (2.0 * 10 * 10 + 5 * 5 * (10 - 6)) / (10.0 * 10 * 10 * 10 * 11 * 12 * 13);
  const double se_var = std::sqrt((mu4 - sigma2 * sigma2) / n);
  CHECK(std::abs(var - sigma2) < 4.0 * se_var);
}

TEST_CASE("sample is deterministic and handles tiny shapes") {
  const auto p = params(10.0, {0.2, 0.2, 0.6});
  CHECK(sample(p, 50, 7) == sample(p, 50, 7));
  CHECK(sample(p, 50, 7) != sample(p, 50, 8));
  const Eigen::MatrixXd tiny = sample(params(0.05, {0.3, 0.3, 0.4}), 2000, 3);
  CHECK(tiny.allFinite());
  CHECK((tiny.array() > 0.0).all());
  CHECK((tiny.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("subcomposition density examples") {
  const auto p = params(3.0, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const std::vector<double> y{0.6, 0.4, 0.0};
  const std::vector<std::size_t> C{0, 1};
  CHECK(std::abs(subcomposition_log_density(y, p, C, ZeroMode::Renormalized)) < 1e-14);
  CHECK(subcomposition_log_density(y, p, C, ZeroMode::AsWritten) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const auto q = params(7.0, {0.1, 0.2, 0.3, 0.4});
  const std::vector<double> full{0.25, 0.25, 0.2, 0.3};
  const std::vector<std::size_t> all{0, 1, 2, 3};
  const double ref = log_density(full, q);
  CHECK(subcomposition_log_density(full, q, all, ZeroMode::AsWritten) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(subcomposition_log_density(full, q, all, ZeroMode::Renormalized) == doctest::Approx(ref).epsilon(1e-14));

  const std::vector<std::size_t> wrong{0, 2};
  CHECK_THROWS_AS(subcomposition_log_density(y, p, wrong), Error);
  const std::vector<std::size_t> single{0};
  const std::vector<double> one{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(subcomposition_log_density(one, p, single), Error);
}

TEST_CASE("property: renormalized two-part sub-density is a Beta density") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd a(4);
    for (int i = 0; i < 4; ++i) a(i) = u(gen);
    a /= a.sum();
    DirichletParams p;
    p.phi = 0.3 + 30.0 * u(gen);
    p.a_star = a;
    const std::size_t c1 = trial % 4;
    const std::size_t c2 = (c1 + 1 + trial / 4 % 3) % 4;
    const double x = u(gen);
    std::vector<double> y(4, 0.0);
    y[c1] = x;
    y[c2] = 1.0 - x;
    const std::vector<std::size_t> C{std::min(c1, c2), std::max(c1, c2)};
    const double got = subcomposition_log_density(y, p, C, ZeroMode::Renormalized);
    const double want = beta_log_density(x, p.phi * a(c1), p.phi * a(c2));
    CHECK(std::abs(got - want) < 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("property: renormalized subcomposition means follow the marginal Dirichlet") {
  const auto p = params(8.0, {0.1, 0.25, 0.3, 0.35});
  constexpr std::size_t n = 100000;
  const Eigen::MatrixXd draws = sample(p, n, 515);
  const std::vector<int> C{0, 2, 3};
  const double mass = p.a_star(0) + p.a_star(2) + p.a_star(3);
  Eigen::MatrixXd sub(n, 3);
  for (int k = 0; k < 3; ++k) sub.col(k) = draws.col(C[k]);
  sub.array().colwise() /= sub.rowwise().sum().array();
  for (int k = 0; k < 3; ++k) {
    const double m = p.a_star(C[k]) / mass;
    const double se = std::sqrt(m * (1.0 - m) / (p.phi * mass + 1.0) / n);
    CHECK(std::abs(sub.col(k).mean() - m) < 4.0 * se);
  }

  Rng rng(4);
  const std::vector<std::size_t> Cs{0, 2, 3};
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  std::size_t leaked = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd y = sample_subcomposition(p, Cs, rng);
    leaked += y(1) != 0.0;
    acc += y;
  }
  CHECK(leaked == 0);
  acc /= static_cast<double>(n);
  for (int k = 0; k < 3; ++k) {
    const double m = p.a_star(C[k]) / mass;
    const double se = std::sqrt(m * (1.0 - m) / (p.phi * mass + 1.0) / n);
    CHECK(std::abs(acc(C[k]) - m) < 4.0 * se);
  }
}
