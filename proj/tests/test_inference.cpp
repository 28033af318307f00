#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "zadr/error.hpp"
#include "zadr/inference.hpp"
#include "zadr/parallel.hpp"
#include "zadr/simulation.hpp"

using namespace zadr;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

std::pair<CompositionDataset, CovariateMatrix> simulated(std::size_t n, double zero_fraction, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_dataset(testing::table_truth(), testing::log_depth_design(), n, zero_fraction, rng);
}

// Swaps two non-reference components in a model, carrying the covariance along.
ZadrModel swap_components(ZadrModel m, Eigen::Index r1, Eigen::Index r2) {
  const auto cols = m.B.cols();
  m.B.row(r1).swap(m.B.row(r2));
  Eigen::VectorXi perm(m.covariance.rows());
  for (Eigen::Index i = 0; i < perm.size(); ++i) perm(i) = static_cast<int>(i);
  for (Eigen::Index c = 0; c < cols; ++c) std::swap(perm(r1 * cols + c), perm(r2 * cols + c));
  Eigen::MatrixXd cov(m.covariance.rows(), m.covariance.cols());
  for (Eigen::Index a = 0; a < cov.rows(); ++a)
    for (Eigen::Index b = 0; b < cov.cols(); ++b) cov(a, b) = m.covariance(perm(a), perm(b));
  m.covariance = cov;
  return m;
}

}  // namespace

TEST_CASE("diagnostic is zero for identical models and checks kinds") {
  auto [ds, X] = simulated(60, 1.0 / 6.0, 1);
  const auto pair = fit(ds, X, LinkSpec{3, ModelKind::Simple});
  const auto same = diagnostic_T(pair.final, pair.final);
  CHECK(same.T == 0.0);
  CHECK(same.delta.size() == 7);
  CHECK(same.delta_names.front() == "phi");

  const auto diag = diagnostic_T(pair.initial, pair.final);
  CHECK(diag.T >= 0.0);
  CHECK(diag.delta(0) == doctest::Approx(pair.initial.phi() - pair.final.phi()));
  CHECK(diag.delta(1) == doctest::Approx(pair.initial.B(0, 0) - pair.final.B(0, 0)));

  auto mixed = pair.final;
  mixed.link.model_kind = ModelKind::Mixed;
  mixed.precision = Eigen::VectorXd::Zero(2);
  CHECK(code_of([&] { diagnostic_T(pair.initial, mixed); }) == Errc::KindMismatch);
}

TEST_CASE("diagnostic on zero-free data is essentially zero") {
  auto [ds, X] = simulated(60, 0.0, 2);
  const auto pair = fit(ds, X, LinkSpec{3, ModelKind::Simple});
  CHECK(diagnostic_T(pair.initial, pair.final).T < 1e-8);
}

TEST_CASE("property: diagnostic is invariant to reordering the parameters") {
  auto [ds, X] = simulated(90, 1.0 / 6.0, 3);
  for (const ModelKind kind : {ModelKind::Simple, ModelKind::Mixed}) {
    const auto pair = fit(ds, X, LinkSpec{3, kind});
    const double T = diagnostic_T(pair.initial, pair.final).T;
    const double Tp = diagnostic_T(swap_components(pair.initial, 0, 2), swap_components(pair.final, 0, 2)).T;
    CHECK(Tp == doctest::Approx(T).epsilon(1e-9));
  }
}

TEST_CASE("bootstrap p-value formula") {
  std::vector<double> low(99, 0.1);
  CHECK(bootstrap_pvalue_from(low, 1.0) == doctest::Approx(0.01));
  std::vector<double> high(99, 2.0);
  CHECK(bootstrap_pvalue_from(high, 1.0) == 1.0);
  std::vector<double> mixed{0.5, 1.0, 1.5, std::numeric_limits<double>::quiet_NaN()};
  CHECK(bootstrap_pvalue_from(mixed, 1.0) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("bootstrap is deterministic, bounded and independent of the worker count") {
  auto [ds, X] = simulated(30, 1.0 / 6.0, 4);
  const auto pair = fit(ds, X, LinkSpec{3, ModelKind::Simple});
  const double t_obs = diagnostic_T(pair.initial, pair.final).T;
  ::setenv("ZADR_THREADS", "1", 1);
  const auto one = bootstrap_pvalue(pair.final, t_obs, ds, X, 19, 77);
  ::setenv("ZADR_THREADS", "3", 1);
  const auto three = bootstrap_pvalue(pair.final, t_obs, ds, X, 19, 77);
  ::unsetenv("ZADR_THREADS");
  CHECK(one.pvalue == three.pvalue);
  CHECK(one.successes + one.failures == 19);
  for (std::size_t b = 0; b < 19; ++b) {
    const double x = one.replicate_stats[b];
    const double y = three.replicate_stats[b];
    CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
  }
  CHECK(one.pvalue >= 1.0 / (one.successes + 1.0));
  CHECK(one.pvalue <= 1.0);

  CHECK(code_of([&] { bootstrap_pvalue(pair.final, t_obs, ds, X, 18, 77); }) == Errc::InvalidArgument);
}

TEST_CASE("bootstrap bias near the truth") {
  auto [ds, X] = simulated(120, 1.0 / 6.0, 5);
  const auto pair = fit(ds, X, LinkSpec{3, ModelKind::Simple});
  const auto res = bootstrap_bias(pair.final, ds, X, 40, 11);
  REQUIRE(res.successes >= 19);
  const double k = static_cast<double>(res.successes);
  // Slopes: |bias| within 3 Monte-Carlo standard errors.
  for (Eigen::Index r = 0; r < 3; ++r) {
    const Eigen::Index idx = r * 2 + 1;
    CHECK(std::abs(res.bias(idx)) < 3.0 * res.bias_se(idx) / std::sqrt(k));
  }
}

TEST_CASE("simulated responses keep the zero pattern") {
  auto [ds, X] = simulated(60, 0.25, 6);
  const auto zp = zero_pattern(ds);
  Rng rng(3);
  const auto sim = simulate_responses(testing::table_truth(), X, zp, rng);
  CHECK(zero_pattern(sim).u == zp.u);
  CHECK(zp.zero_row_indices.size() == 15);
}

TEST_CASE("likelihood-ratio test") {
  const auto same = lrt_from_logliks(10.0, 10.0, 1);
  CHECK(same.stat == 0.0);
  CHECK(same.pvalue == 1.0);
  const auto reference = lrt_from_logliks(124.040, 125.877, 1);
  CHECK(reference.stat == doctest::Approx(3.674).epsilon(1e-12));
  CHECK(reference.pvalue == doctest::Approx(0.055267397602885585).epsilon(1e-9));
  CHECK(lrt_from_logliks(0.0, 3.841 / 2.0, 1).pvalue == doctest::Approx(0.0500137).epsilon(1e-5));
  CHECK(lrt_from_logliks(5.0, 5.0 - 1e-8, 1).stat == 0.0);
  CHECK(code_of([] { lrt_from_logliks(5.0, 4.0, 1); }) == Errc::NegativeStat);
}

TEST_CASE("lrt from fitted models") {
  auto [ds, X] = simulated(60, 1.0 / 6.0, 7);
  const auto s = fit(ds, X, LinkSpec{3, ModelKind::Simple}).final;
  const auto m = fit(ds, X, LinkSpec{3, ModelKind::Mixed}).final;
  const auto r = lrt(s, m);
  CHECK(r.df == 1);
  CHECK(r.stat >= 0.0);
  CHECK(code_of([&] { lrt(m, s); }) == Errc::KindMismatch);
}

TEST_CASE("fit metrics") {
  Eigen::MatrixXd y(1, 2), yhat(1, 2);
  y << 1.0, 0.0;
  yhat << 0.5, 0.5;
  const auto m = fit_metrics(y, yhat);
  CHECK(m.kl == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(m.l2 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fit_metrics(yhat, yhat).kl == 0.0);
  CHECK(fit_metrics(yhat, yhat).l2 == 0.0);
  CHECK(code_of([&] { fit_metrics(y, Eigen::MatrixXd(2, 2)); }) == Errc::ShapeMismatch);

  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testing::random_compositions(gen, 5, 4, true);
    const auto b = testing::random_compositions(gen, 5, 4, false);
    const auto r = fit_metrics(a, b);
    CHECK(r.kl >= 0.0);
    CHECK(r.l2 > 0.0);
  }
}

TEST_CASE("simulation study with one replicate reports the squared error") {
  const auto truth = testing::table_truth();
  const auto base = testing::log_depth_design();
  const auto report = run_simulation_study(truth, base, {60}, 1, 1.0 / 6.0, 21);
  REQUIRE(report.cells.size() == 7);
  REQUIRE(report.cell(0, 0).successes == 1);

  Rng rng(derive_seed(derive_seed(21, 60), 0));
  auto [ds, X] = simulate_dataset(truth, base, 60, 1.0 / 6.0, rng);
  FitOptions opts;
  opts.random_seed = derive_seed(derive_seed(21, 60), 0);
  const auto est = fit(ds, X, truth.link, opts).final.parameters();
  for (std::size_t k = 0; k < 7; ++k) {
    const double e = est(static_cast<Eigen::Index>(k)) - truth.parameters()(static_cast<Eigen::Index>(k));
    CHECK(report.cell(0, k).mse == e * e);
    CHECK(report.cell(0, k).parameter == truth.parameter_names()[k]);
  }

  std::ostringstream csv;
  write_simulation_csv(report, csv);
  CHECK(csv.str().rfind("n,parameter,MSE,successes\n60,", 0) == 0);
}

TEST_CASE("simulated datasets have the requested zero rows") {
  Rng rng(9);
  auto [ds, X] = simulate_dataset(testing::table_truth(), testing::log_depth_design(), 120, 1.0 / 6.0, rng);
  const auto zp = zero_pattern(ds);
  CHECK(zp.zero_row_indices.size() == 20);
  for (std::size_t r : zp.zero_row_indices) {
    CHECK(zp.u(static_cast<Eigen::Index>(r), 0) == 1);
    CHECK(zp.u(static_cast<Eigen::Index>(r), 1) == 1);
  }
  CHECK(X.rows() == 120);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 5) throw Error(Errc::Io, "boom"); }, 3), Error);
}
