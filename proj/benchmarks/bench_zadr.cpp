#include <benchmark/benchmark.h>

#include <cmath>

#include "zadr/dirichlet.hpp"
#include "zadr/inference.hpp"
#include "zadr/likelihood.hpp"
#include "zadr/model.hpp"
#include "zadr/random.hpp"
#include "zadr/simulation.hpp"

namespace {

using namespace zadr;

CovariateMatrix depth_design() {
  Eigen::MatrixXd raw(30, 1);
  for (int i = 0; i < 30; ++i) raw(i, 0) = std::log(i + 1.0);
  return CovariateMatrix::with_intercept(raw, {"log_depth"});
}

ZadrModel truth() {
  ZadrModel m;
  m.link = LinkSpec{3, ModelKind::Simple};
  m.component_names = {"A", "B", "C", "D"};
  m.covariate_names = {"(Intercept)", "log_depth"};
  m.B.resize(3, 2);
  m.B << -1.225, 0.117, -2.392, 0.087, -2.298, -0.046;
  m.precision = Eigen::VectorXd::Constant(1, 15.889);
  m.p_hat = Eigen::Vector4d(1.0, 1.0, 28.0 / 30.0, 27.0 / 30.0);
  m.converged = true;
  return m;
}

struct Problem {
  CompositionDataset ds;
  CovariateMatrix X;
  ZeroPattern zp;
  Eigen::VectorXd p;
  Eigen::VectorXd params;
};

Problem make_problem(std::size_t n) {
  Rng rng(17);
  const ZadrModel m = truth();
  auto [ds, X] = simulate_dataset(m, depth_design(), n, 1.0 / 6.0, rng);
  ZeroPattern zp = zero_pattern(ds);
  Eigen::VectorXd p = estimate_p(zp);
  return {std::move(ds), std::move(X), std::move(zp), std::move(p), m.parameters()};
}

void BM_LoglikZadr(benchmark::State& state) {
  const auto pr = make_problem(static_cast<std::size_t>(state.range(0)));
  const LikelihoodProblem lp{pr.ds, pr.X, LinkSpec{3, ModelKind::Simple}, &pr.zp, pr.p};
  for (auto _ : state) benchmark::DoNotOptimize(lp.loglik(pr.params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LoglikZadr)->Arg(60)->Arg(600)->Arg(6000);

void BM_LoglikAndGradient(benchmark::State& state) {
  const auto pr = make_problem(static_cast<std::size_t>(state.range(0)));
  const LikelihoodProblem lp{pr.ds, pr.X, LinkSpec{3, ModelKind::Simple}, &pr.zp, pr.p};
  Eigen::VectorXd g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lp.loglik(pr.params, g));
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LoglikAndGradient)->Arg(60)->Arg(600)->Arg(6000);

void BM_FitSimple(benchmark::State& state) {
  const auto pr = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit(pr.ds, pr.X, LinkSpec{3, ModelKind::Simple}).final.loglik);
}
BENCHMARK(BM_FitSimple)->Arg(60)->Arg(240)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_FitMixed(benchmark::State& state) {
  const auto pr = make_problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit(pr.ds, pr.X, LinkSpec{3, ModelKind::Mixed}).final.loglik);
}
BENCHMARK(BM_FitMixed)->Arg(240)->Unit(benchmark::kMillisecond);

void BM_DirichletSample(benchmark::State& state) {
  const dirichlet::DirichletParams params{15.889, Eigen::Vector4d(0.673, 0.198, 0.062, 0.067)};
  const auto count = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet::sample(params, count, ++seed));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DirichletSample)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
