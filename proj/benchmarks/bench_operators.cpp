#include <benchmark/benchmark.h>

#include <memory>

#include "statopt/algorithms.hpp"
#include "statopt/experiments.hpp"

using namespace statopt;

namespace {

// One sample-level step on a dataset of n observations. Regression and non-response steps
// read precomputed sufficient statistics, so only EM scales with n.
void BM_SampleStep(benchmark::State& state, ModelId model, Algorithm alg) {
  ModelSpec m;
  m.id = model;
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = std::make_shared<const SampleSet>(generate(m, n, 1));
  const auto op = make_sample_operator(data, alg, default_config(spec_of(*data), alg));
  const ParamPoint theta = ParamPoint::scalar(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(op(theta));
}

void BM_MixturePopulationNewton(benchmark::State& state) {
  ModelSpec m;
  m.id = ModelId::Mixture;
  const auto op = make_operator(m, Algorithm::NM, Level::Population, nullptr, default_config(m, Algorithm::NM));
  const ParamPoint theta = ParamPoint::scalar(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(op(theta));
}

void BM_DenseSolve(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const Mat h = Mat::Random(d, d) + static_cast<double>(d) * Mat::Identity(d, d);
  const Vec g = Vec::Random(d);
  for (auto _ : state) benchmark::DoNotOptimize(solve_dense(h, g));
}

void BM_SweepCell(benchmark::State& state) {
  SweepConfig c = preset("nlr");
  c.algorithms = {Algorithm::NM};
  c.n_grid = {static_cast<std::size_t>(state.range(0))};
  c.trials = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(c));
}

}  // namespace

BENCHMARK_CAPTURE(BM_SampleStep, regression_gd, ModelId::Regression, Algorithm::GD)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(BM_SampleStep, regression_cnm, ModelId::Regression, Algorithm::CNM)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(BM_SampleStep, mixture_em, ModelId::Mixture, Algorithm::EM)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(BM_SampleStep, nonresponse_nm, ModelId::NonResponse, Algorithm::NM)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_MixturePopulationNewton);
BENCHMARK(BM_DenseSolve)->Arg(2)->Arg(8)->Arg(32);
BENCHMARK(BM_SweepCell)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
