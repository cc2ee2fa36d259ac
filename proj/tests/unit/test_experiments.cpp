#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "statopt/errors.hpp"
#include "statopt/experiments.hpp"

using namespace statopt;

namespace {

SweepConfig small_nlr(std::size_t workers) {
  SweepConfig c;
  c.model = ModelId::Regression;
  c.algorithms = {Algorithm::GD, Algorithm::NM, Algorithm::CNM};
  c.n_grid = {256, 512, 1024};
  c.trials = 4;
  c.threshold = ThresholdRule::parse("1,0.25");
  c.workers = workers;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Sweep, SingleCellReproducible) {
  SweepConfig c;
  c.model = ModelId::Mixture;
  c.algorithms = {Algorithm::EM};
  c.n_grid = {64};
  c.trials = 1;
  c.threshold = ThresholdRule::parse("abs:1e-3");
  const auto a = run_sweep(c), b = run_sweep(c);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(sweep_csv_text(a.rows, {false}), sweep_csv_text(b.rows, {false}));
  EXPECT_EQ(a.rows[0].seed, cell_seed(c.master_seed, Algorithm::EM, 64, 0));
}

TEST(Sweep, ByteIdenticalAcrossWorkers) {
  const auto one = run_sweep(small_nlr(1)), three = run_sweep(small_nlr(3));
  EXPECT_EQ(sweep_csv_text(one.rows, {false}), sweep_csv_text(three.rows, {false}));
  EXPECT_EQ(one.rows.size(), 3u * 3u * 4u);
  EXPECT_TRUE(std::is_sorted(one.rows.begin(), one.rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return std::tie(x.algorithm, x.n, x.trial) < std::tie(y.algorithm, y.n, y.trial);
  }));
}

TEST(Sweep, MediansRecomputable) {
  const auto res = run_sweep(small_nlr(1));
  for (const auto& g : res.aggregates) {
    std::vector<double> errs, hits;
    for (const auto& r : res.rows) {
      if (r.algorithm != g.algorithm || r.n != g.n) continue;
      errs.push_back(std::isnan(r.final_error) ? HUGE_VAL : r.final_error);
      hits.push_back(r.hit_iteration ? double(*r.hit_iteration) : HUGE_VAL);
    }
    std::sort(errs.begin(), errs.end());
    std::sort(hits.begin(), hits.end());
    const std::size_t m = errs.size();
    const double e = m % 2 ? errs[m / 2] : 0.5 * (errs[m / 2 - 1] + errs[m / 2]);
    const double h = m % 2 ? hits[m / 2] : 0.5 * (hits[m / 2 - 1] + hits[m / 2]);
    EXPECT_EQ(g.median_final_error, e);
    EXPECT_EQ(g.median_hit_iteration, h);
  }
}

TEST(Sweep, HitsAreBelowThreshold) {
  const auto res = run_sweep(small_nlr(1));
  for (const auto& r : res.rows) {
    EXPECT_LE(r.min_error, r.final_error);
    if (r.hit_iteration) {
      EXPECT_LE(r.final_error, res.config.threshold.at(r.n, 1));
      EXPECT_EQ(*r.hit_iteration, r.iterations_run);
    }
  }
}

TEST(Seeds, DistinctOverManyCells) {
  std::set<std::uint64_t> seen;
  std::size_t cells = 0;
  for (Algorithm a : {Algorithm::GD, Algorithm::GA, Algorithm::NM, Algorithm::CNM, Algorithm::EM}) {
    for (std::size_t n = 1000; n < 1100; ++n) {
      for (std::size_t t = 0; t < 200; ++t) {
        seen.insert(cell_seed(1, a, n, t));
        ++cells;
      }
    }
  }
  EXPECT_EQ(cells, 100000u);
  EXPECT_EQ(seen.size(), cells);
}

TEST(Median, EvenOddAndInfinity) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(median({1, HUGE_VAL, HUGE_VAL}), HUGE_VAL);
  EXPECT_THROW(median({}), ValidationError);
}

// ---------------------------------------------------------------- CSV and plots

TEST(Csv, EmptyResultHeaderOnly) {
  EXPECT_EQ(sweep_csv_text({}),
            "model,algorithm,n,d,trial,seed,final_error,min_error,hit_iteration,iterations_run,wall_time\n");
}

TEST(Csv, RoundTripExact) {
  const auto res = run_sweep(small_nlr(1));
  const std::string path = ::testing::TempDir() + "sweep.csv";
  emit_csv(res, path);
  const auto back = parse_sweep_csv(path);
  ASSERT_EQ(back.size(), res.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto &a = res.rows[i], &b = back[i];
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.algorithm, b.algorithm);
    EXPECT_EQ(a.n, b.n);
    EXPECT_EQ(a.trial, b.trial);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.final_error, b.final_error);
    EXPECT_EQ(a.min_error, b.min_error);
    EXPECT_EQ(a.hit_iteration, b.hit_iteration);
    EXPECT_EQ(a.iterations_run, b.iterations_run);
    EXPECT_EQ(a.wall_time, b.wall_time);
  }
  std::remove(path.c_str());
}

TEST(Csv, UnwritablePathNamesPath) {
  try {
    emit_csv(SweepResult{}, "/nonexistent-dir/x.csv");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.csv"), std::string::npos);
  }
}

TEST(Plot, OneSeriesPerAlgorithmWithSlopes) {
  const auto res = run_sweep(small_nlr(1));
  const std::string svg = plot_svg(res, PlotMetric::FinalError);
  for (const char* a : {"GD", "NM", "CNM"}) {
    EXPECT_NE(svg.find(std::string("data-algorithm=\"") + a + "\""), std::string::npos);
    EXPECT_NE(svg.find(std::string(">") + a + " slope "), std::string::npos);
  }
  std::size_t groups = 0;
  for (std::size_t pos = 0; (pos = svg.find("class=\"series\"", pos)) != std::string::npos; ++pos) ++groups;
  EXPECT_EQ(groups, 3u);

  const std::string path = ::testing::TempDir() + "plot.svg";
  emit_plot(res, path);
  EXPECT_EQ(slurp(path), svg);
  std::remove(path.c_str());
}

// ---------------------------------------------------------------- configuration

TEST(Config, RulesParse) {
  EXPECT_EQ(InitRule::parse("fixed:1").radius(4096), 1.0);
  EXPECT_DOUBLE_EQ(InitRule::parse("annulus:10,0.05").radius(10000), 1.0);
  EXPECT_DOUBLE_EQ(InitRule::parse("annulus:10,0.05").radius(std::size_t{1000000000000}), 0.05);
  EXPECT_DOUBLE_EQ(ThresholdRule::parse("3,0.25").at(10000, 1), 0.3);
  EXPECT_DOUBLE_EQ(ThresholdRule::parse("abs:0.01").at(10000, 1), 0.01);
  EXPECT_EQ(IterRule::parse("100,0.5").at(10000), 10000u);
  EXPECT_THROW(InitRule::parse("ring:1"), ValidationError);
  EXPECT_THROW(ThresholdRule::parse("3,-1"), ValidationError);
}

TEST(Config, NGrid) {
  EXPECT_EQ(parse_n_grid("2^10..2^12"), (std::vector<std::size_t>{1024, 2048, 4096}));
  EXPECT_EQ(parse_n_grid("10,20,40"), (std::vector<std::size_t>{10, 20, 40}));
  SweepConfig c;
  c.n_grid = {20, 10};
  EXPECT_THROW(c.validate(), ValidationError);
  c.n_grid = {10};
  c.trials = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Config, KeyValueOverrides) {
  SweepConfig c;
  apply_kv(c, {{"preset", "mixture"}, {"trials", "3"}, {"n_grid", "2^8..2^9"}});
  EXPECT_EQ(c.model, ModelId::Mixture);
  EXPECT_EQ(c.trials, 3u);
  EXPECT_EQ(c.n_grid.size(), 2u);
  EXPECT_THROW(apply_kv(c, {{"colour", "red"}}), ValidationError);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate());
  EXPECT_THROW(preset("no-such-preset"), ValidationError);
}

TEST(Config, DefaultInitialization) {
  EXPECT_EQ(default_init(Algorithm::GD).radius(1024), 0.5);
  EXPECT_EQ(default_init(Algorithm::EM).radius(1024), 0.5);
  EXPECT_DOUBLE_EQ(default_init(Algorithm::NM).radius(10000), 1.0);
}

// ---------------------------------------------------------------- orchestrations

TEST(PopulationRates, NlrAndMixture) {
  ModelSpec nlr;
  const auto rates =
      run_population_rates(nlr, {Algorithm::NM, Algorithm::GD, Algorithm::CNM}, ParamPoint::scalar(1.0), 2000);
  ASSERT_EQ(rates.size(), 3u);
  EXPECT_EQ(rates[0].classification->mode, ConvergenceMode::Fast);
  EXPECT_NEAR(rates[0].classification->rate, 2.0 / 3, 0.01);
  EXPECT_NEAR(rates[1].classification->rate, 0.5, 0.05);
  EXPECT_NEAR(rates[2].classification->rate, 2.0, 0.2);

  ModelSpec mix;
  mix.id = ModelId::Mixture;
  const auto m = run_population_rates(mix, {Algorithm::NM}, ParamPoint::scalar(0.3), 60);
  EXPECT_EQ(m[0].classification->mode, ConvergenceMode::Fast);
  EXPECT_LE(m[0].classification->rate, 7.0 / 9 + 0.02);
}

TEST(PopulationRates, OriginSkipsClassification) {
  const auto r = run_population_rates(ModelSpec{}, {Algorithm::GD}, ParamPoint::scalar(0.0), 30);
  EXPECT_FALSE(r[0].classification);
  for (const auto& e : r[0].trace.entries) EXPECT_EQ(e.error, 0.0);
}

TEST(Escape, ZeroStepsKeepInits) {
  const auto d = run_escape_demo(10000, 0.04, 0.3, 0);
  ASSERT_EQ(d.below.size(), 1u);
  ASSERT_EQ(d.annulus.size(), 1u);
  EXPECT_EQ(d.below.back().point[0], 0.04);
  EXPECT_EQ(d.annulus.back().point[0], 0.3);
}

TEST(Escape, AnnulusStartStaysLocal) {
  const double annulus = 3.0 * std::pow(1e4, -0.25);
  const auto d = run_escape_demo(10000, 0.0396867, annulus, 60);
  EXPECT_TRUE(d.annulus_within_half);
  for (const auto& e : d.annulus.entries) EXPECT_LE(std::abs(e.point[0]), 0.5);
  EXPECT_TRUE(d.below_left_unit_ball);
  EXPECT_TRUE(d.below_near_two);
}

class PolyBounds : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(PolyBounds, PassesAndIsDeterministic) {
  const auto [p, q] = GetParam();
  const auto a = run_polynomial_bounds(p, q, {1e-3, 1e-4, 1e-5});
  EXPECT_TRUE(a.passed());
  for (const auto& e : a.entries) {
    EXPECT_TRUE(e.passed()) << to_string(e.algorithm) << " eps=" << e.eps;
    EXPECT_NEAR(e.floor, std::pow(e.eps, 1 / (p - q)), 1e-15);
  }
  const auto b = run_polynomial_bounds(p, q, {1e-3, 1e-4, 1e-5});
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].hit, b.entries[i].hit);
}

INSTANTIATE_TEST_SUITE_P(Exponents, PolyBounds,
                         ::testing::Values(std::make_pair(4.0, 2.0), std::make_pair(5.0, 2.0),
                                           std::make_pair(5.0, 3.0)));

TEST(PolyBoundsFloor, HalvingEpsShrinksFloor) {
  const auto r = run_polynomial_bounds(4, 2, {2e-4, 1e-4});
  EXPECT_NEAR(r.entries[1].floor / r.entries[0].floor, 1 / std::sqrt(2.0), 1e-14);
}

TEST(PolyBoundsFloor, RejectsBadExponents) { EXPECT_THROW(run_polynomial_bounds(3, 2, {1e-3}), ValidationError); }
