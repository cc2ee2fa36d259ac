#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "statopt/algorithms.hpp"
#include "statopt/analysis.hpp"
#include "statopt/errors.hpp"

using namespace statopt;

namespace {

std::shared_ptr<const SampleSet> polynomial_data(double eps) {
  return std::make_shared<const SampleSet>(PolynomialSpec{4, 2, eps, 1});
}

IterationTrace population_trace(Algorithm a, std::size_t T) {
  ModelSpec m;
  const auto op = make_operator(m, a, Level::Population, nullptr, default_config(m, a));
  return iterate(op, ParamPoint::scalar(1.0), T, ParamPoint::scalar(0.0));
}

}  // namespace

TEST(FitPowerLaw, ExactLine) {
  const auto f = fit_power_law({1, 10, 100}, {2, 20, 200});
  EXPECT_NEAR(f.slope, 1.0, 1e-14);
  EXPECT_NEAR(f.intercept, std::log(2.0), 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_NEAR(f.residual_norm, 0.0, 1e-13);
  EXPECT_EQ(f.domain, FitDomain::LogLog);
}

TEST(FitPowerLaw, Constant) { EXPECT_NEAR(fit_power_law({1, 2, 3, 4}, {5, 5, 5, 5}).slope, 0.0, 1e-15); }

TEST(FitPowerLaw, NoisyQuarterSlope) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 0.01);
  std::vector<double> xs, ys;
  for (int k = 0; k < 20; ++k) {
    xs.push_back(std::pow(2.0, k));
    ys.push_back(std::pow(xs.back(), -0.25) * (1 + z(rng)));
  }
  const auto f = fit_power_law(xs, ys);
  EXPECT_GE(f.slope, -0.27);
  EXPECT_LE(f.slope, -0.23);
  EXPECT_NEAR(f.slope, oracle::ls_slope(
                           [&] {
                             std::vector<double> l;
                             for (double x : xs) l.push_back(std::log(x));
                             return l;
                           }(),
                           [&] {
                             std::vector<double> l;
                             for (double y : ys) l.push_back(std::log(y));
                             return l;
                           }()),
              1e-12);
  EXPECT_GE(f.r2, 0.0);
  EXPECT_LE(f.r2, 1.0);
}

TEST(FitPowerLaw, ExactOnNoiselessData) {
  std::vector<double> xs, ys;
  for (int k = 1; k <= 30; ++k) {
    xs.push_back(k * 0.37);
    ys.push_back(4.2 * std::pow(xs.back(), -1.7));
  }
  const auto f = fit_power_law(xs, ys);
  EXPECT_NEAR(f.slope, -1.7, 1e-12);
  EXPECT_LT(f.residual_norm, 1e-12);
}

TEST(FitPowerLaw, RejectsBadInput) {
  EXPECT_THROW(fit_power_law({1, 2}, {1, 2}), ValidationError);
  EXPECT_THROW(fit_power_law({1, 2, 3}, {1, 0, 2}), ValidationError);
  EXPECT_THROW(fit_power_law({1, -2, 3}, {1, 1, 2}), ValidationError);
  EXPECT_THROW(fit_power_law({1, 2, 3}, {1, 2}), ValidationError);
}

TEST(Classify, SyntheticGeometric) {
  std::vector<double> e;
  for (int t = 0; t < 60; ++t) e.push_back(std::pow(0.8, t));
  const auto c = classify_errors(e);
  EXPECT_EQ(c.mode, ConvergenceMode::Fast);
  EXPECT_GE(c.rate, 0.799);
  EXPECT_LE(c.rate, 0.801);
}

TEST(Classify, SyntheticPowerLaw) {
  std::vector<double> e;
  for (int t = 0; t < 500; ++t) e.push_back(1 / std::pow(1.0 + t, 0.7));
  const auto c = classify_errors(e);
  EXPECT_EQ(c.mode, ConvergenceMode::Slow);
  EXPECT_NEAR(c.rate, 0.7, 0.02);
}

TEST(Classify, NlrPopulationModes) {
  const auto nm = classify_convergence(population_trace(Algorithm::NM, 60));
  EXPECT_EQ(nm.mode, ConvergenceMode::Fast);
  EXPECT_NEAR(nm.rate, 2.0 / 3, 0.01);

  const auto gd = classify_convergence(population_trace(Algorithm::GD, 2000));
  EXPECT_EQ(gd.mode, ConvergenceMode::Slow);
  EXPECT_GE(gd.rate, 0.45);
  EXPECT_LE(gd.rate, 0.55);

  const auto cnm = classify_convergence(population_trace(Algorithm::CNM, 2000));
  EXPECT_EQ(cnm.mode, ConvergenceMode::Slow);
  EXPECT_GE(cnm.rate, 1.8);
  EXPECT_LE(cnm.rate, 2.2);
}

TEST(Classify, TruncatesAtExactZero) {
  std::vector<double> e;
  for (int t = 0; t < 40; ++t) e.push_back(std::pow(0.5, t));
  for (int t = 0; t < 10; ++t) e.push_back(0.0);
  EXPECT_EQ(classify_errors(e).mode, ConvergenceMode::Fast);
  EXPECT_THROW(classify_errors({1.0, 0.5, 0.0}), ValidationError);
}

// ---------------------------------------------------------------- perturbation profiles

TEST(Profile, ZeroPerturbationGivesZeros) {
  const auto prof = perturbation_profile(polynomial_data(0.0), Algorithm::GD, AlgorithmConfig{}, log_spaced(0.01, 0.5, 10),
                                         2, 0, 0.01, 0.5);
  for (double s : prof.sup_perturbation) EXPECT_EQ(s, 0.0);
}

TEST(Profile, PolynomialGradientDiscrepancyExact) {
  const double eps = 1e-4;
  AlgorithmConfig cfg;
  cfg.step_size = 0.3;
  const auto radii = log_spaced(0.005, 0.5, 30);
  const auto prof = perturbation_profile(polynomial_data(eps), Algorithm::GD, cfg, radii, 2, 0, 0.005, 0.5);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    EXPECT_NEAR(prof.sup_perturbation[k], cfg.step_size * eps * radii[k], 1e-12);
    EXPECT_EQ(prof.probes_ok[k], 2u);
  }
  ASSERT_TRUE(prof.gamma_hat);
  EXPECT_NEAR(*prof.gamma_hat, 1.0, 0.1);
}

TEST(Profile, PolynomialNewtonUnstable) {
  const double eps = 1e-4, floor = 0.01;
  ModelSpec m;
  m.id = ModelId::Polynomial;
  const auto cfg = default_config(m, Algorithm::NM);
  const auto prof =
      perturbation_profile(polynomial_data(eps), Algorithm::NM, cfg, log_spaced(0.1 * floor, 0.5, 40), 2, 0, 3 * floor, 0.5);
  ASSERT_TRUE(prof.gamma_hat);
  EXPECT_NEAR(*prof.gamma_hat, -1.0, 0.15);
  const double r = detect_inner_radius(prof);
  EXPECT_GE(r, floor / 3);
  EXPECT_LE(r, floor * 3);
}

TEST(Profile, DetectRejectsStable) {
  AlgorithmConfig cfg;
  cfg.step_size = 0.3;
  const auto prof =
      perturbation_profile(polynomial_data(1e-4), Algorithm::GD, cfg, log_spaced(0.01, 0.5, 10), 2, 0, 0.01, 0.5);
  EXPECT_THROW(detect_inner_radius(prof), ValidationError);
}

TEST(Profile, PurePowerLawFallsBackToSmallestRadius) {
  StabilityProfile p;
  p.radii = log_spaced(0.01, 1.0, 12);
  for (double r : p.radii) {
    p.sup_perturbation.push_back(1e-3 / r);
    p.probes_ok.push_back(2);
    p.valid.push_back(true);
  }
  p.fit_lo = 0.01;
  p.fit_hi = 1.0;
  p.fit = fit_power_law(p.radii, p.sup_perturbation);
  p.gamma_hat = p.fit->slope;
  EXPECT_EQ(detect_inner_radius(p), p.radii.front());
}

TEST(Profile, ProbeDoublingAndDeterminism) {
  const auto data = std::make_shared<const SampleSet>(gen_mixture(500, 2, 21));
  const auto radii = log_spaced(0.05, 0.5, 8);
  const auto a = perturbation_profile(data, Algorithm::EM, {}, radii, 8, 4, 0.05, 0.5);
  const auto b = perturbation_profile(data, Algorithm::EM, {}, radii, 16, 4, 0.05, 0.5);
  const auto c = perturbation_profile(data, Algorithm::EM, {}, radii, 8, 4, 0.05, 0.5);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    EXPECT_GE(b.sup_perturbation[k], a.sup_perturbation[k]);
    EXPECT_EQ(a.sup_perturbation[k], c.sup_perturbation[k]);
    EXPECT_GE(a.sup_perturbation[k], 0.0);
  }
  EXPECT_THROW(perturbation_profile(data, Algorithm::EM, {}, radii, 4, 4, 0.05, 0.5), ValidationError);
}

TEST(Profile, InvalidInputs) {
  const auto data = polynomial_data(1e-4);
  EXPECT_THROW(perturbation_profile(data, Algorithm::GD, {}, {0.1, 0.05, 0.2}, 2, 0, 0.05, 0.2), ValidationError);
  EXPECT_THROW(perturbation_profile(data, Algorithm::GD, {}, {0.1, 0.2, 0.3}, 2, 0, 0.05, 0.3), ValidationError);
}

TEST(Profile, FailedProbesInvalidateRadius) {
  // Sample objective undefined below |θ| = 0.1.
  Objective fragile(1, [](const Vec& th, int) {
    if (std::abs(th[0]) < 0.1) throw NumericalError("undefined");
    Derivatives d;
    d.value = 0.5 * th[0] * th[0];
    d.gradient = th;
    d.hessian = Mat::Identity(1, 1);
    return d;
  });
  Objective smooth(1, [](const Vec& th, int) {
    Derivatives d;
    d.value = 0.5 * th[0] * th[0];
    d.gradient = th;
    d.hessian = Mat::Identity(1, 1);
    return d;
  });
  AlgorithmConfig cfg;
  cfg.step_size = 0.5;
  const auto prof = perturbation_profile(make_objective_operator(fragile, Algorithm::GD, cfg),
                                         make_objective_operator(smooth, Algorithm::GD, cfg),
                                         {0.05, 0.2, 0.3, 0.4}, 2, 0, 0.05, 0.4);
  EXPECT_FALSE(prof.valid[0]);
  EXPECT_EQ(prof.probes_ok[0], 0u);
  EXPECT_TRUE(std::isnan(prof.sup_perturbation[0]));
  for (std::size_t k = 1; k < 4; ++k) {
    EXPECT_TRUE(prof.valid[k]);
    EXPECT_EQ(prof.sup_perturbation[k], 0.0);
  }
}

TEST(Profile, CsvRoundTrip) {
  const double eps = 1e-4;
  ModelSpec m;
  m.id = ModelId::Polynomial;
  const auto prof = perturbation_profile(polynomial_data(eps), Algorithm::NM, default_config(m, Algorithm::NM),
                                         log_spaced(1e-3, 0.5, 20), 2, 0, 0.03, 0.5);
  const std::string path = ::testing::TempDir() + "profile.csv";
  write_profile_csv(prof, path);
  const auto back = read_profile_csv(path);
  ASSERT_EQ(back.radii.size(), prof.radii.size());
  for (std::size_t k = 0; k < prof.radii.size(); ++k) {
    EXPECT_EQ(back.radii[k], prof.radii[k]);
    EXPECT_EQ(back.sup_perturbation[k], prof.sup_perturbation[k]);
    EXPECT_EQ(back.probes_ok[k], prof.probes_ok[k]);
  }
  EXPECT_EQ(back.gamma_hat, prof.gamma_hat);
  EXPECT_EQ(back.r_tilde, prof.r_tilde);
  std::remove(path.c_str());
}

TEST(LogSpaced, Endpoints) {
  const auto r = log_spaced(1e-3, 1.0, 4);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_DOUBLE_EQ(r.front(), 1e-3);
  EXPECT_DOUBLE_EQ(r.back(), 1.0);
  EXPECT_NEAR(r[1], 1e-2, 1e-15);
  EXPECT_THROW(log_spaced(1.0, 0.5, 4), ValidationError);
}
