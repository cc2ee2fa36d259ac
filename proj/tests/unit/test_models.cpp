#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "statopt/errors.hpp"
#include "statopt/models.hpp"

using namespace statopt;

namespace {

ModelSpec spec(ModelId id, int p = 1) {
  ModelSpec m;
  m.id = id;
  m.link_power = p;
  return m;
}

double grad1(const ModelSpec& m, Level level, const SampleSet* data, double t) {
  return objective(m, level, data, ParamPoint::scalar(t)).gradient[0];
}

}  // namespace

// ---------------------------------------------------------------- generators

TEST(Generators, NonResponseFairCoinAtZero) {
  constexpr std::size_t n = 100000;
  const auto d = gen_nonresponse(n, 0.0, 7);
  double r_mean = 0, ry2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r_mean += d.r[i];
    if (d.r[i]) {
      ASSERT_TRUE(d.y[i].has_value());
      ry2 += *d.y[i] * *d.y[i];
    } else {
      EXPECT_FALSE(d.y[i].has_value());
    }
  }
  r_mean /= n;
  ry2 /= n;
  EXPECT_NEAR(r_mean, 0.5, 3 * std::sqrt(0.25 / n));
  EXPECT_NEAR(ry2, 0.5, 0.02);
}

TEST(Generators, RejectEmpty) {
  EXPECT_THROW(gen_nonresponse(0, 0.0, 1), ValidationError);
  EXPECT_THROW(gen_mixture(0, 1, 1), ValidationError);
  EXPECT_THROW(gen_mixture(10, 0, 1), ValidationError);
  EXPECT_THROW(gen_regression(0, 1, 1, 1), ValidationError);
}

TEST(Generators, MixtureCentered) {
  constexpr std::size_t n = 20000;
  const auto d = gen_mixture(n, 3, 11);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(d.x.col(j).mean(), 0.0, 3 / std::sqrt(double(n)));
}

TEST(Generators, RegressionNoiseIndependentOfX) {
  constexpr std::size_t n = 100000;
  const auto d = gen_regression(n, 1, 1, 5);
  const Vec x = d.x.col(0);
  const double mx = x.mean(), my = d.y.mean();
  const double cov = ((x.array() - mx) * (d.y.array() - my)).mean();
  const double corr = cov / std::sqrt((x.array() - mx).square().mean() * (d.y.array() - my).square().mean());
  EXPECT_NEAR(corr, 0.0, 3 / std::sqrt(double(n)));
  EXPECT_NEAR((d.y.array() * x.array().square()).mean(), 0.0, 0.05);
}

TEST(Generators, DeterministicInSeed) {
  const auto a = gen_mixture(100, 2, 3), b = gen_mixture(100, 2, 3), c = gen_mixture(100, 2, 4);
  EXPECT_EQ(a.x, b.x);
  EXPECT_NE(a.x, c.x);
}

// ---------------------------------------------------------------- objectives

TEST(Objectives, NonResponseMissingRecordAtZero) {
  NonResponseData d;
  d.r = {0};
  d.y = {std::nullopt};
  const SampleSet s = d;
  const auto v = objective(spec(ModelId::NonResponse), Level::Sample, &s, ParamPoint::scalar(0.0));
  EXPECT_NEAR(-v.value, std::log(0.5), 1e-15);  // objectives are negated log-likelihoods
}

TEST(Objectives, NonResponsePopulationGradientAtOne) {
  // Log-likelihood gradient 1/(4(2√2−1)) − 1/2; minimized objective carries the opposite sign.
  const double expected = 1 / (4 * (2 * std::sqrt(2.0) - 1)) - 0.5;
  EXPECT_NEAR(expected, -0.363271, 1e-6);
  EXPECT_NEAR(-grad1(spec(ModelId::NonResponse), Level::Population, nullptr, 1.0), expected, 1e-12);
}

TEST(Objectives, PopulationGradientVanishesAtZero) {
  for (ModelId id : {ModelId::NonResponse, ModelId::Mixture, ModelId::Regression}) {
    EXPECT_EQ(grad1(spec(id), Level::Population, nullptr, 0.0), 0.0) << to_string(id);
  }
}

TEST(Objectives, RegressionPopulationValue) {
  EXPECT_DOUBLE_EQ(objective(spec(ModelId::Regression), Level::Population, nullptr, ParamPoint::scalar(1.0)).value,
                   2.0);
  // p = 2: (1 + 7!!·θ⁸)/2 with 7!! = 105.
  EXPECT_DOUBLE_EQ(
      objective(spec(ModelId::Regression, 2), Level::Population, nullptr, ParamPoint::scalar(1.0)).value, 53.0);
}

TEST(Objectives, DoubleFactorial) {
  EXPECT_EQ(double_factorial_4p_minus_1(1), 3.0);
  EXPECT_EQ(double_factorial_4p_minus_1(2), 105.0);
  EXPECT_EQ(double_factorial_4p_minus_1(3), 10395.0);
}

TEST(Objectives, FiniteDifferencesAcrossModels) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto nr = std::make_shared<SampleSet>(gen_nonresponse(300, 0.0, 1));
  const auto mx = std::make_shared<SampleSet>(gen_mixture(300, 1, 2));
  const auto rg = std::make_shared<SampleSet>(gen_regression(300, 1, 2, 3));
  struct Case {
    ModelSpec m;
    Level level;
    const SampleSet* data;
  };
  const std::vector<Case> cases{{spec(ModelId::NonResponse), Level::Population, nullptr},
                                {spec(ModelId::NonResponse), Level::Sample, nr.get()},
                                {spec(ModelId::Mixture), Level::Population, nullptr},
                                {spec(ModelId::Mixture), Level::Sample, mx.get()},
                                {spec(ModelId::Regression, 2), Level::Population, nullptr},
                                {spec(ModelId::Regression, 2), Level::Sample, rg.get()}};
  for (const auto& c : cases) {
    for (int k = 0; k < 50; ++k) {
      const double t = u(rng);
      auto value = [&](double x) { return objective(c.m, c.level, c.data, ParamPoint::scalar(x)).value; };
      auto grad = [&](double x) { return grad1(c.m, c.level, c.data, x); };
      const auto d = objective(c.m, c.level, c.data, ParamPoint::scalar(t));
      const double fd_g = oracle::diff(value, t), fd_h = oracle::diff(grad, t);
      EXPECT_NEAR(d.gradient[0], fd_g, 1e-5 * std::max(1.0, std::abs(fd_g))) << to_string(c.m.id);
      EXPECT_NEAR(d.hessian(0, 0), fd_h, 1e-5 * std::max(1.0, std::abs(fd_h))) << to_string(c.m.id);
    }
  }
}

TEST(Objectives, MixtureQuadratureMatchesMonteCarlo) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  constexpr int draws = 1000000;
  std::vector<double> xs(draws);
  for (auto& x : xs) x = z(rng);
  for (double t : {0.1, 0.2, 0.3}) {
    // Minimized objective: ∇ = θ − E[X tanh(θX)] with X ~ N(0, 1).
    double mean = 0, sq = 0;
    for (double x : xs) {
      const double g = t - x * std::tanh(t * x);
      mean += g;
      sq += g * g;
    }
    mean /= draws;
    const double se = std::sqrt((sq / draws - mean * mean) / draws);
    EXPECT_NEAR(grad1(spec(ModelId::Mixture), Level::Population, nullptr, t), mean, 3 * se);
  }
}

TEST(Objectives, NonResponseHessianIdentity) {
  for (int k = -50; k <= 50; ++k) {
    const double t = k / 100.0;
    const double h = objective(spec(ModelId::NonResponse), Level::Population, nullptr, ParamPoint::scalar(t))
                         .hessian(0, 0);
    EXPECT_NEAR(std::abs(h), std::abs(nonresponse_t1(t) + t * t * nonresponse_t2(t)), 1e-10);
  }
}

TEST(Objectives, TanhSandwich) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 10000; ++k) {
    const double x = u(rng), x2 = x * x;
    const double slack = 4 * 2.220446049250313e-16 * x2;
    const double mid = x * std::tanh(x);
    EXPECT_LE(x2 - x2 * x2 / 3, mid + slack);
    EXPECT_LE(mid, x2 - x2 * x2 / 3 + 2 * x2 * x2 * x2 / 15 + slack);
  }
}

TEST(Polynomial, SampleMinimizerAndStationarity) {
  PolynomialSpec s{4, 2, 1e-4, 1};
  EXPECT_NEAR(std::pow(s.eps_n, 1 / (s.p - s.q)), 0.01, 1e-15);
  EXPECT_NEAR(polynomial_objective(s, Level::Sample, ParamPoint::scalar(0.01)).gradient[0], 0.0, 1e-18);
  // Population level ignores eps_n; at eps_n = 0 the two coincide.
  PolynomialSpec z{4, 2, 0.0, 1};
  for (double t : {-0.4, 0.1, 0.7}) {
    const auto a = polynomial_objective(z, Level::Sample, ParamPoint::scalar(t));
    const auto b = polynomial_objective(z, Level::Population, ParamPoint::scalar(t));
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.gradient, b.gradient);
  }
}

TEST(Polynomial, RejectsBadExponents) {
  EXPECT_THROW((PolynomialSpec{3, 2, 0.1, 1}.validate()), ValidationError);
  EXPECT_THROW((PolynomialSpec{5, 1, 0.1, 1}.validate()), ValidationError);
}

TEST(Counterexample, ValuesAndSampleRoot) {
  const CounterexampleSpec pop{1};
  EXPECT_EQ(counterexample_objective(pop, Level::Population, ParamPoint::scalar(2.0)).value, 0.0);
  EXPECT_EQ(counterexample_objective(pop, Level::Population, ParamPoint::scalar(0.0)).value, 0.0);

  const CounterexampleSpec s{10000};
  auto g = [&](double t) { return counterexample_objective(s, Level::Sample, ParamPoint::scalar(t)).gradient[0]; };
  const oracle::Counterexample ref{0.01};
  const double root = oracle::bisect([&](double t) { return ref.d1(t); }, 0.03, 0.3);
  EXPECT_NEAR(g(root), 0.0, 1e-12);
  // Stationary point near √(a/2), i.e. n^{-1/4}/√2.
  EXPECT_NEAR(root, std::sqrt(0.005), 0.01);
  for (double t : {0.03, 0.1, 0.5, 1.7}) EXPECT_NEAR(g(t), ref.d1(t), 1e-12);
}

// ---------------------------------------------------------------- sample MLE

TEST(SampleMle, MixtureTwoPoints) {
  MixtureData d;
  d.x = Mat(2, 1);
  d.x << 2, -2;
  const double ref = oracle::bisect([](double t) { return t - 2 * std::tanh(2 * t); }, 1.0, 2.0);
  EXPECT_NEAR(ref, 1.99866, 1e-5);
  EXPECT_NEAR(sample_mle(d)[0], ref, 1e-10);
}

TEST(SampleMle, RegressionClosedForm) {
  RegressionData d;
  d.x = Mat::Ones(2, 1);
  d.y = Vec::Ones(2);
  EXPECT_NEAR(sample_mle(d)[0], 1.0, 1e-15);
  d.y = -Vec::Ones(2);
  EXPECT_EQ(sample_mle(d)[0], 0.0);
}

TEST(SampleMle, GradientResidualSmall) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 20 + seed % 30;
    for (const SampleSet& s : {SampleSet(gen_mixture(n, 1, seed)), SampleSet(gen_regression(n, 1, 1, seed)),
                               SampleSet(gen_nonresponse(n, 0.0, seed))}) {
      const auto m = spec_of(s);
      const double t = sample_mle(s)[0];
      EXPECT_GE(t, 0.0);
      EXPECT_LE(std::abs(grad1(m, Level::Sample, &s, t)), 1e-9) << to_string(m.id) << " seed " << seed;
    }
  }
}

TEST(SampleMle, RejectsMultivariate) { EXPECT_THROW(sample_mle(gen_mixture(10, 2, 1)), ValidationError); }

// ---------------------------------------------------------------- quadrature

TEST(GaussHermite, Moments) {
  EXPECT_NEAR(gauss_hermite_expect([](double x) { return x; }, 20), 0.0, 1e-15);
  for (int order : {10, 50, 100, 200}) {
    EXPECT_NEAR(gauss_hermite_expect([](double x) { return x * x; }, order), 1.0, 1e-12);
  }
  // θ − θ³ ≤ E[Z tanh(θZ)] ≤ θ − θ³ + 2θ⁵ from the tanh sandwich and Gaussian moments.
  const double t = 0.2;
  const double v = gauss_hermite_expect([t](double x) { return x * std::tanh(t * x); }, 100);
  EXPECT_GE(v, t - t * t * t);
  EXPECT_LE(v, t - t * t * t + 2 * std::pow(t, 5));
}

TEST(GaussHermite, OrderRange) {
  EXPECT_THROW(gauss_hermite_expect([](double x) { return x; }, 9), ValidationError);
  EXPECT_THROW(gauss_hermite_expect([](double x) { return x; }, 201), ValidationError);
  EXPECT_ANY_THROW(gauss_hermite_expect([](double) { return NAN; }, 20));
}

// ---------------------------------------------------------------- dataset CSV

TEST(DatasetCsv, RoundTrip) {
  const std::string dir = ::testing::TempDir();
  const auto nr = gen_nonresponse(50, 0.0, 1);
  save_dataset(nr, dir + "nr.csv");
  const auto nr2 = load_nonresponse(dir + "nr.csv");
  EXPECT_EQ(nr.r, nr2.r);
  EXPECT_EQ(nr.y, nr2.y);

  const auto rg = gen_regression(40, 2, 2, 1);
  save_dataset(rg, dir + "rg.csv");
  const auto rg2 = load_regression(dir + "rg.csv", 2);
  EXPECT_EQ(rg.x, rg2.x);
  EXPECT_EQ(rg.y, rg2.y);
  EXPECT_EQ(rg2.p, 2);

  const auto mx = gen_mixture(30, 3, 1);
  save_dataset(mx, dir + "mx.csv");
  EXPECT_EQ(load_mixture(dir + "mx.csv").x, mx.x);
  std::remove((dir + "nr.csv").c_str());
  std::remove((dir + "rg.csv").c_str());
  std::remove((dir + "mx.csv").c_str());
}
