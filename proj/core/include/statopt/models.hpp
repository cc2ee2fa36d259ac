#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "statopt/data.hpp"
#include "statopt/param.hpp"

namespace statopt {

struct Derivatives {
  double value = 0.0;
  Vec gradient;
  Mat hessian;  // left empty when only first order was requested
};

// A twice-differentiable objective to be minimized.
class Objective {
 public:
  using Fn = std::function<Derivatives(const Vec&, int order)>;

  Objective(std::size_t dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}

  Derivatives operator()(const Vec& theta, int order = 2) const { return fn_(theta, order); }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
  Fn fn_;
};

// ---- data generators (deterministic given seed) ----
NonResponseData gen_nonresponse(std::size_t n, double theta_star, std::uint64_t seed);
MixtureData gen_mixture(std::size_t n, std::size_t d, std::uint64_t seed);
RegressionData gen_regression(std::size_t n, std::size_t d, int p, const Vec& theta_star,
                              std::uint64_t seed);
RegressionData gen_regression(std::size_t n, std::size_t d, int p, std::uint64_t seed);
SampleSet generate(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

// ---- objectives (minimization convention) ----
Objective make_objective(const ModelSpec& spec, Level level, const SampleSet* data);
Derivatives objective(const ModelSpec& spec, Level level, const SampleSet* data,
                      const ParamPoint& theta);
Derivatives polynomial_objective(const PolynomialSpec& spec, Level level, const ParamPoint& theta);

// Maximization convention, as L and L_n are stated; d = 1.
Derivatives counterexample_objective(const CounterexampleSpec& spec, Level level,
                                     const ParamPoint& theta);

// Non-response population helpers.
double nonresponse_t1(double theta);
double nonresponse_t2(double theta);

// Mixture population moments for a scalar r = ‖θ‖.
struct MixtureMoments {
  double z_tanh;       // E[Z tanh(rZ)]
  double tanh2;        // E[tanh²(rZ)]
  double z2_tanh2;     // E[Z² tanh²(rZ)]
  double log_cosh;     // E[log cosh(rZ)]
};
MixtureMoments mixture_moments(double r);

// ---- sample MLE (d = 1) ----
ParamPoint sample_mle(const SampleSet& data);

// ---- quadrature ----
// E[g(Z)] for Z ~ N(0,1) by Gauss–Hermite with nodes scaled by √2.
double gauss_hermite_expect(const std::function<double(double)>& g, int order);

struct GaussHermiteRule {
  std::vector<double> nodes;    // physicists' nodes
  std::vector<double> weights;  // weights for ∫ e^{-x²} f(x) dx
};
const GaussHermiteRule& gauss_hermite_rule(int order);

inline constexpr int kMixtureQuadratureOrder = 100;

// ---- dataset CSV ----
void save_dataset(const SampleSet& data, const std::string& path);
NonResponseData load_nonresponse(const std::string& path);
MixtureData load_mixture(const std::string& path);
RegressionData load_regression(const std::string& path, int p);
SampleSet load_dataset(ModelId model, const std::string& path, int p = 1);

}  // namespace statopt
