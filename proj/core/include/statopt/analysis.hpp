#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "statopt/operator.hpp"

namespace statopt {

enum class FitDomain { LogLog, SemiLog, Linear };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double residual_norm = 0.0;
  FitDomain domain = FitDomain::LogLog;
  std::size_t points = 0;
};

// Least squares y = a + b x on raw inputs.
RateFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);
// log y = a + b log x; inputs must be positive.
RateFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);
// log y = a + b x; ys must be positive.
RateFit fit_semilog(const std::vector<double>& xs, const std::vector<double>& ys);

enum class ConvergenceMode { Fast, Slow };
const char* to_string(ConvergenceMode m);

struct ConvergenceClass {
  ConvergenceMode mode = ConvergenceMode::Slow;
  double rate = 0.0;  // κ̂ for FAST, β̂ for SLOW
  RateFit fit;        // the selected fit
  RateFit semilog;
  RateFit loglog;
};

inline constexpr std::size_t kTransientIterations = 5;
inline constexpr double kFastMargin = 0.02;

ConvergenceClass classify_convergence(const IterationTrace& trace);
// Same rule on a bare error sequence e_0, e_1, ...
ConvergenceClass classify_errors(const std::vector<double>& errors);

struct StabilityProfile {
  std::vector<double> radii;
  std::vector<double> sup_perturbation;
  std::vector<std::size_t> probes_ok;
  std::vector<bool> valid;
  std::size_t probes_per_radius = 0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  std::optional<RateFit> fit;
  std::optional<double> gamma_hat;
  std::optional<double> r_tilde;
};

// Probes the sphere ‖θ − θ*‖ = r at each radius: ±r in d = 1, normalized Gaussian
// directions (shared across radii) otherwise. The fit uses radii in [fit_lo, fit_hi].
StabilityProfile perturbation_profile(const OperatorHandle& sample, const OperatorHandle& population,
                                      const std::vector<double>& radii, std::size_t probes_per_radius,
                                      std::uint64_t seed, double fit_lo, double fit_hi);

StabilityProfile perturbation_profile(std::shared_ptr<const SampleSet> data, Algorithm algorithm,
                                      const AlgorithmConfig& config, const std::vector<double>& radii,
                                      std::size_t probes_per_radius, std::uint64_t seed, double fit_lo,
                                      double fit_hi);

// Largest profiled radius whose s_k exceeds twice the fitted power law; the smallest
// radius when there is none. Requires γ̂ < 0.
double detect_inner_radius(const StabilityProfile& profile);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

void write_profile_csv(const StabilityProfile& profile, const std::string& path);
StabilityProfile read_profile_csv(const std::string& path);

}  // namespace statopt
