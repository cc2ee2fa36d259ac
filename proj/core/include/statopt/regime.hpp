#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace statopt {

// Convergence/stability regime. Exactly one of beta (SLOW) and kappa (FAST) is set;
// gamma >= 0 means STA, gamma < 0 means UNS.
struct RegimeParams {
  std::optional<double> beta;
  std::optional<double> kappa;
  double gamma = 0.0;
  double rho = 1.0;
  double eps = 0.0;
  double alpha = 1e-3;
  double delta = 0.05;
  double inner_radius = 0.0;

  bool slow() const { return beta.has_value(); }
  bool stable() const { return gamma >= 0.0; }
  void validate() const;
};

struct RadiusPrediction {
  double radius;
  double iteration_budget;
};

RadiusPrediction predicted_radius(const RegimeParams& regime);

struct EpochSchedule {
  double b = 0.0;        // βγ/(1+β)
  double b_prime = 0.0;  // β/(1+β)
  double nu_star = 0.0;  // β/(1+β−γβ)
  std::size_t num_epochs = 0;  // ℓ_α = ⌈log(1/α)⌉
  // Indexed by ℓ = 0..ℓ_α; the ℓ = 0 slots of the length vectors are 0.
  std::vector<double> lambda;
  std::vector<double> t1;
  std::vector<double> t2;
  std::vector<double> t;
  std::vector<double> s;
};

EpochSchedule epoch_schedule(double beta, double gamma, double eps, double alpha, double c2 = 1.0);

// log(ρ/ε) / ((1+|γ|) log(1/κ)).
double fast_unstable_iteration_bound(double kappa, double gamma, double eps, double rho);

}  // namespace statopt
