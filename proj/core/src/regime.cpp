#include "statopt/regime.hpp"

#include <algorithm>
#include <cmath>

#include "statopt/errors.hpp"

namespace statopt {

void RegimeParams::validate() const {
  if (beta.has_value() == kappa.has_value()) {
    throw ValidationError("regime: exactly one of beta (SLOW) or kappa (FAST) must be set");
  }
  if (beta && !(*beta > 0.0)) throw ValidationError("regime: beta must be positive");
  if (kappa && !(*kappa > 0.0 && *kappa < 1.0)) throw ValidationError("regime: kappa must lie in (0,1)");
  if (!std::isfinite(gamma)) throw ValidationError("regime: gamma must be finite");
  if (!(eps > 0.0) || !(rho > 0.0) || !(alpha > 0.0) || !(delta > 0.0)) {
    throw ValidationError("regime: eps, rho, alpha and delta must be positive");
  }
  if (!(delta < 1.0)) throw ValidationError("regime: delta must lie in (0,1)");
  if (!(inner_radius >= 0.0) || !(inner_radius < rho)) {
    throw ValidationError("regime: inner_radius must lie in [0, rho)");
  }
}

RadiusPrediction predicted_radius(const RegimeParams& r) {
  r.validate();
  const double g = r.gamma;
  if (r.slow()) {
    const double beta = *r.beta;
    const double denom = 1.0 + beta - g * beta;
    if (!(denom > 0.0)) throw ValidationError("regime: requires 1 + beta - gamma*beta > 0");
    const double exponent = beta / denom;
    if (r.stable()) {
      return {std::pow(r.eps, exponent - r.alpha),
              std::pow(r.eps, -1.0 / denom) * std::log(1.0 / r.alpha)};
    }
    return {std::max(std::pow(r.eps, exponent), r.inner_radius),
            std::pow(r.eps, -1.0 / (1.0 + beta))};
  }
  const double kappa = *r.kappa;
  if (r.stable()) return {r.eps, std::log(1.0 / r.eps)};
  const double a = std::abs(g);
  return {std::max((2.0 - kappa) / (1.0 - kappa) * std::pow(r.eps, 1.0 / (1.0 + a)), r.inner_radius),
          std::log(r.rho / r.eps) / ((1.0 + a) * std::log(1.0 / kappa))};
}

EpochSchedule epoch_schedule(double beta, double gamma, double eps, double alpha, double c2) {
  if (!(beta > 0.0)) throw ValidationError("epoch_schedule: beta must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0 / beta)) {
    throw ValidationError("epoch_schedule: gamma must lie in [0, 1/beta]");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("epoch_schedule: eps must lie in (0,1)");
  if (!(c2 > 0.0)) throw ValidationError("epoch_schedule: c2 must be positive");

  EpochSchedule s;
  s.b = beta * gamma / (1.0 + beta);
  s.b_prime = beta / (1.0 + beta);
  s.nu_star = beta / (1.0 + beta - gamma * beta);
  if (!(alpha > 0.0 && alpha < s.nu_star)) {
    throw ValidationError("epoch_schedule: alpha must lie in (0, nu_star)");
  }
  s.num_epochs = static_cast<std::size_t>(std::ceil(std::log(1.0 / alpha)));

  const double C = std::pow(c2 * std::pow(2.0, gamma), -1.0 / (1.0 + beta));
  const double C_prime = std::pow(C, (1.0 + beta + beta * gamma) / (1.0 + beta));
  const std::size_t L = s.num_epochs;

  s.lambda.assign(L + 1, 0.0);
  for (std::size_t l = 0; l < L; ++l) s.lambda[l + 1] = s.b * s.lambda[l] + s.b_prime;

  s.t1.assign(L + 1, 0.0);
  s.t2.assign(L + 1, 0.0);
  s.t.assign(L + 1, 0.0);
  s.s.assign(L + 1, 0.0);
  for (std::size_t l = 1; l <= L; ++l) {
    s.t1[l] = C * std::pow(eps, -(s.lambda[l - 1] * gamma + 1.0) / (1.0 + beta));
    s.t2[l] = C_prime * std::pow(eps, -(s.lambda[l] * gamma + 1.0) / (1.0 + beta));
    s.t[l] = std::ceil(s.t1[l] + s.t2[l]);
    s.s[l] = s.s[l - 1] + s.t[l];
  }
  return s;
}

double fast_unstable_iteration_bound(double kappa, double gamma, double eps, double rho) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ValidationError("kappa must lie in (0,1)");
  if (!(gamma < 0.0)) throw ValidationError("gamma must be negative for an unstable regime");
  if (!(eps > 0.0) || !(rho > 0.0)) throw ValidationError("eps and rho must be positive");
  if (eps > rho) throw ValidationError("eps must not exceed rho");
  return std::log(rho / eps) / ((1.0 + std::abs(gamma)) * std::log(1.0 / kappa));
}

}  // namespace statopt
