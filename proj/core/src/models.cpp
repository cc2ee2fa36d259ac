#include "statopt/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "statopt/errors.hpp"

namespace statopt {

// ---------------------------------------------------------------- names

std::string to_string(ModelId m) {
  switch (m) {
    case ModelId::NonResponse: return "nonresponse";
    case ModelId::Mixture: return "mixture";
    case ModelId::Regression: return "regression";
    case ModelId::Polynomial: return "polynomial";
    case ModelId::Counterexample: return "counterexample";
  }
  return "unknown";
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GD: return "GD";
    case Algorithm::GA: return "GA";
    case Algorithm::NM: return "NM";
    case Algorithm::CNM: return "CNM";
    case Algorithm::EM: return "EM";
  }
  return "unknown";
}

std::string to_string(Level l) { return l == Level::Population ? "population" : "sample"; }

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

ModelId parse_model(std::string_view s) {
  const auto v = lower(s);
  if (v == "nonresponse" || v == "non-response") return ModelId::NonResponse;
  if (v == "mixture") return ModelId::Mixture;
  if (v == "regression" || v == "nlr") return ModelId::Regression;
  if (v == "polynomial") return ModelId::Polynomial;
  if (v == "counterexample") return ModelId::Counterexample;
  throw ValidationError("unknown model '" + std::string(s) + "'");
}

Algorithm parse_algorithm(std::string_view s) {
  const auto v = lower(s);
  if (v == "gd") return Algorithm::GD;
  if (v == "ga") return Algorithm::GA;
  if (v == "nm" || v == "newton") return Algorithm::NM;
  if (v == "cnm") return Algorithm::CNM;
  if (v == "em") return Algorithm::EM;
  throw ValidationError("unknown algorithm '" + std::string(s) + "'");
}

Level parse_level(std::string_view s) {
  const auto v = lower(s);
  if (v == "population" || v == "pop") return Level::Population;
  if (v == "sample") return Level::Sample;
  throw ValidationError("unknown level '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- specs

void PolynomialSpec::validate() const {
  if (!(q >= 2.0)) throw ValidationError("polynomial: q must be at least 2");
  if (!(p > q + 1.0)) throw ValidationError("polynomial: p must exceed q + 1");
  if (!(eps_n >= 0.0)) throw ValidationError("polynomial: eps_n must be nonnegative");
  if (dim < 1) throw ValidationError("polynomial: dimension must be positive");
}

void CounterexampleSpec::validate() const {
  if (n < 1) throw ValidationError("counterexample: n must be at least 1");
}

void ModelSpec::validate() const {
  if (dim < 1) throw ValidationError("model: dimension must be positive");
  switch (id) {
    case ModelId::NonResponse:
    case ModelId::Counterexample:
      if (dim != 1) throw ValidationError(to_string(id) + " model is one-dimensional");
      break;
    case ModelId::Regression:
      if (link_power < 1 || link_power > 6) throw ValidationError("regression: link power must lie in [1, 6]");
      break;
    case ModelId::Polynomial:
      if (!(poly_p >= 2.0)) throw ValidationError("polynomial: p must be at least 2");
      break;
    case ModelId::Mixture:
      break;
  }
}

ModelId model_of(const SampleSet& data) {
  return std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NonResponseData>) return ModelId::NonResponse;
        else if constexpr (std::is_same_v<T, MixtureData>) return ModelId::Mixture;
        else if constexpr (std::is_same_v<T, RegressionData>) return ModelId::Regression;
        else if constexpr (std::is_same_v<T, PolynomialSpec>) return ModelId::Polynomial;
        else return ModelId::Counterexample;
      },
      data);
}

ModelSpec spec_of(const SampleSet& data) {
  ModelSpec s;
  s.id = model_of(data);
  if (const auto* m = std::get_if<MixtureData>(&data)) s.dim = m->dim();
  if (const auto* r = std::get_if<RegressionData>(&data)) {
    s.dim = r->dim();
    s.link_power = r->p;
  }
  if (const auto* p = std::get_if<PolynomialSpec>(&data)) {
    s.dim = p->dim;
    s.poly_p = p->p;
    s.poly_q = p->q;
  }
  return s;
}

std::size_t sample_size(const SampleSet& data) {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PolynomialSpec>) return 0;
        else if constexpr (std::is_same_v<T, CounterexampleSpec>) return d.n;
        else return d.size();
      },
      data);
}

double double_factorial_4p_minus_1(int p) {
  if (p < 1) throw ValidationError("double factorial: p must be positive");
  std::uint64_t acc = 1;
  for (std::uint64_t k = 4 * static_cast<std::uint64_t>(p) - 1; k > 1; k -= 2) acc *= k;
  return static_cast<double>(acc);
}

// ---------------------------------------------------------------- generators

NonResponseData gen_nonresponse(std::size_t n, double theta_star, std::uint64_t seed) {
  if (n < 1) throw ValidationError("gen_nonresponse: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  NonResponseData out;
  out.r.resize(n);
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = normal(rng);
    const double prob = std::exp(-theta_star * theta_star * y * y / 2.0 - std::numbers::ln2);
    const bool observed = unif(rng) < prob;
    out.r[i] = observed ? 1 : 0;
    if (observed) out.y[i] = y;
  }
  return out;
}

MixtureData gen_mixture(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ValidationError("gen_mixture: n and d must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MixtureData out{Mat(n, d)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.x(i, j) = normal(rng);
  return out;
}

namespace {

double ipow(double x, int k) {
  double result = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

}  // namespace

RegressionData gen_regression(std::size_t n, std::size_t d, int p, const Vec& theta_star,
                              std::uint64_t seed) {
  if (n < 1 || d < 1) throw ValidationError("gen_regression: n and d must be at least 1");
  if (p < 1) throw ValidationError("gen_regression: p must be at least 1");
  if (static_cast<std::size_t>(theta_star.size()) != d) {
    throw ValidationError("gen_regression: theta_star dimension mismatch");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  RegressionData out{Mat(n, d), Vec(n), p};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) out.x(i, j) = normal(rng);
    const double signal = ipow(out.x.row(i).dot(theta_star), 2 * p);
    out.y[i] = signal + normal(rng);
  }
  return out;
}

RegressionData gen_regression(std::size_t n, std::size_t d, int p, std::uint64_t seed) {
  return gen_regression(n, d, p, Vec::Zero(static_cast<Eigen::Index>(d)), seed);
}

SampleSet generate(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  switch (spec.id) {
    case ModelId::NonResponse: return gen_nonresponse(n, 0.0, seed);
    case ModelId::Mixture: return gen_mixture(n, spec.dim, seed);
    case ModelId::Regression: return gen_regression(n, spec.dim, spec.link_power, seed);
    case ModelId::Polynomial:
      return PolynomialSpec{spec.poly_p, spec.poly_q, 1.0 / std::sqrt(static_cast<double>(n)), spec.dim};
    case ModelId::Counterexample: return CounterexampleSpec{n};
  }
  throw ValidationError("generate: unsupported model");
}

// ---------------------------------------------------------------- non-response

double nonresponse_t1(double theta) {
  const double s2 = theta * theta + 1.0;
  const double s = std::sqrt(s2);
  return 0.5 - 1.0 / (2.0 * s2 * (2.0 * s - 1.0));
}

double nonresponse_t2(double theta) {
  const double s2 = theta * theta + 1.0;
  const double s = std::sqrt(s2);
  return (3.0 + 1.0 / (2.0 * s - 1.0)) / (2.0 * s2 * s2 * (2.0 * s - 1.0));
}

namespace {

struct NonResponseStats {
  double a;  // mean R·Y²
  double b;  // mean (1 − R)
};

NonResponseStats nonresponse_stats(const NonResponseData& d) {
  if (d.r.empty() || d.r.size() != d.y.size()) throw ValidationError("non-response data is empty or ragged");
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < d.r.size(); ++i) {
    if (d.r[i]) {
      if (!d.y[i] || !std::isfinite(*d.y[i])) throw ValidationError("non-response: observed record lacks a finite y");
      a += *d.y[i] * *d.y[i];
    } else {
      b += 1.0;
    }
  }
  const double n = static_cast<double>(d.r.size());
  return {a / n, b / n};
}

// value = A(θ²+1)/2 + c0 − B log(1 − 1/(2s)), s = √(θ²+1).
Derivatives nonresponse_eval(double a, double b, double c0, double theta) {
  const double s2 = theta * theta + 1.0;
  const double s = std::sqrt(s2);
  const double u = 1.0 / (s2 * (2.0 * s - 1.0));
  const double g3 = 2.0 * s2 * s - s2;
  const double du = -(6.0 * s2 - 2.0 * s) / (g3 * g3);
  Derivatives out;
  out.value = a * s2 / 2.0 + c0 - b * std::log(1.0 - 1.0 / (2.0 * s));
  out.gradient = Vec::Constant(1, a * theta - b * theta * u);
  out.hessian = Mat::Constant(1, 1, a - b * (u + theta * theta / s * du));
  return out;
}

// ---------------------------------------------------------------- mixture

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

Derivatives mixture_sample_eval(const MixtureData& data, const Vec& theta, int order) {
  const Vec z = data.x * theta;
  const Eigen::ArrayXd t = z.array().tanh();
  const double n = static_cast<double>(data.size());
  Derivatives out;
  double lc = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) lc += log_cosh(z[i]);
  out.value = 0.5 * theta.squaredNorm() - lc / n;
  out.gradient = theta - data.x.transpose() * t.matrix() / n;
  if (order >= 2) {
    const Eigen::ArrayXd sech2 = 1.0 - t.square();
    const Eigen::Index d = theta.size();
    out.hessian = Mat::Identity(d, d) - data.x.transpose() * (data.x.array().colwise() * sech2).matrix() / n;
  }
  return out;
}

}  // namespace

MixtureMoments mixture_moments(double r) {
  r = std::abs(r);
  if (r == 0.0) return {0.0, 0.0, 0.0, 0.0};
  const auto& rule = gauss_hermite_rule(kMixtureQuadratureOrder);
  MixtureMoments m{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = std::numbers::sqrt2 * rule.nodes[i];
    const double w = rule.weights[i];
    const double t = std::tanh(r * z);
    m.z_tanh += w * z * t;
    m.tanh2 += w * t * t;
    m.z2_tanh2 += w * z * z * t * t;
    m.log_cosh += w * log_cosh(r * z);
  }
  const double norm = 1.0 / std::sqrt(std::numbers::pi);
  m.z_tanh *= norm;
  m.tanh2 *= norm;
  m.z2_tanh2 *= norm;
  m.log_cosh *= norm;
  return m;
}

namespace {

// Rotational symmetry: with u = θ/‖θ‖, E[X tanh(θᵀX)] = u·E[Z tanh(‖θ‖Z)] and
// I − E[XXᵀ sech²(θᵀX)] = E[Z² tanh²] uuᵀ + E[tanh²](I − uuᵀ).
Derivatives mixture_population_eval(const Vec& theta, int order) {
  const Eigen::Index d = theta.size();
  const double r = theta.norm();
  const MixtureMoments m = mixture_moments(r);
  Derivatives out;
  out.value = 0.5 * r * r - m.log_cosh;
  if (r == 0.0) {
    out.gradient = Vec::Zero(d);
    if (order >= 2) out.hessian = Mat::Zero(d, d);
    return out;
  }
  const Vec u = theta / r;
  out.gradient = theta - m.z_tanh * u;
  if (order >= 2) {
    const Mat uu = u * u.transpose();
    out.hessian = m.z2_tanh2 * uu + m.tanh2 * (Mat::Identity(d, d) - uu);
  }
  return out;
}

// ---------------------------------------------------------------- regression

struct RegressionStats {
  double a;  // mean X^{4p}
  double b;  // mean Y X^{2p}
  double c;  // mean Y²
};

RegressionStats regression_stats(const RegressionData& d) {
  if (d.size() == 0) throw ValidationError("regression data is empty");
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x2p = ipow(d.x(static_cast<Eigen::Index>(i), 0), 2 * d.p);
    const double y = d.y[static_cast<Eigen::Index>(i)];
    a += x2p * x2p;
    b += y * x2p;
    c += y * y;
  }
  const double n = static_cast<double>(d.size());
  return {a / n, b / n, c / n};
}

Derivatives regression_scalar_eval(const RegressionStats& s, int p, double theta) {
  const double t2p = ipow(theta, 2 * p);
  Derivatives out;
  out.value = 0.5 * (s.c - 2.0 * s.b * t2p + s.a * t2p * t2p);
  out.gradient = Vec::Constant(1, 2.0 * p * (s.a * ipow(theta, 4 * p - 1) - s.b * ipow(theta, 2 * p - 1)));
  out.hessian = Mat::Constant(
      1, 1, 2.0 * p * ((4.0 * p - 1.0) * s.a * ipow(theta, 4 * p - 2) - (2.0 * p - 1.0) * s.b * ipow(theta, 2 * p - 2)));
  return out;
}

Derivatives regression_sample_eval(const RegressionData& data, const Vec& theta, int order) {
  const int p = data.p;
  const Vec z = data.x * theta;
  const double n = static_cast<double>(data.size());
  Eigen::ArrayXd wg(z.size());
  Eigen::ArrayXd wh(z.size());
  double value = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    const double yi = data.y[i];
    const double z2p = ipow(zi, 2 * p);
    const double resid = yi - z2p;
    value += resid * resid;
    wg[i] = ipow(zi, 4 * p - 1) - yi * ipow(zi, 2 * p - 1);
    if (order >= 2) wh[i] = (4.0 * p - 1.0) * ipow(zi, 4 * p - 2) - (2.0 * p - 1.0) * yi * ipow(zi, 2 * p - 2);
  }
  Derivatives out;
  out.value = value / (2.0 * n);
  out.gradient = (2.0 * p / n) * (data.x.transpose() * wg.matrix());
  if (order >= 2) {
    out.hessian = (2.0 * p / n) * (data.x.transpose() * (data.x.array().colwise() * wh).matrix());
  }
  return out;
}

Derivatives regression_population_eval(int p, const Vec& theta, int order) {
  const double k = double_factorial_4p_minus_1(p);
  const double r2 = theta.squaredNorm();
  const Eigen::Index d = theta.size();
  Derivatives out;
  out.value = 0.5 * (1.0 + k * ipow(r2, 2 * p));
  out.gradient = 2.0 * p * k * ipow(r2, 2 * p - 1) * theta;
  if (order >= 2) {
    out.hessian = 2.0 * p * k *
                  (ipow(r2, 2 * p - 1) * Mat::Identity(d, d) +
                   (4.0 * p - 2.0) * ipow(r2, 2 * p - 2) * theta * theta.transpose());
  }
  return out;
}

// ---------------------------------------------------------------- polynomial

// r^k with the convention 0^0 = 1 and 0^k = 0 for k > 0.
double rpow(double r, double k) {
  if (k == 0.0) return 1.0;
  if (r == 0.0) return 0.0;
  return std::pow(r, k);
}

Derivatives polynomial_eval(double p, double q, double eps, const Vec& theta, int order) {
  const double r = theta.norm();
  const Eigen::Index d = theta.size();
  Derivatives out;
  out.value = rpow(r, p) / p - (eps == 0.0 ? 0.0 : eps * rpow(r, q) / q);
  const double radial = rpow(r, p - 2.0) - (eps == 0.0 ? 0.0 : eps * rpow(r, q - 2.0));
  out.gradient = radial * theta;
  if (order >= 2) {
    // The θθᵀ coefficient behaves like r^{p−4}, r^{q−4}; it vanishes at 0 when multiplied by θθᵀ.
    double outer = 0.0;
    if (r > 0.0) {
      outer = (p - 2.0) * std::pow(r, p - 4.0);
      if (eps != 0.0) outer -= eps * (q - 2.0) * std::pow(r, q - 4.0);
    }
    out.hessian = radial * Mat::Identity(d, d) + outer * theta * theta.transpose();
  }
  return out;
}

// ---------------------------------------------------------------- counterexample

// L_n(θ) = −(θ⁶ − 4θ⁵ + (4−a)θ⁴ + 4aθ³ − 4aθ²), a = 1/√n; a = 0 gives L.
Derivatives counterexample_eval(double a, double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t, t6 = t5 * t;
  Derivatives out;
  out.value = -(t6 - 4.0 * t5 + (4.0 - a) * t4 + 4.0 * a * t3 - 4.0 * a * t2);
  out.gradient = Vec::Constant(1, -(6.0 * t5 - 20.0 * t4 + 4.0 * (4.0 - a) * t3 + 12.0 * a * t2 - 8.0 * a * t));
  out.hessian = Mat::Constant(1, 1, -(30.0 * t4 - 80.0 * t3 + 12.0 * (4.0 - a) * t2 + 24.0 * a * t - 8.0 * a));
  return out;
}

double counterexample_a(const CounterexampleSpec& spec, Level level) {
  return level == Level::Sample ? 1.0 / std::sqrt(static_cast<double>(spec.n)) : 0.0;
}

Derivatives negate(Derivatives d) {
  d.value = -d.value;
  d.gradient = -d.gradient;
  if (d.hessian.size() > 0) d.hessian = -d.hessian;
  return d;
}

void require_dim(const Vec& theta, std::size_t dim) {
  if (static_cast<std::size_t>(theta.size()) != dim) throw ValidationError("objective: dimension mismatch");
}

}  // namespace

Derivatives polynomial_objective(const PolynomialSpec& spec, Level level, const ParamPoint& theta) {
  spec.validate();
  if (theta.dim() != spec.dim) throw ValidationError("polynomial: dimension mismatch");
  return polynomial_eval(spec.p, spec.q, level == Level::Sample ? spec.eps_n : 0.0, theta.coords(), 2);
}

Derivatives counterexample_objective(const CounterexampleSpec& spec, Level level, const ParamPoint& theta) {
  spec.validate();
  if (theta.dim() != 1) throw ValidationError("counterexample: one-dimensional parameter required");
  return counterexample_eval(counterexample_a(spec, level), theta[0]);
}

Objective make_objective(const ModelSpec& spec_in, Level level, const SampleSet* data) {
  if (level == Level::Sample && !data) throw ValidationError("sample-level objective requires data");
  if (level == Level::Population && data) throw ValidationError("population-level objective takes no data");
  ModelSpec spec = data ? spec_of(*data) : spec_in;
  if (data && spec.id != spec_in.id) throw ValidationError("objective: model/data mismatch");
  spec.validate();
  const std::size_t dim = spec.dim;

  switch (spec.id) {
    case ModelId::NonResponse: {
      if (level == Level::Population) {
        return Objective(1, [](const Vec& th, int) {
          require_dim(th, 1);
          auto d = nonresponse_eval(0.5, 0.5, 0.0, th[0]);
          d.value = (th[0] * th[0] + 1.0) / 4.0 - 0.5 * std::log(1.0 - 1.0 / (2.0 * std::sqrt(th[0] * th[0] + 1.0)));
          return d;
        });
      }
      const auto s = nonresponse_stats(std::get<NonResponseData>(*data));
      return Objective(1, [s](const Vec& th, int) {
        require_dim(th, 1);
        return nonresponse_eval(s.a, s.b, (1.0 - s.b) * std::numbers::ln2, th[0]);
      });
    }
    case ModelId::Mixture: {
      if (level == Level::Population) {
        return Objective(dim, [dim](const Vec& th, int order) {
          require_dim(th, dim);
          return mixture_population_eval(th, order);
        });
      }
      const auto* md = &std::get<MixtureData>(*data);
      if (md->size() == 0) throw ValidationError("mixture data is empty");
      return Objective(dim, [md, dim](const Vec& th, int order) {
        require_dim(th, dim);
        return mixture_sample_eval(*md, th, order);
      });
    }
    case ModelId::Regression: {
      const int p = spec.link_power;
      if (level == Level::Population) {
        if (dim == 1) {
          const RegressionStats s{double_factorial_4p_minus_1(p), 0.0, 1.0};
          return Objective(1, [s, p](const Vec& th, int) {
            require_dim(th, 1);
            return regression_scalar_eval(s, p, th[0]);
          });
        }
        return Objective(dim, [p, dim](const Vec& th, int order) {
          require_dim(th, dim);
          return regression_population_eval(p, th, order);
        });
      }
      const auto* rd = &std::get<RegressionData>(*data);
      if (dim == 1) {
        const auto s = regression_stats(*rd);
        return Objective(1, [s, p](const Vec& th, int) {
          require_dim(th, 1);
          return regression_scalar_eval(s, p, th[0]);
        });
      }
      if (rd->size() == 0) throw ValidationError("regression data is empty");
      return Objective(dim, [rd, dim](const Vec& th, int order) {
        require_dim(th, dim);
        return regression_sample_eval(*rd, th, order);
      });
    }
    case ModelId::Polynomial: {
      double p = spec.poly_p, q = spec.poly_q, eps = 0.0;
      if (level == Level::Sample) {
        const auto& ps = std::get<PolynomialSpec>(*data);
        ps.validate();
        p = ps.p;
        q = ps.q;
        eps = ps.eps_n;
      }
      return Objective(dim, [p, q, eps, dim](const Vec& th, int order) {
        require_dim(th, dim);
        return polynomial_eval(p, q, eps, th, order);
      });
    }
    case ModelId::Counterexample: {
      double a = 0.0;
      if (level == Level::Sample) {
        const auto& cs = std::get<CounterexampleSpec>(*data);
        cs.validate();
        a = counterexample_a(cs, level);
      }
      return Objective(1, [a](const Vec& th, int) {
        require_dim(th, 1);
        return negate(counterexample_eval(a, th[0]));
      });
    }
  }
  throw ValidationError("objective: unsupported model");
}

Derivatives objective(const ModelSpec& spec, Level level, const SampleSet* data, const ParamPoint& theta) {
  return make_objective(spec, level, data)(theta.coords(), 2);
}

// ---------------------------------------------------------------- sample MLE

namespace {

template <typename F>
double bisect(F f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (!(flo <= 0.0 && fhi > 0.0)) throw SolverError("bisection: interval does not bracket a sign change");
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm <= 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ParamPoint sample_mle(const SampleSet& data) {
  if (const auto* m = std::get_if<MixtureData>(&data)) {
    if (m->dim() != 1) throw ValidationError("sample_mle: mixture MLE is implemented for d = 1");
    if (m->size() == 0) throw ValidationError("sample_mle: empty data");
    const Eigen::ArrayXd x = m->x.col(0).array();
    if (x.square().sum() <= static_cast<double>(x.size())) return ParamPoint::scalar(0.0);
    const double hi = x.abs().maxCoeff();
    const double root = bisect([&](double th) { return th - (x * (x * th).tanh()).mean(); }, 0.0, hi);
    return ParamPoint::scalar(root);
  }
  if (const auto* r = std::get_if<RegressionData>(&data)) {
    if (r->dim() != 1) throw ValidationError("sample_mle: regression MLE is implemented for d = 1");
    const auto s = regression_stats(*r);
    if (!(s.b > 0.0)) return ParamPoint::scalar(0.0);
    return ParamPoint::scalar(std::pow(s.b / s.a, 1.0 / (2.0 * r->p)));
  }
  if (const auto* nr = std::get_if<NonResponseData>(&data)) {
    const auto s = nonresponse_stats(*nr);
    // Curvature at 0 is A − B; the optimum moves off 0 only when it is negative.
    if (!(s.b > s.a)) return ParamPoint::scalar(0.0);
    const double target = s.b / s.a;
    const auto g = [target](double sv) { return sv * sv * (2.0 * sv - 1.0) - target; };
    double hi = 2.0;
    while (g(hi) <= 0.0) hi *= 2.0;
    const double sroot = bisect(g, 1.0, hi);
    return ParamPoint::scalar(std::sqrt(std::max(0.0, sroot * sroot - 1.0)));
  }
  throw ValidationError("sample_mle: supported for mixture, regression and non-response data");
}

}  // namespace statopt
