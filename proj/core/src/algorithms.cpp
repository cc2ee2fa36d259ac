#include "statopt/algorithms.hpp"

#include <cmath>
#include <sstream>

#include "statopt/errors.hpp"

namespace statopt {

namespace {

std::string describe(const Vec& theta) {
  std::ostringstream os;
  os.precision(6);
  os << "theta=(";
  for (Eigen::Index i = 0; i < theta.size(); ++i) os << (i ? ", " : "") << theta[i];
  os << ")";
  return os.str();
}

Vec gd_raw(const Objective& f, const AlgorithmConfig& cfg, const Vec& theta) {
  return theta - cfg.step_size * f(theta, 1).gradient;
}

Vec newton_raw(const Objective& f, const AlgorithmConfig& cfg, const Vec& theta) {
  const Derivatives d = f(theta, 2);
  Mat h = d.hessian;
  if (cfg.hessian_floor > 0.0) h.diagonal().array() += cfg.hessian_floor;
  try {
    return theta - solve_dense(h, d.gradient);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " at " + describe(theta));
  }
}

Vec cnm_raw(const Objective& f, const AlgorithmConfig& cfg, const Vec& theta) {
  if (theta.size() != 1) throw ValidationError("CNM is implemented for d = 1 only");
  const Derivatives d = f(theta, 2);
  const double g = d.gradient[0];
  const double h = d.hessian(0, 0);
  if (g == 0.0) return theta;
  // With |g| the same expression covers both signs of g, which keeps the map odd
  // for even objectives without an explicit reflection.
  const double disc = h * h + 12.0 * cfg.cubic_constant * std::abs(g);
  if (disc < 0.0) throw NumericalError("CNM: negative discriminant at " + describe(theta));
  const double denom = h + std::sqrt(disc);
  if (!(denom > 0.0)) throw NumericalError("CNM: degenerate cubic model at " + describe(theta));
  return Vec::Constant(1, theta[0] - 2.0 * g / denom);
}

Vec em_raw(const MixtureData* data, const Vec& theta) {
  if (data) {
    if (static_cast<Eigen::Index>(data->dim()) != theta.size()) throw ValidationError("EM: dimension mismatch");
    const Eigen::ArrayXd t = (data->x * theta).array().tanh();
    return data->x.transpose() * t.matrix() / static_cast<double>(data->size());
  }
  const double r = theta.norm();
  if (r == 0.0) return Vec::Zero(theta.size());
  return mixture_moments(r).z_tanh * (theta / r);
}

}  // namespace

Vec solve_dense(const Mat& h, const Vec& g) {
  const Eigen::Index d = h.rows();
  if (h.cols() != d || g.size() != d) throw ValidationError("solve_dense: shape mismatch");
  if (!all_finite(g) || !h.allFinite()) throw NumericalError("solve_dense: non-finite system");
  const double scale = h.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw NumericalError("singular Hessian (zero matrix)");
  Eigen::PartialPivLU<Mat> lu(h);
  const double det = lu.determinant();
  if (!(std::abs(det) >= 1e-14 * std::pow(scale, static_cast<double>(d)))) {
    throw NumericalError("singular Hessian (|det| below relative 1e-14)");
  }
  Vec x = lu.solve(g);
  if (!all_finite(x)) throw NumericalError("solve_dense: non-finite solution");
  return x;
}

ParamPoint gd_step(const Objective& f, const AlgorithmConfig& cfg, const ParamPoint& theta) {
  return ParamPoint(gd_raw(f, cfg, theta.coords()));
}

ParamPoint newton_step(const Objective& f, const AlgorithmConfig& cfg, const ParamPoint& theta) {
  return ParamPoint(newton_raw(f, cfg, theta.coords()));
}

ParamPoint cnm_step(const Objective& f, const AlgorithmConfig& cfg, const ParamPoint& theta) {
  return ParamPoint(cnm_raw(f, cfg, theta.coords()));
}

ParamPoint em_step_mixture(const MixtureData* data, const ParamPoint& theta) {
  return ParamPoint(em_raw(data, theta.coords()));
}

double regression_max_step(int p) { return 1.0 / (double_factorial_4p_minus_1(p) * 2.0 * p); }

AlgorithmConfig default_config(const ModelSpec& model, Algorithm algorithm) {
  AlgorithmConfig cfg;
  switch (model.id) {
    case ModelId::Regression:
      cfg.step_size = 0.5 * regression_max_step(model.link_power);
      cfg.cubic_constant = double_factorial_4p_minus_1(model.link_power) * (4.0 * model.link_power - 1.0) *
                           model.link_power / 3.0;
      break;
    case ModelId::NonResponse:
      cfg.step_size = 1.0;
      break;
    case ModelId::Mixture:
      cfg.step_size = 1.0;
      break;
    case ModelId::Polynomial:
      cfg.step_size = 0.5;
      cfg.cubic_constant = (model.poly_p - 1.0) * (model.poly_p - 2.0) / 6.0;
      break;
    case ModelId::Counterexample:
      cfg.step_size = 0.05;
      break;
  }
  (void)algorithm;
  return cfg;
}

namespace {

void validate_pair(const ModelSpec& model, Algorithm algorithm, const AlgorithmConfig& cfg) {
  const char* matrix =
      "supported: GD/GA/NM for every model; CNM for one-dimensional models; EM for the mixture model";
  if (algorithm == Algorithm::EM && model.id != ModelId::Mixture) {
    throw ValidationError("EM is defined for the mixture model only (" + std::string(matrix) + ")");
  }
  if (algorithm == Algorithm::CNM && model.dim != 1) {
    throw ValidationError("CNM requires d = 1 (" + std::string(matrix) + ")");
  }
  if (algorithm == Algorithm::GD || algorithm == Algorithm::GA) {
    if (!(cfg.step_size > 0.0)) throw ValidationError("step size must be positive");
    if (model.id == ModelId::NonResponse && !(cfg.step_size < 8.0 / 3.0)) {
      throw ValidationError("non-response gradient ascent needs step size in (0, 8/3)");
    }
    if (model.id == ModelId::Regression && cfg.step_size > regression_max_step(model.link_power) * (1.0 + 1e-12)) {
      throw ValidationError("regression gradient descent needs step size in (0, 1/((4p-1)!!*2p)]");
    }
  }
  if (algorithm == Algorithm::CNM && !(cfg.cubic_constant > 0.0)) {
    throw ValidationError("cubic constant must be positive");
  }
  if (!(cfg.hessian_floor >= 0.0)) throw ValidationError("Hessian floor must be nonnegative");
}

OperatorHandle::StepFn step_for(const Objective& f, Algorithm algorithm, const AlgorithmConfig& cfg) {
  switch (algorithm) {
    case Algorithm::GD:
    case Algorithm::GA:
      return [f, cfg](const Vec& th) { return gd_raw(f, cfg, th); };
    case Algorithm::NM:
      return [f, cfg](const Vec& th) { return newton_raw(f, cfg, th); };
    case Algorithm::CNM:
      return [f, cfg](const Vec& th) { return cnm_raw(f, cfg, th); };
    case Algorithm::EM:
      break;
  }
  throw ValidationError("EM needs mixture data, not a generic objective");
}

}  // namespace

OperatorHandle make_operator(const ModelSpec& model_in, Algorithm algorithm, Level level,
                             std::shared_ptr<const SampleSet> data, const AlgorithmConfig& config) {
  if (level == Level::Sample && !data) throw ValidationError("sample operator requires a dataset");
  if (level == Level::Population && data) throw ValidationError("population operator takes no dataset");
  const ModelSpec model = data ? spec_of(*data) : model_in;
  if (data && model.id != model_in.id) throw ValidationError("operator: model/data mismatch");
  model.validate();
  validate_pair(model, algorithm, config);

  if (algorithm == Algorithm::EM) {
    const MixtureData* md = data ? &std::get<MixtureData>(*data) : nullptr;
    // The handle keeps `data` alive, so the raw pointer stays valid.
    return OperatorHandle(model, algorithm, level, data, config,
                          [md](const Vec& th) { return em_raw(md, th); });
  }
  const Objective f = make_objective(model, level, data.get());
  return OperatorHandle(model, algorithm, level, data, config, step_for(f, algorithm, config));
}

OperatorHandle make_sample_operator(std::shared_ptr<const SampleSet> data, Algorithm algorithm,
                                    const AlgorithmConfig& config) {
  if (!data) throw ValidationError("sample operator requires a dataset");
  const ModelSpec model = spec_of(*data);
  return make_operator(model, algorithm, Level::Sample, std::move(data), config);
}

OperatorHandle make_objective_operator(const Objective& f, Algorithm algorithm,
                                       const AlgorithmConfig& config, ModelSpec tag) {
  tag.dim = f.dim();
  if (algorithm == Algorithm::CNM && f.dim() != 1) throw ValidationError("CNM requires d = 1");
  return OperatorHandle(tag, algorithm, Level::Population, nullptr, config, step_for(f, algorithm, config));
}

}  // namespace statopt
