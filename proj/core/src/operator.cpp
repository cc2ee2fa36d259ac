#include "statopt/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "statopt/errors.hpp"

namespace statopt {

OperatorHandle::OperatorHandle(ModelSpec model, Algorithm algorithm, Level level,
                               std::shared_ptr<const SampleSet> data, AlgorithmConfig config,
                               StepFn step)
    : model_(model),
      algorithm_(algorithm),
      level_(level),
      data_(std::move(data)),
      config_(config),
      step_(std::move(step)) {
  if (level_ == Level::Population && data_) {
    throw ValidationError("population operator must not carry a dataset");
  }
  if (level_ == Level::Sample && !data_) {
    throw ValidationError("sample operator requires a dataset");
  }
  if (!step_) throw ValidationError("operator has no step function");
}

Vec OperatorHandle::apply(const Vec& theta) const {
  if (static_cast<std::size_t>(theta.size()) != model_.dim) {
    throw ValidationError("operator dimension mismatch");
  }
  Vec next = step_(theta);
  if (!all_finite(next)) throw NumericalError("operator produced a non-finite value");
  return next;
}

ParamPoint OperatorHandle::operator()(const ParamPoint& theta) const {
  return ParamPoint(apply(theta.coords()));
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxIters: return "max-iters";
    case Termination::ThresholdHit: return "threshold-hit";
    case Termination::Divergence: return "divergence";
  }
  return "unknown";
}

std::vector<double> IterationTrace::errors() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.error);
  return out;
}

namespace {

void check_start(const OperatorHandle& op, const ParamPoint& theta0, const ParamPoint& target) {
  if (theta0.dim() != op.dim() || target.dim() != op.dim()) {
    throw ValidationError("initial point / target dimension does not match operator");
  }
}

// Runs until stop(t, error) is true or max_steps steps were taken.
template <typename Stop>
IterationTrace drive(const OperatorHandle& op, const ParamPoint& theta0, const ParamPoint& target,
                     std::size_t max_steps, Stop stop) {
  IterationTrace trace{theta0, target, {}, Termination::MaxIters};
  trace.entries.reserve(std::min<std::size_t>(max_steps + 1, 1u << 16));
  const double guard = kDivergenceFactor * (1.0 + theta0.norm());

  Vec theta = theta0.coords();
  double err = (theta - target.coords()).norm();
  trace.entries.push_back({0, theta0, err});
  if (stop(0, err)) {
    trace.reason = Termination::ThresholdHit;
    return trace;
  }
  for (std::size_t t = 1; t <= max_steps; ++t) {
    Vec next;
    try {
      next = op.apply(theta);
    } catch (const NumericalError& e) {
      throw IterationError(t, e.what());
    }
    theta = std::move(next);
    err = (theta - target.coords()).norm();
    trace.entries.push_back({t, ParamPoint(theta), err});
    if (theta.norm() > guard) {
      trace.reason = Termination::Divergence;
      return trace;
    }
    if (stop(t, err)) {
      trace.reason = Termination::ThresholdHit;
      return trace;
    }
  }
  return trace;
}

}  // namespace

IterationTrace iterate(const OperatorHandle& op, const ParamPoint& theta0, std::size_t T,
                       const ParamPoint& target) {
  if (T < 1) throw ValidationError("iterate: T must be at least 1");
  check_start(op, theta0, target);
  return drive(op, theta0, target, T, [](std::size_t, double) { return false; });
}

UntilResult iterate_until(const OperatorHandle& op, const ParamPoint& theta0,
                          const ParamPoint& target, double threshold, std::size_t max_iters) {
  if (!(threshold > 0.0)) throw ValidationError("iterate_until: threshold must be positive");
  check_start(op, theta0, target);
  UntilResult result{drive(op, theta0, target, max_iters,
                           [threshold](std::size_t, double err) { return err <= threshold; }),
                     std::nullopt};
  if (result.trace.reason == Termination::ThresholdHit) {
    result.hit_iteration = result.trace.back().t;
  }
  return result;
}

StreamSummary iterate_stream(const OperatorHandle& op, const ParamPoint& theta0,
                             const ParamPoint& target, std::size_t max_steps,
                             const StreamVisitor& visit) {
  check_start(op, theta0, target);
  const double guard = kDivergenceFactor * (1.0 + theta0.norm());
  StreamSummary s;
  s.last = theta0.coords();
  s.last_error = (s.last - target.coords()).norm();
  s.min_error = s.last_error;
  if (visit(0, s.last, s.last_error)) {
    s.reason = Termination::ThresholdHit;
    return s;
  }
  for (std::size_t t = 1; t <= max_steps; ++t) {
    try {
      s.last = op.apply(s.last);
    } catch (const NumericalError& e) {
      throw IterationError(t, e.what());
    }
    s.steps = t;
    s.last_error = (s.last - target.coords()).norm();
    if (s.last_error < s.min_error) {
      s.min_error = s.last_error;
      s.argmin = t;
    }
    if (s.last.norm() > guard) {
      s.reason = Termination::Divergence;
      return s;
    }
    if (visit(t, s.last, s.last_error)) {
      s.reason = Termination::ThresholdHit;
      return s;
    }
  }
  return s;
}

std::pair<std::size_t, double> best_iterate_error(const IterationTrace& trace,
                                                  const ParamPoint& target) {
  if (trace.entries.empty()) throw ValidationError("best_iterate_error: empty trace");
  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : trace.entries) {
    const double d = e.point.distance_to(target);
    if (d < best) {
      best = d;
      best_k = e.t;
    }
  }
  return {best_k, best};
}

}  // namespace statopt
