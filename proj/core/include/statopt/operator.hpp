#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "statopt/data.hpp"
#include "statopt/param.hpp"

namespace statopt {

struct AlgorithmConfig {
  double step_size = 0.1;       // η for GD/GA
  double cubic_constant = 1.0;  // L for CNM
  double hessian_floor = 0.0;   // λ_min added to the Newton Hessian
};

// F or F_n: a fixed-point map θ ↦ op(θ) tied to a model, an algorithm and a level.
class OperatorHandle {
 public:
  using StepFn = std::function<Vec(const Vec&)>;

  OperatorHandle(ModelSpec model, Algorithm algorithm, Level level,
                 std::shared_ptr<const SampleSet> data, AlgorithmConfig config, StepFn step);

  // Throws NumericalError when the step is undefined or non-finite.
  ParamPoint operator()(const ParamPoint& theta) const;
  Vec apply(const Vec& theta) const;

  const ModelSpec& model() const { return model_; }
  Algorithm algorithm() const { return algorithm_; }
  Level level() const { return level_; }
  const std::shared_ptr<const SampleSet>& data() const { return data_; }
  const AlgorithmConfig& config() const { return config_; }
  std::size_t dim() const { return model_.dim; }

 private:
  ModelSpec model_;
  Algorithm algorithm_;
  Level level_;
  std::shared_ptr<const SampleSet> data_;
  AlgorithmConfig config_;
  StepFn step_;
};

enum class Termination { MaxIters, ThresholdHit, Divergence };
const char* to_string(Termination t);

struct TraceEntry {
  std::size_t t;
  ParamPoint point;
  double error;
};

struct IterationTrace {
  ParamPoint initial;
  ParamPoint target;
  std::vector<TraceEntry> entries;
  Termination reason = Termination::MaxIters;

  std::size_t size() const { return entries.size(); }
  const TraceEntry& back() const { return entries.back(); }
  std::vector<double> errors() const;
};

// Divergence guard: ‖θ‖ > factor·(1 + ‖θ0‖).
inline constexpr double kDivergenceFactor = 1e6;

// T steps from theta0; T+1 entries unless divergence stops the run early.
IterationTrace iterate(const OperatorHandle& op, const ParamPoint& theta0, std::size_t T,
                       const ParamPoint& target);

struct UntilResult {
  IterationTrace trace;
  std::optional<std::size_t> hit_iteration;
};

// Stops at the first t with ‖θᵗ − target‖ ≤ threshold, or after max_iters steps.
UntilResult iterate_until(const OperatorHandle& op, const ParamPoint& theta0,
                          const ParamPoint& target, double threshold, std::size_t max_iters);

// Summary of a run whose iterates were streamed rather than stored.
struct StreamSummary {
  std::size_t steps = 0;
  Termination reason = Termination::MaxIters;
  Vec last;
  double last_error = 0.0;
  double min_error = 0.0;
  std::size_t argmin = 0;
};

// Calls visit(t, θᵗ, ‖θᵗ − target‖) for t = 0, 1, ...; returning true stops the run
// with reason ThresholdHit. Same divergence guard and error reporting as iterate.
using StreamVisitor = std::function<bool(std::size_t, const Vec&, double)>;
StreamSummary iterate_stream(const OperatorHandle& op, const ParamPoint& theta0,
                             const ParamPoint& target, std::size_t max_steps,
                             const StreamVisitor& visit);

// (argmin k, min error) over the trace; ties go to the smallest k.
std::pair<std::size_t, double> best_iterate_error(const IterationTrace& trace,
                                                  const ParamPoint& target);

}  // namespace statopt
