#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statopt/analysis.hpp"
#include "statopt/operator.hpp"

namespace statopt {

// ---------------------------------------------------------------- sweep config

// Initial point θ0 = radius(n)·e₁.
//   Fixed:   radius = value
//   Offset:  radius = value (offset from θ* = 0)
//   Annulus: radius = max(scale·n^{-1/4}, floor)
struct InitRule {
  enum class Kind { Fixed, Offset, Annulus };
  Kind kind = Kind::Fixed;
  double value = 0.5;
  double scale = 10.0;
  double floor = 0.05;

  static InitRule fixed(double v) { return {Kind::Fixed, v, 0.0, 0.0}; }
  static InitRule offset(double v) { return {Kind::Offset, v, 0.0, 0.0}; }
  static InitRule annulus(double scale, double floor) { return {Kind::Annulus, 0.0, scale, floor}; }

  double radius(std::size_t n) const;
  std::string describe() const;
  static InitRule parse(const std::string& text);  // "fixed:1", "offset:0.5", "annulus:10,0.05"
};

// absolute: threshold = value; otherwise c·(d/n)^a.
struct ThresholdRule {
  bool absolute = false;
  double value = 0.0;
  double c = 3.0;
  double a = 0.25;

  double at(std::size_t n, std::size_t d) const;
  std::string describe() const;
  static ThresholdRule parse(const std::string& text);  // "abs:1e-3" or "3,0.25"
};

// max_iters = ceil(c·n^b).
struct IterRule {
  double c = 100.0;
  double b = 0.5;

  std::size_t at(std::size_t n) const;
  static IterRule parse(const std::string& text);  // "100,0.5"
};

struct SweepConfig {
  ModelId model = ModelId::Regression;
  std::vector<Algorithm> algorithms{Algorithm::GD};
  std::vector<std::size_t> n_grid{1024, 2048, 4096, 8192, 16384, 32768, 65536};
  std::size_t d = 1;
  int p = 1;
  std::size_t trials = 20;
  std::uint64_t master_seed = 1;
  std::optional<InitRule> init;                 // default per algorithm when absent
  std::map<Algorithm, InitRule> init_override;  // per-algorithm
  ThresholdRule threshold;
  IterRule max_iters;
  std::optional<double> step_size;
  std::optional<double> cubic_constant;
  std::size_t workers = 1;

  ModelSpec model_spec() const;
  InitRule init_for(Algorithm a) const;
  void validate() const;
};

// GD/GA/EM start at ρ/2 = 0.5; NM/CNM at max(10·n^{-1/4}, 0.05).
InitRule default_init(Algorithm a);

// Plain-text "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_kv_file(const std::string& path);
// Applies recognised keys to cfg; unknown keys are a ValidationError.
void apply_kv(SweepConfig& cfg, const std::map<std::string, std::string>& kv);
std::vector<std::size_t> parse_n_grid(const std::string& text);  // "1024,2048" or "2^10..2^16"

// Named protocols used by the acceptance suite and the CLI.
SweepConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// ---------------------------------------------------------------- sweep

struct SweepRow {
  ModelId model = ModelId::Regression;
  Algorithm algorithm = Algorithm::GD;
  std::size_t n = 0;
  std::size_t d = 1;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double final_error = 0.0;  // NaN for failed cells
  double min_error = 0.0;
  std::optional<std::size_t> hit_iteration;
  std::size_t iterations_run = 0;
  double wall_time = 0.0;  // seconds
};

struct SweepAggregate {
  Algorithm algorithm = Algorithm::GD;
  std::size_t n = 0;
  double median_final_error = 0.0;
  double median_hit_iteration = 0.0;  // missing hits count as +inf
  std::size_t failed = 0;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SweepRow> rows;  // sorted by (algorithm, n, trial)
  std::vector<SweepAggregate> aggregates;

  std::vector<SweepAggregate> series(Algorithm a) const;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t cell_seed(std::uint64_t master, Algorithm a, std::size_t n, std::size_t trial);

double median(std::vector<double> v);
std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows);

SweepResult run_sweep(const SweepConfig& config);

// Slopes of the per-algorithm median curves against n.
struct SeriesFit {
  Algorithm algorithm;
  std::optional<RateFit> error_fit;  // log-log
  std::optional<RateFit> hit_fit;    // log-log; absent if any median is infinite
  std::optional<RateFit> hit_vs_logn;  // hits = a + b·log n
};
std::vector<SeriesFit> fit_series(const SweepResult& result);

struct CsvOptions {
  bool include_timing = true;
};
void emit_csv(const SweepResult& result, const std::string& path, CsvOptions opts = {});
std::string sweep_csv_text(const std::vector<SweepRow>& rows, CsvOptions opts = {});
std::vector<SweepRow> parse_sweep_csv(const std::string& path);
std::vector<SweepRow> parse_sweep_csv_text(const std::string& text);
void emit_aggregate_csv(const SweepResult& result, const std::string& path);

enum class PlotMetric { FinalError, HitIteration };
// SVG, log-log axes, one series per algorithm, fitted slopes in the legend.
void emit_plot(const SweepResult& result, const std::string& path, PlotMetric metric = PlotMetric::FinalError);
std::string plot_svg(const SweepResult& result, PlotMetric metric);

// ---------------------------------------------------------------- population rates

struct PopulationRate {
  Algorithm algorithm;
  IterationTrace trace;
  std::optional<ConvergenceClass> classification;  // absent when θ0 is the fixed point
};

std::vector<PopulationRate> run_population_rates(const ModelSpec& model, const std::vector<Algorithm>& algorithms,
                                                 const ParamPoint& theta0, std::size_t T,
                                                 const std::map<Algorithm, AlgorithmConfig>& configs = {});

// ---------------------------------------------------------------- escape counterexample

// r̃ from the Newton perturbation profile: radii log-spaced on [0.1·n^{-1/4}, 0.5],
// fit window [2·n^{-1/4}, 0.5].
double counterexample_inner_radius(std::size_t n);

// Smallest grid point in (0, r̃) whose Newton iterates satisfy |θᵗ| ≥ 1 for 1 ≤ t ≤ T and
// end within 0.5 of 2.
std::optional<double> find_escape_init(std::size_t n, double r_tilde, std::size_t T,
                                       std::size_t grid = 20000);

struct EscapeDemo {
  std::size_t n = 0;
  double r_tilde = 0.0;
  IterationTrace below;
  IterationTrace annulus;
  bool below_left_unit_ball = false;
  bool below_near_two = false;
  bool annulus_within_half = false;
};

EscapeDemo run_escape_demo(std::size_t n, double init_below, double init_annulus, std::size_t T);

// ---------------------------------------------------------------- polynomial family bounds

struct PolyBoundsEntry {
  Algorithm algorithm;
  double eps = 0.0;
  double floor = 0.0;          // eps^{1/(p−q)}
  double budget = 0.0;         // unscaled iteration scale for this algorithm
  double bound = 0.0;          // calibrated constant × budget
  std::optional<std::size_t> hit;  // first t with error ≤ 2·floor
  bool floor_ok = true;
  std::optional<std::size_t> floor_violation;
  bool bound_ok = false;
  std::optional<std::size_t> early_t;  // GD only: t = 0.1·bound
  double early_error = 0.0;
  bool early_ok = true;

  bool passed() const { return floor_ok && bound_ok && early_ok; }
};

struct PolyBoundsReport {
  double p = 4.0;
  double q = 2.0;
  double margin = 1.5;
  double c_gd = 0.0;
  double c_nm = 0.0;
  double c_cnm = 0.0;
  std::vector<PolyBoundsEntry> entries;
  std::optional<RateFit> nm_affine;  // hit vs log(1/eps)

  bool passed() const;
};

inline constexpr double kPolyBoundsMargin = 1.5;
inline constexpr double kPolyBoundsEarlyFraction = 0.1;

PolyBoundsReport run_polynomial_bounds(double p, double q, const std::vector<double>& eps_list,
                                   double margin = kPolyBoundsMargin);

}  // namespace statopt
