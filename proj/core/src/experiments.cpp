#include "statopt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>
#include <tuple>

#include "statopt/algorithms.hpp"
#include "statopt/csv.hpp"
#include "statopt/errors.hpp"
#include "statopt/models.hpp"

namespace statopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double num(const std::string& s, const std::string& key) {
  try {
    return parse_double(trim(s), key);
  } catch (const std::exception&) {
    throw ValidationError("config '" + key + "': not a number: '" + s + "'");
  }
}

std::size_t count(const std::string& s, const std::string& key) {
  const double v = num(s, key);
  if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError("config '" + key + "': expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

Vec along_first_axis(double r, std::size_t d) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(d));
  v[0] = r;
  return v;
}

}  // namespace

// ---------------------------------------------------------------- rules

double InitRule::radius(std::size_t n) const {
  switch (kind) {
    case Kind::Fixed:
    case Kind::Offset: return value;
    case Kind::Annulus: return std::max(scale * std::pow(static_cast<double>(n), -0.25), floor);
  }
  return value;
}

std::string InitRule::describe() const {
  switch (kind) {
    case Kind::Fixed: return "fixed:" + format_double(value);
    case Kind::Offset: return "offset:" + format_double(value);
    case Kind::Annulus: return "annulus:" + format_double(scale) + "," + format_double(floor);
  }
  return "?";
}

InitRule InitRule::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("init rule '" + text + "': expected kind:value");
  const std::string kind = trim(text.substr(0, colon));
  const auto args = split(text.substr(colon + 1), ',');
  if (kind == "fixed" && args.size() == 1) return fixed(num(args[0], "init"));
  if (kind == "offset" && args.size() == 1) return offset(num(args[0], "init"));
  if (kind == "annulus" && args.size() == 2) return annulus(num(args[0], "init"), num(args[1], "init"));
  throw ValidationError("init rule '" + text + "': expected fixed:v, offset:v or annulus:scale,floor");
}

InitRule default_init(Algorithm a) {
  if (a == Algorithm::NM || a == Algorithm::CNM) return InitRule::annulus(10.0, 0.05);
  return InitRule::fixed(0.5);
}

double ThresholdRule::at(std::size_t n, std::size_t d) const {
  if (absolute) return value;
  return c * std::pow(static_cast<double>(d) / static_cast<double>(n), a);
}

std::string ThresholdRule::describe() const {
  if (absolute) return "abs:" + format_double(value);
  return format_double(c) + "," + format_double(a);
}

ThresholdRule ThresholdRule::parse(const std::string& text) {
  ThresholdRule r;
  const std::string t = trim(text);
  if (t.rfind("abs:", 0) == 0) {
    r.absolute = true;
    r.value = num(t.substr(4), "threshold");
    if (!(r.value > 0.0)) throw ValidationError("threshold '" + text + "': must be positive");
    return r;
  }
  const auto args = split(t, ',');
  if (args.size() != 2) throw ValidationError("threshold '" + text + "': expected abs:v or c,a");
  r.c = num(args[0], "threshold");
  r.a = num(args[1], "threshold");
  if (!(r.c > 0.0 && r.a > 0.0)) throw ValidationError("threshold '" + text + "': c and a must be positive");
  return r;
}

std::size_t IterRule::at(std::size_t n) const {
  return static_cast<std::size_t>(std::ceil(c * std::pow(static_cast<double>(n), b)));
}

IterRule IterRule::parse(const std::string& text) {
  const auto args = split(text, ',');
  IterRule r;
  if (args.size() == 1) {
    r.c = num(args[0], "max_iters");
    r.b = 0.0;
  } else if (args.size() == 2) {
    r.c = num(args[0], "max_iters");
    r.b = num(args[1], "max_iters");
  } else {
    throw ValidationError("max_iters '" + text + "': expected c or c,b");
  }
  return r;
}

// ---------------------------------------------------------------- config

ModelSpec SweepConfig::model_spec() const {
  ModelSpec s;
  s.id = model;
  s.dim = d;
  s.link_power = p;
  return s;
}

InitRule SweepConfig::init_for(Algorithm a) const {
  if (auto it = init_override.find(a); it != init_override.end()) return it->second;
  return init ? *init : default_init(a);
}

void SweepConfig::validate() const {
  model_spec().validate();
  if (algorithms.empty()) throw ValidationError("sweep: no algorithms");
  if (n_grid.empty()) throw ValidationError("sweep: empty n-grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw ValidationError("sweep: n must be at least 1");
    if (i && n_grid[i] <= n_grid[i - 1]) throw ValidationError("sweep: n-grid must be strictly ascending");
  }
  if (trials < 1) throw ValidationError("sweep: trials must be at least 1");
  if (threshold.absolute ? !(threshold.value > 0.0) : !(threshold.c > 0.0 && threshold.a > 0.0)) {
    throw ValidationError("sweep: threshold must be positive with exponent a > 0");
  }
  if (!(max_iters.c > 0.0)) throw ValidationError("sweep: max_iters constant must be positive");
  if (workers < 1) throw ValidationError("sweep: workers must be at least 1");
  for (Algorithm a : algorithms) {
    const InitRule r = init_for(a);
    if (!(r.radius(n_grid.front()) >= 0.0) || !std::isfinite(r.radius(n_grid.front()))) {
      throw ValidationError("sweep: invalid initial radius");
    }
  }
}

std::vector<std::size_t> parse_n_grid(const std::string& text) {
  const std::string t = trim(text);
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    auto exponent = [&](const std::string& s) {
      const std::string u = trim(s);
      if (u.rfind("2^", 0) != 0) throw ValidationError("n_grid range must look like 2^a..2^b");
      return count(u.substr(2), "n_grid");
    };
    const std::size_t lo = exponent(t.substr(0, dots)), hi = exponent(t.substr(dots + 2));
    if (lo > hi || hi > 40) throw ValidationError("n_grid: bad exponent range");
    std::vector<std::size_t> out;
    for (std::size_t k = lo; k <= hi; ++k) out.push_back(std::size_t{1} << k);
    return out;
  }
  std::vector<std::size_t> out;
  for (const auto& item : split(t, ',')) out.push_back(count(item, "n_grid"));
  return out;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_kv(SweepConfig& cfg, const std::map<std::string, std::string>& kv) {
  if (auto it = kv.find("preset"); it != kv.end()) cfg = preset(it->second);
  for (const auto& [key, value] : kv) {
    if (key == "preset") continue;
    if (key == "model") {
      cfg.model = parse_model(value);
    } else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (const auto& a : split(value, ',')) cfg.algorithms.push_back(parse_algorithm(a));
    } else if (key == "n_grid") {
      cfg.n_grid = parse_n_grid(value);
    } else if (key == "d") {
      cfg.d = count(value, key);
    } else if (key == "p") {
      cfg.p = static_cast<int>(count(value, key));
    } else if (key == "trials") {
      cfg.trials = count(value, key);
    } else if (key == "seed") {
      cfg.master_seed = std::stoull(value);
    } else if (key == "init") {
      cfg.init = InitRule::parse(value);
    } else if (key.rfind("init.", 0) == 0) {
      cfg.init_override[parse_algorithm(key.substr(5))] = InitRule::parse(value);
    } else if (key == "threshold") {
      cfg.threshold = ThresholdRule::parse(value);
    } else if (key == "max_iters") {
      cfg.max_iters = IterRule::parse(value);
    } else if (key == "step_size") {
      cfg.step_size = num(value, key);
    } else if (key == "cubic_constant") {
      cfg.cubic_constant = num(value, key);
    } else if (key == "workers") {
      cfg.workers = count(value, key);
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
}

std::vector<std::string> preset_names() {
  return {"nlr", "mixture", "nonresponse", "highdim-mixture", "highdim-regression"};
}

SweepConfig preset(const std::string& name) {
  SweepConfig c;
  c.n_grid = parse_n_grid("2^10..2^16");
  c.trials = 20;
  c.master_seed = 1;
  c.threshold = ThresholdRule{false, 0.0, 1.0, 0.25};
  c.init = InitRule::fixed(1.0);
  if (name == "nlr") {
    c.model = ModelId::Regression;
    c.algorithms = {Algorithm::GD, Algorithm::NM, Algorithm::CNM};
    c.max_iters = IterRule{100.0, 0.5};
  } else if (name == "mixture") {
    c.model = ModelId::Mixture;
    c.algorithms = {Algorithm::EM, Algorithm::NM};
    c.max_iters = IterRule{6.0, 0.5};
  } else if (name == "nonresponse") {
    c.model = ModelId::NonResponse;
    c.algorithms = {Algorithm::GA, Algorithm::NM};
    c.max_iters = IterRule{20.0, 0.5};
  } else if (name == "highdim-mixture" || name == "highdim-regression") {
    c.model = name == "highdim-mixture" ? ModelId::Mixture : ModelId::Regression;
    c.algorithms = {name == "highdim-mixture" ? Algorithm::EM : Algorithm::GD};
    c.d = 2;
    c.n_grid = parse_n_grid("2^11..2^16");
    c.trials = 10;
    c.max_iters = IterRule{8.0, 0.5};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return c;
}

// ---------------------------------------------------------------- seeding and aggregation

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t master, Algorithm a, std::size_t n, std::size_t trial) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(a));
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty list");
  for (double& x : v) {
    if (std::isnan(x)) x = kInf;
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2) return v[m];
  return 0.5 * (v[m - 1] + v[m]);  // +inf if either middle value is
}

std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows) {
  std::map<std::pair<Algorithm, std::size_t>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) groups[{r.algorithm, r.n}].push_back(&r);
  std::vector<SweepAggregate> out;
  for (const auto& [key, group] : groups) {
    std::vector<double> fe, hits;
    std::size_t failed = 0;
    for (const SweepRow* r : group) {
      fe.push_back(r->final_error);
      hits.push_back(r->hit_iteration ? static_cast<double>(*r->hit_iteration) : kInf);
      failed += std::isnan(r->final_error);
    }
    out.push_back({key.first, key.second, median(fe), median(hits), failed});
  }
  return out;
}

std::vector<SweepAggregate> SweepResult::series(Algorithm a) const {
  std::vector<SweepAggregate> out;
  for (const auto& g : aggregates) {
    if (g.algorithm == a) out.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------- sweep

namespace {

struct Cell {
  Algorithm algorithm;
  std::size_t n;
  std::size_t trial;
};

SweepRow run_cell(const SweepConfig& cfg, const Cell& cell) {
  SweepRow row;
  row.model = cfg.model;
  row.algorithm = cell.algorithm;
  row.n = cell.n;
  row.d = cfg.d;
  row.trial = cell.trial;
  row.seed = cell_seed(cfg.master_seed, cell.algorithm, cell.n, cell.trial);
  const auto start = std::chrono::steady_clock::now();
  try {
    const ModelSpec spec = cfg.model_spec();
    auto data = std::make_shared<const SampleSet>(generate(spec, cell.n, row.seed));
    AlgorithmConfig ac = default_config(spec, cell.algorithm);
    if (cfg.step_size) ac.step_size = *cfg.step_size;
    if (cfg.cubic_constant) ac.cubic_constant = *cfg.cubic_constant;
    const OperatorHandle op = make_sample_operator(data, cell.algorithm, ac);
    const ParamPoint theta0(along_first_axis(cfg.init_for(cell.algorithm).radius(cell.n), cfg.d));
    const ParamPoint target = ParamPoint::zeros(cfg.d);
    const double thr = cfg.threshold.at(cell.n, cfg.d);
    const StreamSummary s = iterate_stream(op, theta0, target, cfg.max_iters.at(cell.n),
                                           [thr](std::size_t, const Vec&, double err) { return err <= thr; });
    row.final_error = s.last_error;
    row.min_error = s.min_error;
    row.iterations_run = s.steps;
    if (s.reason == Termination::ThresholdHit) row.hit_iteration = s.steps;
  } catch (const IterationError& e) {
    row.final_error = row.min_error = kNaN;
    row.iterations_run = e.iteration();
  } catch (const std::exception&) {
    row.final_error = row.min_error = kNaN;
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  config.validate();
  // Surface unsupported pairs before any work.
  for (Algorithm a : config.algorithms) {
    AlgorithmConfig ac = default_config(config.model_spec(), a);
    if (config.step_size) ac.step_size = *config.step_size;
    if (config.cubic_constant) ac.cubic_constant = *config.cubic_constant;
    if (config.model != ModelId::Polynomial && config.model != ModelId::Counterexample) {
      make_operator(config.model_spec(), a, Level::Population, nullptr, ac);
    }
  }

  std::vector<Cell> cells;
  for (Algorithm a : config.algorithms) {
    for (std::size_t n : config.n_grid) {
      for (std::size_t t = 0; t < config.trials; ++t) cells.push_back({a, n, t});
    }
  }
  std::vector<SweepRow> rows(cells.size());
  const std::size_t workers = std::min(config.workers, std::max<std::size_t>(cells.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) rows[i] = run_cell(config, cells[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(config, cells[i]);
      });
    }
    for (auto& th : pool) th.join();
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.algorithm, a.n, a.trial) < std::tie(b.algorithm, b.n, b.trial);
  });
  SweepResult result{config, std::move(rows), {}};
  result.aggregates = aggregate(result.rows);
  return result;
}

std::vector<SeriesFit> fit_series(const SweepResult& result) {
  std::vector<SeriesFit> out;
  for (Algorithm a : result.config.algorithms) {
    SeriesFit f{a, std::nullopt, std::nullopt, std::nullopt};
    const auto s = result.series(a);
    std::vector<double> ns, errs, hits, logn;
    bool errs_ok = true, hits_ok = true;
    for (const auto& g : s) {
      ns.push_back(static_cast<double>(g.n));
      logn.push_back(std::log(static_cast<double>(g.n)));
      errs.push_back(g.median_final_error);
      hits.push_back(g.median_hit_iteration);
      errs_ok = errs_ok && std::isfinite(g.median_final_error) && g.median_final_error > 0.0;
      hits_ok = hits_ok && std::isfinite(g.median_hit_iteration) && g.median_hit_iteration > 0.0;
    }
    if (ns.size() >= 3) {
      if (errs_ok) f.error_fit = fit_power_law(ns, errs);
      if (hits_ok) {
        f.hit_fit = fit_power_law(ns, hits);
        f.hit_vs_logn = fit_linear(logn, hits);
      }
    }
    out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------- CSV

namespace {

const char* kSweepHeader = "model,algorithm,n,d,trial,seed,final_error,min_error,hit_iteration,iterations_run,wall_time";

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

std::string sweep_csv_text(const std::vector<SweepRow>& rows, CsvOptions opts) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.model) << ',' << to_string(r.algorithm) << ',' << r.n << ',' << r.d << ',' << r.trial << ','
       << r.seed << ',' << format_double(r.final_error) << ',' << format_double(r.min_error) << ','
       << (r.hit_iteration ? std::to_string(*r.hit_iteration) : "") << ',' << r.iterations_run << ','
       << (opts.include_timing ? format_double(r.wall_time) : "") << '\n';
  }
  return os.str();
}

void emit_csv(const SweepResult& result, const std::string& path, CsvOptions opts) {
  write_text(path, sweep_csv_text(result.rows, opts));
}

std::vector<SweepRow> parse_sweep_csv_text(const std::string& text) {
  const CsvTable t = parse_csv(text, "sweep csv");
  if (t.header != split_csv_line(kSweepHeader)) throw ValidationError("sweep csv: unexpected header");
  std::vector<SweepRow> rows;
  for (const auto& c : t.rows) {
    SweepRow r;
    r.model = parse_model(c[0]);
    r.algorithm = parse_algorithm(c[1]);
    r.n = std::stoull(c[2]);
    r.d = std::stoull(c[3]);
    r.trial = std::stoull(c[4]);
    r.seed = std::stoull(c[5]);
    r.final_error = parse_double(c[6]);
    r.min_error = parse_double(c[7]);
    if (!c[8].empty()) r.hit_iteration = std::stoull(c[8]);
    r.iterations_run = std::stoull(c[9]);
    r.wall_time = c[10].empty() ? 0.0 : parse_double(c[10]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_sweep_csv_text(ss.str());
}

void emit_aggregate_csv(const SweepResult& result, const std::string& path) {
  std::ostringstream os;
  os << "algorithm,n,median_final_error,median_hit_iteration,failed\n";
  for (const auto& g : result.aggregates) {
    os << to_string(g.algorithm) << ',' << g.n << ',' << format_double(g.median_final_error) << ','
       << format_double(g.median_hit_iteration) << ',' << g.failed << '\n';
  }
  write_text(path, os.str());
}

// ---------------------------------------------------------------- population rates

std::vector<PopulationRate> run_population_rates(const ModelSpec& model, const std::vector<Algorithm>& algorithms,
                                                 const ParamPoint& theta0, std::size_t T,
                                                 const std::map<Algorithm, AlgorithmConfig>& configs) {
  std::vector<PopulationRate> out;
  const ParamPoint target = ParamPoint::zeros(model.dim);
  for (Algorithm a : algorithms) {
    const auto it = configs.find(a);
    const AlgorithmConfig cfg = it != configs.end() ? it->second : default_config(model, a);
    const OperatorHandle op = make_operator(model, a, Level::Population, nullptr, cfg);
    PopulationRate r{a, iterate(op, theta0, T, target), std::nullopt};
    if (theta0.norm() > 0.0) {
      try {
        r.classification = classify_convergence(r.trace);
      } catch (const ValidationError&) {
        // Too few usable points; leave unclassified.
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- escape counterexample

namespace {

ModelSpec counterexample_model() {
  ModelSpec s;
  s.id = ModelId::Counterexample;
  return s;
}

OperatorHandle counterexample_newton(std::size_t n, Level level) {
  const ModelSpec m = counterexample_model();
  AlgorithmConfig cfg = default_config(m, Algorithm::NM);
  if (level == Level::Population) return make_operator(m, Algorithm::NM, level, nullptr, cfg);
  return make_operator(m, Algorithm::NM, level, std::make_shared<const SampleSet>(CounterexampleSpec{n}), cfg);
}

IterationTrace init_only(double theta0) {
  const ParamPoint p = ParamPoint::scalar(theta0);
  return IterationTrace{p, ParamPoint::scalar(0.0), {{0, p, std::abs(theta0)}}, Termination::MaxIters};
}

bool escapes(const IterationTrace& tr) {
  if (tr.reason == Termination::Divergence) return false;
  for (std::size_t k = 1; k < tr.entries.size(); ++k) {
    if (std::abs(tr.entries[k].point[0]) < 1.0) return false;
  }
  return std::abs(tr.back().point[0] - 2.0) <= 0.5;
}

}  // namespace

double counterexample_inner_radius(std::size_t n) {
  if (n < 1) throw ValidationError("counterexample: n must be at least 1");
  const double s = std::pow(static_cast<double>(n), -0.25);
  const auto prof = perturbation_profile(counterexample_newton(n, Level::Sample),
                                         counterexample_newton(n, Level::Population), log_spaced(0.1 * s, 0.5, 40), 2,
                                         0, 2.0 * s, 0.5);
  if (!prof.r_tilde) throw NumericalError("counterexample: Newton profile shows no unstable trend");
  return *prof.r_tilde;
}

std::optional<double> find_escape_init(std::size_t n, double r_tilde, std::size_t T, std::size_t grid) {
  if (!(r_tilde > 0.0) || T < 1 || grid < 2) throw ValidationError("find_escape_init: need r_tilde > 0, T >= 1");
  const OperatorHandle op = counterexample_newton(n, Level::Sample);
  const ParamPoint target = ParamPoint::scalar(0.0);
  for (std::size_t k = 1; k < grid; ++k) {
    const double theta0 = r_tilde * static_cast<double>(k) / static_cast<double>(grid);
    try {
      if (escapes(iterate(op, ParamPoint::scalar(theta0), T, target))) return theta0;
    } catch (const IterationError&) {
      // Singular Hessian on this path; try the next grid point.
    }
  }
  return std::nullopt;
}

EscapeDemo run_escape_demo(std::size_t n, double init_below, double init_annulus, std::size_t T) {
  const double r_tilde = counterexample_inner_radius(n);
  if (!(init_below > 0.0 && init_below < r_tilde && r_tilde < init_annulus)) {
    throw ValidationError("escape demo: need 0 < init_below < r_tilde (" + format_double(r_tilde) +
                          ") < init_annulus");
  }
  auto run = [&](double theta0) {
    if (T == 0) return init_only(theta0);
    return iterate(counterexample_newton(n, Level::Sample), ParamPoint::scalar(theta0), T, ParamPoint::scalar(0.0));
  };
  EscapeDemo demo{n, r_tilde, run(init_below), run(init_annulus)};
  for (std::size_t k = 1; k < demo.below.entries.size(); ++k) {
    if (std::abs(demo.below.entries[k].point[0]) > 1.0) demo.below_left_unit_ball = true;
  }
  demo.below_near_two = std::abs(demo.below.back().point[0] - 2.0) <= 0.5;
  demo.annulus_within_half = true;
  for (const auto& e : demo.annulus.entries) {
    if (!(std::abs(e.point[0]) < 0.5)) demo.annulus_within_half = false;
  }
  return demo;
}

// ---------------------------------------------------------------- polynomial family bounds

namespace {

double poly_bounds_budget(Algorithm a, double p, double q, double eps) {
  switch (a) {
    case Algorithm::GD: return std::pow(eps, -(p - 2.0) / (p - q));
    case Algorithm::NM: return std::log(1.0 / eps);
    case Algorithm::CNM: return std::pow(eps, -(p - 3.0) / (p - 1.0));
    default: break;
  }
  throw ValidationError("polynomial bounds: unsupported algorithm");
}

// The iterate can settle on the double-precision fixed point a few ulps under pow(eps, 1/(p−q)).
constexpr double kFloorRounding = 4 * std::numeric_limits<double>::epsilon();

struct PolyBoundsRun {
  std::optional<std::size_t> hit;
  std::optional<std::size_t> floor_violation;
  double early_error = kNaN;
};

// Runs from θ0 = 1 until the first t with error ≤ 2·floor, then as many steps again
// (capped at 1000) to check the floor past convergence.
PolyBoundsRun poly_bounds_run(Algorithm a, double p, double q, double eps, double floor, std::size_t cap,
                   std::optional<std::size_t> early_t) {
  auto data = std::make_shared<const SampleSet>(PolynomialSpec{p, q, eps, 1});
  const OperatorHandle op = make_sample_operator(data, a, default_config(spec_of(*data), a));
  PolyBoundsRun r;
  std::size_t stop_at = cap;
  iterate_stream(op, ParamPoint::scalar(1.0), ParamPoint::scalar(0.0), cap,
                 [&](std::size_t t, const Vec&, double err) {
                   if (t >= 1 && err < floor * (1 - kFloorRounding) && !r.floor_violation) r.floor_violation = t;
                   if (early_t && t == *early_t) r.early_error = err;
                   if (!r.hit && err <= 2.0 * floor) {
                     r.hit = t;
                     stop_at = std::max(t + std::min<std::size_t>(t, 1000), early_t.value_or(0));
                   }
                   return t >= stop_at;
                 });
  return r;
}

}  // namespace

bool PolyBoundsReport::passed() const {
  for (const auto& e : entries) {
    if (!e.passed()) return false;
  }
  if (nm_affine && nm_affine->r2 < 0.95) return false;
  return !entries.empty();
}

PolyBoundsReport run_polynomial_bounds(double p, double q, const std::vector<double>& eps_list, double margin) {
  PolynomialSpec{p, q, 1e-3, 1}.validate();
  if (eps_list.empty()) throw ValidationError("polynomial bounds: empty eps list");
  for (double e : eps_list) {
    if (!(e > 0.0 && e < 1.0)) throw ValidationError("polynomial bounds: eps must lie in (0, 1)");
  }
  if (!(margin >= 1.0)) throw ValidationError("polynomial bounds: margin must be at least 1");
  std::vector<double> eps = eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());

  PolyBoundsReport rep;
  rep.p = p;
  rep.q = q;
  rep.margin = margin;
  const Algorithm algs[] = {Algorithm::GD, Algorithm::NM, Algorithm::CNM};
  auto cap_for = [&](Algorithm a, double e) {
    return static_cast<std::size_t>(std::ceil(20.0 * poly_bounds_budget(a, p, q, e))) + 2000;
  };

  // Calibrate at the largest eps.
  for (Algorithm a : algs) {
    const double e = eps.front();
    const double floor = std::pow(e, 1.0 / (p - q));
    const auto r = poly_bounds_run(a, p, q, e, floor, cap_for(a, e), std::nullopt);
    const double c = r.hit ? margin * static_cast<double>(*r.hit) / poly_bounds_budget(a, p, q, e) : kNaN;
    (a == Algorithm::GD ? rep.c_gd : a == Algorithm::NM ? rep.c_nm : rep.c_cnm) = c;
  }

  std::vector<double> nm_x, nm_hits;
  for (Algorithm a : algs) {
    const double c = a == Algorithm::GD ? rep.c_gd : a == Algorithm::NM ? rep.c_nm : rep.c_cnm;
    for (double e : eps) {
      PolyBoundsEntry en;
      en.algorithm = a;
      en.eps = e;
      en.floor = std::pow(e, 1.0 / (p - q));
      en.budget = poly_bounds_budget(a, p, q, e);
      en.bound = c * en.budget;
      if (a == Algorithm::GD && std::isfinite(en.bound)) {
        en.early_t = static_cast<std::size_t>(std::floor(kPolyBoundsEarlyFraction * en.bound));
      }
      const auto r = poly_bounds_run(a, p, q, e, en.floor, cap_for(a, e), en.early_t);
      en.hit = r.hit;
      en.floor_violation = r.floor_violation;
      en.floor_ok = !r.floor_violation;
      en.bound_ok = r.hit && static_cast<double>(*r.hit) <= en.bound;
      if (en.early_t) {
        en.early_error = r.early_error;
        en.early_ok = r.early_error > 2.0 * en.floor;
      }
      if (a == Algorithm::NM && r.hit) {
        nm_x.push_back(std::log(1.0 / e));
        nm_hits.push_back(static_cast<double>(*r.hit));
      }
      rep.entries.push_back(en);
    }
  }
  if (nm_x.size() >= 3) rep.nm_affine = fit_linear(nm_x, nm_hits);
  return rep;
}

}  // namespace statopt
