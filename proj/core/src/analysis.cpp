#include "statopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "statopt/algorithms.hpp"
#include "statopt/csv.hpp"
#include "statopt/errors.hpp"

namespace statopt {

// ---------------------------------------------------------------- fits

RateFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ValidationError("fit: xs and ys differ in length");
  if (xs.size() < 3) throw ValidationError("fit: at least 3 points are required");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw ValidationError("fit: non-finite input");
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("fit: xs are all equal");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    rss += r * r;
  }
  f.residual_norm = std::sqrt(rss);
  f.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  f.domain = FitDomain::Linear;
  f.points = xs.size();
  return f;
}

namespace {

std::vector<double> logs(const std::vector<double>& v, const char* what) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) {
    if (!(x > 0.0)) throw ValidationError(std::string("fit: nonpositive ") + what);
    out.push_back(std::log(x));
  }
  return out;
}

}  // namespace

RateFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto f = fit_linear(logs(xs, "x"), logs(ys, "y"));
  f.domain = FitDomain::LogLog;
  return f;
}

RateFit fit_semilog(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto f = fit_linear(xs, logs(ys, "y"));
  f.domain = FitDomain::SemiLog;
  return f;
}

// ---------------------------------------------------------------- classification

const char* to_string(ConvergenceMode m) { return m == ConvergenceMode::Fast ? "FAST" : "SLOW"; }

ConvergenceClass classify_errors(const std::vector<double>& errors) {
  std::size_t positive = 0;
  for (double e : errors) positive += e > 0.0;
  if (errors.size() < 20 || positive < 20) {
    throw ValidationError("classify_convergence: need at least 20 entries with positive error");
  }
  // Truncate at the first exact zero.
  std::size_t end = errors.size();
  for (std::size_t t = 0; t < errors.size(); ++t) {
    if (errors[t] == 0.0) {
      end = t;
      break;
    }
  }
  // Drop a trailing plateau at the numerical floor, keeping its first entry.
  const double eps = std::numeric_limits<double>::epsilon();
  const double last = errors[end - 1];
  while (end > kTransientIterations + 1 &&
         std::abs(errors[end - 2] - last) <= 2.0 * eps * std::max(last, errors[end - 2])) {
    --end;
  }
  std::vector<double> ts, logts, es;
  for (std::size_t t = kTransientIterations; t < end; ++t) {
    ts.push_back(static_cast<double>(t));
    logts.push_back(std::log(static_cast<double>(t)));
    es.push_back(errors[t]);
  }
  if (es.size() < 3) throw ValidationError("classify_convergence: too few points after trimming");

  ConvergenceClass c;
  c.semilog = fit_semilog(ts, es);
  c.loglog = fit_semilog(logts, es);
  c.loglog.domain = FitDomain::LogLog;
  if (c.semilog.r2 >= c.loglog.r2 + kFastMargin) {
    c.mode = ConvergenceMode::Fast;
    c.rate = std::exp(c.semilog.slope);
    c.fit = c.semilog;
  } else {
    c.mode = ConvergenceMode::Slow;
    c.rate = -c.loglog.slope;
    c.fit = c.loglog;
  }
  return c;
}

ConvergenceClass classify_convergence(const IterationTrace& trace) { return classify_errors(trace.errors()); }

// ---------------------------------------------------------------- stability

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw ValidationError("log_spaced: need 0 < lo < hi, count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

StabilityProfile perturbation_profile(const OperatorHandle& sample, const OperatorHandle& population,
                                      const std::vector<double>& radii, std::size_t probes_per_radius,
                                      std::uint64_t seed, double fit_lo, double fit_hi) {
  const std::size_t d = sample.dim();
  if (population.dim() != d) throw ValidationError("profile: operator dimensions differ");
  if (radii.empty()) throw ValidationError("profile: no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw ValidationError("profile: radii must be positive");
    if (k && !(radii[k] > radii[k - 1])) throw ValidationError("profile: radii must be strictly increasing");
  }
  if (d > 1 && probes_per_radius < 8) throw ValidationError("profile: at least 8 probes per radius when d > 1");
  if (!(fit_lo <= fit_hi)) throw ValidationError("profile: empty fit range");
  constexpr double kEdge = 1e-12;
  if (fit_lo < radii.front() * (1 - kEdge) || fit_hi > radii.back() * (1 + kEdge)) {
    throw ValidationError("profile: fit range must lie within the profiled radii");
  }

  std::vector<Vec> directions;
  if (d == 1) {
    directions = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < probes_per_radius; ++i) {
      Vec u(static_cast<Eigen::Index>(d));
      do {
        for (std::size_t j = 0; j < d; ++j) u[static_cast<Eigen::Index>(j)] = normal(rng);
      } while (u.norm() == 0.0);
      directions.push_back(u / u.norm());
    }
  }

  StabilityProfile prof;
  prof.radii = radii;
  prof.probes_per_radius = directions.size();
  prof.fit_lo = fit_lo;
  prof.fit_hi = fit_hi;
  for (double r : radii) {
    double sup = 0.0;
    std::size_t ok = 0;
    for (const Vec& u : directions) {
      try {
        const Vec theta = r * u;
        const double disc = (sample.apply(theta) - population.apply(theta)).norm();
        if (!std::isfinite(disc)) continue;
        sup = std::max(sup, disc);
        ++ok;
      } catch (const NumericalError&) {
        // Failed probes are skipped and counted.
      }
    }
    const bool valid = 2 * ok > directions.size();
    prof.sup_perturbation.push_back(valid ? sup : std::numeric_limits<double>::quiet_NaN());
    prof.probes_ok.push_back(ok);
    prof.valid.push_back(valid);
  }

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (prof.valid[k] && prof.sup_perturbation[k] > 0.0 && radii[k] >= fit_lo && radii[k] <= fit_hi) {
      xs.push_back(radii[k]);
      ys.push_back(prof.sup_perturbation[k]);
    }
  }
  if (xs.size() >= 3) {
    prof.fit = fit_power_law(xs, ys);
    prof.gamma_hat = prof.fit->slope;
    if (*prof.gamma_hat < 0.0) prof.r_tilde = detect_inner_radius(prof);
  }
  return prof;
}

StabilityProfile perturbation_profile(std::shared_ptr<const SampleSet> data, Algorithm algorithm,
                                      const AlgorithmConfig& config, const std::vector<double>& radii,
                                      std::size_t probes_per_radius, std::uint64_t seed, double fit_lo,
                                      double fit_hi) {
  if (!data) throw ValidationError("profile: dataset required");
  const ModelSpec model = spec_of(*data);
  const auto sample = make_operator(model, algorithm, Level::Sample, data, config);
  const auto population = make_operator(model, algorithm, Level::Population, nullptr, config);
  return perturbation_profile(sample, population, radii, probes_per_radius, seed, fit_lo, fit_hi);
}

double detect_inner_radius(const StabilityProfile& profile) {
  if (!profile.gamma_hat || !profile.fit) throw ValidationError("detect_inner_radius: profile has no fitted trend");
  if (*profile.gamma_hat >= 0.0) throw ValidationError("detect_inner_radius: profile is stable (gamma_hat >= 0)");
  const RateFit& f = *profile.fit;
  std::optional<double> best;
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < profile.radii.size(); ++k) {
    if (!profile.valid[k]) continue;
    const double r = profile.radii[k];
    smallest = std::min(smallest, r);
    const double predicted = std::exp(f.intercept) * std::pow(r, f.slope);
    if (profile.sup_perturbation[k] > 2.0 * predicted) {
      if (!best || r > *best) best = r;
    }
  }
  if (best) return *best;
  if (!std::isfinite(smallest)) throw ValidationError("detect_inner_radius: no valid radii");
  return smallest;
}

// ---------------------------------------------------------------- CSV

void write_profile_csv(const StabilityProfile& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "radius,sup_perturbation,probes_ok\n";
  for (std::size_t k = 0; k < p.radii.size(); ++k) {
    os << format_double(p.radii[k]) << ',' << format_double(p.sup_perturbation[k]) << ',' << p.probes_ok[k]
       << '\n';
  }
  os << "\ngamma_hat,r_tilde,r2\n";
  os << (p.gamma_hat ? format_double(*p.gamma_hat) : "") << ',' << (p.r_tilde ? format_double(*p.r_tilde) : "")
     << ',' << (p.fit ? format_double(p.fit->r2) : "") << '\n';
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

StabilityProfile read_profile_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  const auto split = text.find("\n\n");
  if (split == std::string::npos) throw ValidationError(path + ": missing summary block");
  const auto table = parse_csv(std::string_view(text).substr(0, split + 1), path);
  const auto summary = parse_csv(std::string_view(text).substr(split + 2), path);
  StabilityProfile p;
  for (const auto& row : table.rows) {
    p.radii.push_back(parse_double(row[0], path));
    p.sup_perturbation.push_back(parse_double(row[1], path));
    p.probes_ok.push_back(static_cast<std::size_t>(parse_double(row[2], path)));
    p.valid.push_back(std::isfinite(p.sup_perturbation.back()));
  }
  if (summary.rows.size() == 1) {
    const auto& row = summary.rows[0];
    if (!row[0].empty()) p.gamma_hat = parse_double(row[0], path);
    if (!row[1].empty()) p.r_tilde = parse_double(row[1], path);
    if (!row[2].empty()) {
      RateFit f;
      f.r2 = parse_double(row[2], path);
      if (p.gamma_hat) f.slope = *p.gamma_hat;
      p.fit = f;
    }
  }
  return p;
}

}  // namespace statopt
