// statopt command-line driver.
//
// Every subcommand accepts --config FILE with "key = value" lines; keys are the long
// flag names (dashes or underscores). Flags given on the command line win over the file.
// Exit codes: 0 success, 2 validation error, 3 runtime failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "statopt/algorithms.hpp"
#include "statopt/analysis.hpp"
#include "statopt/csv.hpp"
#include "statopt/errors.hpp"
#include "statopt/experiments.hpp"
#include "statopt/models.hpp"
#include "statopt/regime.hpp"

using namespace statopt;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

// Splices "--key value" pairs from the config file in front of the user's flags, so
// that with TakeLast the command line overrides the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path || rest.empty()) return rest;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_kv_file(*path)) {
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      injected.push_back("--" + key.substr(0, dot) + "-override");
      injected.push_back(key.substr(dot + 1) + "=" + value);
    } else {
      injected.push_back(flag_name(key));
      injected.push_back(value);
    }
  }
  std::vector<std::string> out{rest.front()};  // the subcommand
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

struct DataOpts {
  std::string model = "regression";
  std::size_t n = 1000;
  std::size_t d = 1;
  int p = 1;
  std::uint64_t seed = 1;
  std::string data;  // CSV path; generated when empty

  ModelSpec spec() const {
    ModelSpec s;
    s.id = parse_model(model);
    s.dim = d;
    s.link_power = p;
    return s;
  }
  std::shared_ptr<const SampleSet> load() const {
    const ModelSpec s = spec();
    if (!data.empty()) return std::make_shared<const SampleSet>(load_dataset(s.id, data, p));
    return std::make_shared<const SampleSet>(generate(s, n, seed));
  }
};

void add_data_opts(CLI::App* app, DataOpts& o, bool with_file) {
  app->add_option("--model", o.model, "nonresponse | mixture | regression | polynomial | counterexample");
  app->add_option("--n", o.n, "sample size");
  app->add_option("--d", o.d, "dimension");
  app->add_option("--p", o.p, "link power (regression)");
  app->add_option("--seed", o.seed, "RNG seed");
  if (with_file) app->add_option("--data", o.data, "dataset CSV (overrides generation)");
}

struct AlgOpts {
  std::optional<double> step_size;
  std::optional<double> cubic_constant;
};

void add_alg_opts(CLI::App* app, AlgOpts& o) {
  app->add_option("--step-size", o.step_size, "GD/GA step size");
  app->add_option("--cubic-constant", o.cubic_constant, "CNM constant L");
}

AlgorithmConfig make_config(const ModelSpec& m, Algorithm a, const AlgOpts& o) {
  AlgorithmConfig c = default_config(m, a);
  if (o.step_size) c.step_size = *o.step_size;
  if (o.cubic_constant) c.cubic_constant = *o.cubic_constant;
  return c;
}

Vec along_first_axis(double r, std::size_t d) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(d));
  v[0] = r;
  return v;
}

void write_trace(const IterationTrace& tr, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "t";
  for (std::size_t i = 0; i < tr.initial.dim(); ++i) os << ",theta_" << i + 1;
  os << ",error\n";
  for (const auto& e : tr.entries) {
    os << e.t;
    for (std::size_t i = 0; i < e.point.dim(); ++i) os << ',' << format_double(e.point[i]);
    os << ',' << format_double(e.error) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statopt: fixed-point operator laboratory"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string unused_config;
  app.add_option("--config", unused_config, "key = value file (flags override it)");

  // gen-data
  DataOpts gen;
  std::string gen_out;
  auto* c_gen = app.add_subcommand("gen-data", "generate a dataset and write it as CSV");
  add_data_opts(c_gen, gen, false);
  c_gen->add_option("--out", gen_out, "output CSV")->required();

  // run
  DataOpts run;
  AlgOpts run_alg;
  std::string run_algorithm = "GD", run_level = "sample", run_out;
  double run_init = 0.5;
  std::size_t run_T = 100;
  std::optional<double> run_threshold;
  auto* c_run = app.add_subcommand("run", "single trajectory");
  add_data_opts(c_run, run, true);
  add_alg_opts(c_run, run_alg);
  c_run->add_option("--algorithm", run_algorithm, "GD | GA | NM | CNM | EM");
  c_run->add_option("--level", run_level, "sample | population");
  c_run->add_option("--init", run_init, "initial radius along the first axis");
  c_run->add_option("--T", run_T, "iterations (max iterations with --threshold)");
  c_run->add_option("--threshold", run_threshold, "stop once the error drops below this");
  c_run->add_option("--out", run_out, "trace CSV");

  // sweep
  std::map<std::string, std::string> sweep_kv;
  std::vector<std::string> sweep_overrides;
  std::string sweep_out, sweep_summary, sweep_plot;
  bool no_timing = false;
  auto* c_sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over n and trials");
  for (const char* key : {"preset", "model", "algorithms", "n_grid", "d", "p", "trials", "seed", "init", "threshold",
                          "max_iters", "step_size", "cubic_constant", "workers"}) {
    c_sweep->add_option_function<std::string>(
        flag_name(key), [&sweep_kv, key](const std::string& v) { sweep_kv[key] = v; }, key);
  }
  c_sweep->add_option("--init-override", sweep_overrides, "ALG=rule, e.g. NM=annulus:10,0.05")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c_sweep->add_option("--out", sweep_out, "per-trial CSV");
  c_sweep->add_option("--summary", sweep_summary, "per-(algorithm, n) medians CSV");
  c_sweep->add_option("--plot", sweep_plot, "SVG of median final error vs n");
  c_sweep->add_flag("--no-timing", no_timing, "leave wall_time empty (byte-reproducible CSV)");

  // pop-rates
  std::string pr_model = "regression", pr_algorithms = "GD,NM,CNM";
  std::size_t pr_d = 1, pr_T = 2000;
  int pr_p = 1;
  double pr_init = 1.0;
  auto* c_pop = app.add_subcommand("pop-rates", "population traces and FAST/SLOW classification");
  c_pop->add_option("--model", pr_model);
  c_pop->add_option("--algorithms", pr_algorithms);
  c_pop->add_option("--d", pr_d);
  c_pop->add_option("--p", pr_p);
  c_pop->add_option("--init", pr_init);
  c_pop->add_option("--T", pr_T);

  // stability
  DataOpts st;
  AlgOpts st_alg;
  std::string st_algorithm = "GD", st_out;
  double r_min = 1e-3, r_max = 0.5;
  std::optional<double> fit_lo, fit_hi;
  std::size_t st_count = 40, st_probes = 16;
  std::uint64_t st_probe_seed = 0;
  auto* c_st = app.add_subcommand("stability", "sample-vs-population perturbation profile");
  add_data_opts(c_st, st, true);
  add_alg_opts(c_st, st_alg);
  c_st->add_option("--algorithm", st_algorithm);
  c_st->add_option("--r-min", r_min);
  c_st->add_option("--r-max", r_max);
  c_st->add_option("--count", st_count, "number of log-spaced radii");
  c_st->add_option("--probes", st_probes, "probe directions per radius (d > 1)");
  c_st->add_option("--probe-seed", st_probe_seed);
  c_st->add_option("--fit-lo", fit_lo);
  c_st->add_option("--fit-hi", fit_hi);
  c_st->add_option("--out", st_out, "profile CSV");

  // epochs
  double ep_beta = 0.5, ep_gamma = 1.0, ep_eps = 1e-2, ep_alpha = 0.1, ep_c2 = 1.0;
  auto* c_ep = app.add_subcommand("epochs", "print the epoch schedule");
  c_ep->add_option("--beta", ep_beta);
  c_ep->add_option("--gamma", ep_gamma);
  c_ep->add_option("--eps", ep_eps);
  c_ep->add_option("--alpha", ep_alpha);
  c_ep->add_option("--c2", ep_c2);

  // prop4
  double p4_p = 4, p4_q = 2, p4_margin = kPolyBoundsMargin;
  std::string p4_eps_text = "1e-3,1e-4,1e-5";
  auto* c_p4 = app.add_subcommand("prop4", "polynomial-family iteration and floor bounds");
  c_p4->add_option("--p", p4_p);
  c_p4->add_option("--q", p4_q);
  c_p4->add_option("--eps", p4_eps_text, "comma-separated eps values");
  c_p4->add_option("--margin", p4_margin);

  // escape
  std::size_t es_n = 10000, es_T = 60;
  std::optional<double> es_below, es_annulus;
  std::string es_out;
  auto* c_es = app.add_subcommand("escape", "Newton escape on the counterexample");
  c_es->add_option("--n", es_n);
  c_es->add_option("--T", es_T);
  c_es->add_option("--init-below", es_below, "default: searched in (0, r_tilde)");
  c_es->add_option("--init-annulus", es_annulus, "default: 3 n^{-1/4}");
  c_es->add_option("--out", es_out, "prefix for <prefix>_below.csv and <prefix>_annulus.csv");

  // plot
  std::string pl_in, pl_out, pl_metric = "error";
  auto* c_pl = app.add_subcommand("plot", "SVG from a sweep CSV");
  c_pl->add_option("--in", pl_in)->required();
  c_pl->add_option("--out", pl_out)->required();
  c_pl->add_option("--metric", pl_metric, "error | hits");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  try {
    if (*c_gen) {
      save_dataset(generate(gen.spec(), gen.n, gen.seed), gen_out);
      std::cout << "wrote " << gen_out << "\n";
    } else if (*c_run) {
      const Level level = parse_level(run_level);
      const Algorithm alg = parse_algorithm(run_algorithm);
      ModelSpec m = run.spec();
      std::shared_ptr<const SampleSet> data;
      if (level == Level::Sample) {
        data = run.load();
        m = spec_of(*data);
      }
      const auto op = make_operator(m, alg, level, data, make_config(m, alg, run_alg));
      const ParamPoint theta0(along_first_axis(run_init, m.dim));
      const ParamPoint target = ParamPoint::zeros(m.dim);
      IterationTrace tr = run_threshold ? iterate_until(op, theta0, target, *run_threshold, run_T).trace
                                        : iterate(op, theta0, run_T, target);
      const auto [k, best] = best_iterate_error(tr, target);
      std::cout << "steps=" << tr.back().t << " reason=" << to_string(tr.reason)
                << " final_error=" << format_double(tr.back().error) << " best_k=" << k
                << " best_error=" << format_double(best) << "\n";
      if (!run_out.empty()) write_trace(tr, run_out);
    } else if (*c_sweep) {
      SweepConfig cfg;
      apply_kv(cfg, sweep_kv);
      for (const auto& o : sweep_overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ValidationError("--init-override expects ALG=rule");
        cfg.init_override[parse_algorithm(o.substr(0, eq))] = InitRule::parse(o.substr(eq + 1));
      }
      const auto res = run_sweep(cfg);
      if (!sweep_out.empty()) emit_csv(res, sweep_out, CsvOptions{!no_timing});
      if (!sweep_summary.empty()) emit_aggregate_csv(res, sweep_summary);
      if (!sweep_plot.empty()) emit_plot(res, sweep_plot);
      std::printf("%-4s %8s %16s %16s %6s\n", "alg", "n", "median_error", "median_hits", "failed");
      for (const auto& g : res.aggregates) {
        std::printf("%-4s %8zu %16.6g %16.6g %6zu\n", to_string(g.algorithm).c_str(), g.n, g.median_final_error,
                    g.median_hit_iteration, g.failed);
      }
      for (const auto& f : fit_series(res)) {
        std::printf("%s: error slope %s, hit slope %s\n", to_string(f.algorithm).c_str(),
                    f.error_fit ? std::to_string(f.error_fit->slope).c_str() : "n/a",
                    f.hit_fit ? std::to_string(f.hit_fit->slope).c_str() : "n/a");
      }
    } else if (*c_pop) {
      ModelSpec m;
      m.id = parse_model(pr_model);
      m.dim = pr_d;
      m.link_power = pr_p;
      std::vector<Algorithm> algs;
      std::stringstream ss(pr_algorithms);
      for (std::string a; std::getline(ss, a, ',');) algs.push_back(parse_algorithm(a));
      for (const auto& r : run_population_rates(m, algs, ParamPoint(along_first_axis(pr_init, pr_d)), pr_T)) {
        std::cout << to_string(r.algorithm) << ": final_error=" << format_double(r.trace.back().error);
        if (r.classification) {
          const auto& c = *r.classification;
          std::cout << " mode=" << to_string(c.mode) << (c.mode == ConvergenceMode::Fast ? " kappa=" : " beta=")
                    << c.rate << " R2=" << c.fit.r2;
        } else {
          std::cout << " mode=unclassified";
        }
        std::cout << "\n";
      }
    } else if (*c_st) {
      const auto data = st.load();
      const ModelSpec m = spec_of(*data);
      const Algorithm alg = parse_algorithm(st_algorithm);
      const auto prof = perturbation_profile(data, alg, make_config(m, alg, st_alg), log_spaced(r_min, r_max, st_count),
                                             st_probes, st_probe_seed, fit_lo.value_or(r_min), fit_hi.value_or(r_max));
      for (std::size_t k = 0; k < prof.radii.size(); ++k) {
        std::printf("%12.6g %14.6g %4zu\n", prof.radii[k], prof.sup_perturbation[k], prof.probes_ok[k]);
      }
      std::cout << "gamma_hat=" << (prof.gamma_hat ? format_double(*prof.gamma_hat) : "n/a")
                << " r_tilde=" << (prof.r_tilde ? format_double(*prof.r_tilde) : "n/a") << "\n";
      if (!st_out.empty()) write_profile_csv(prof, st_out);
    } else if (*c_ep) {
      const auto s = epoch_schedule(ep_beta, ep_gamma, ep_eps, ep_alpha, ep_c2);
      std::cout << "b=" << s.b << " b'=" << s.b_prime << " nu*=" << s.nu_star << " epochs=" << s.num_epochs << "\n";
      std::printf("%4s %12s %14s %14s %14s %14s\n", "l", "lambda", "T1", "T2", "T", "S");
      for (std::size_t l = 0; l < s.lambda.size(); ++l) {
        std::printf("%4zu %12.8f %14.6g %14.6g %14.6g %14.6g\n", l, s.lambda[l], s.t1[l], s.t2[l], s.t[l], s.s[l]);
      }
    } else if (*c_p4) {
      std::vector<double> p4_eps;
      std::stringstream ss(p4_eps_text);
      for (std::string e; std::getline(ss, e, ',');) p4_eps.push_back(parse_double(e, "--eps"));
      const auto rep = run_polynomial_bounds(p4_p, p4_q, p4_eps, p4_margin);
      std::cout << "C_gd=" << rep.c_gd << " C_nm=" << rep.c_nm << " C_cnm=" << rep.c_cnm << "\n";
      for (const auto& e : rep.entries) {
        std::printf("%-4s eps=%-8g floor=%-10.6g hit=%-10s bound=%-12.6g %s", to_string(e.algorithm).c_str(), e.eps,
                    e.floor, e.hit ? std::to_string(*e.hit).c_str() : "-", e.bound, e.passed() ? "ok" : "FAIL");
        if (e.floor_violation) std::printf(" floor violated at t=%zu", *e.floor_violation);
        if (e.early_t) std::printf(" error at t=%zu: %.6g", *e.early_t, e.early_error);
        std::printf("\n");
      }
      if (rep.nm_affine) std::cout << "NM hits vs log(1/eps): R2=" << rep.nm_affine->r2 << "\n";
      std::cout << (rep.passed() ? "PASS" : "FAIL") << "\n";
    } else if (*c_es) {
      const double r_tilde = counterexample_inner_radius(es_n);
      const double below = es_below ? *es_below : find_escape_init(es_n, r_tilde, std::max<std::size_t>(es_T, 1))
                                                      .value_or(0.5 * r_tilde);
      const double annulus = es_annulus.value_or(3.0 * std::pow(static_cast<double>(es_n), -0.25));
      const auto demo = run_escape_demo(es_n, below, annulus, es_T);
      std::cout << "r_tilde=" << r_tilde << "\n"
                << "below:   init=" << below << " end=" << demo.below.back().point[0]
                << " left_B(0,1)=" << demo.below_left_unit_ball << " near_2=" << demo.below_near_two << "\n"
                << "annulus: init=" << annulus << " end=" << demo.annulus.back().point[0]
                << " within_B(0,0.5)=" << demo.annulus_within_half << "\n";
      if (!es_out.empty()) {
        write_trace(demo.below, es_out + "_below.csv");
        write_trace(demo.annulus, es_out + "_annulus.csv");
      }
    } else if (*c_pl) {
      SweepResult res;
      res.rows = parse_sweep_csv(pl_in);
      res.config.algorithms.clear();
      for (const auto& r : res.rows) {
        if (std::find(res.config.algorithms.begin(), res.config.algorithms.end(), r.algorithm) ==
            res.config.algorithms.end()) {
          res.config.algorithms.push_back(r.algorithm);
        }
      }
      res.aggregates = aggregate(res.rows);
      emit_plot(res, pl_out, pl_metric == "hits" ? PlotMetric::HitIteration : PlotMetric::FinalError);
      std::cout << "wrote " << pl_out << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
