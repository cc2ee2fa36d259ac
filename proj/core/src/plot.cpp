#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "statopt/experiments.hpp"

namespace statopt {

namespace {

constexpr double kW = 640, kH = 440;
constexpr double kLeft = 80, kRight = 170, kTop = 30, kBottom = 60;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Range {
  double lo = 0, hi = 0;  // log10 decades, widened to whole decades
};

Range decade_range(const std::vector<double>& v) {
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (double x : v) {
    if (x > 0 && std::isfinite(x)) {
      lo = std::min(lo, std::log10(x));
      hi = std::max(hi, std::log10(x));
    }
  }
  if (lo > hi) return {0, 1};
  Range r{std::floor(lo), std::ceil(hi)};
  if (r.hi == r.lo) r.hi += 1;
  return r;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

}  // namespace

std::string plot_svg(const SweepResult& result, PlotMetric metric) {
  const bool errors = metric == PlotMetric::FinalError;
  std::vector<double> xs, ys;
  for (const auto& g : result.aggregates) {
    xs.push_back(static_cast<double>(g.n));
    ys.push_back(errors ? g.median_final_error : g.median_hit_iteration);
  }
  const Range rx = decade_range(xs), ry = decade_range(ys);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (std::log10(x) - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (std::log10(y) - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = rx.lo; e <= rx.hi + 1e-9; e += 1) {
    const double x = kLeft + (e - rx.lo) / (rx.hi - rx.lo) * pw;
    os << "<line x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x << "\" y2=\"" << kTop + ph + 5
       << "\" stroke=\"black\"/>\n<text x=\"" << x << "\" y=\"" << kTop + ph + 20
       << "\" text-anchor=\"middle\">1e" << static_cast<int>(e) << "</text>\n";
  }
  for (double e = ry.lo; e <= ry.hi + 1e-9; e += 1) {
    const double y = kTop + ph - (e - ry.lo) / (ry.hi - ry.lo) * ph;
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\"" << kLeft << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15 << "\" text-anchor=\"middle\">n</text>\n";
  os << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << kTop + ph / 2 << ")\">" << (errors ? "median final error" : "median hit iteration") << "</text>\n";

  const auto fits = fit_series(result);
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const Algorithm a = fits[k].algorithm;
    const char* color = kColors[k % 5];
    std::ostringstream pts;
    os << "<g class=\"series\" data-algorithm=\"" << to_string(a) << "\">\n";
    for (const auto& g : result.series(a)) {
      const double y = errors ? g.median_final_error : g.median_hit_iteration;
      if (!(y > 0) || !std::isfinite(y)) continue;
      pts << px(static_cast<double>(g.n)) << ',' << py(y) << ' ';
      os << "<circle cx=\"" << px(static_cast<double>(g.n)) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << pts.str() << "\"/>\n</g>\n";
    const auto& fit = errors ? fits[k].error_fit : fits[k].hit_fit;
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << kW - kRight + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kW - kRight + 32 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << color << "\"/>\n";
    os << "<text class=\"legend\" x=\"" << kW - kRight + 38 << "\" y=\"" << ly << "\">" << to_string(a)
       << " slope " << (fit ? fmt(fit->slope) : std::string("n/a")) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const SweepResult& result, const std::string& path, PlotMetric metric) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << plot_svg(result, metric);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace statopt
