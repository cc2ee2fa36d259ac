#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "statopt/errors.hpp"
#include "statopt/models.hpp"

namespace statopt {

namespace {

// Golub–Welsch for starting values, then Newton polish on the orthonormal recurrence.
GaussHermiteRule build_rule(int n) {
  Mat jacobi = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi, Eigen::EigenvaluesOnly);
  const Vec& guess = eig.eigenvalues();

  const double pim4 = std::pow(std::numbers::pi, -0.25);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = guess[i];
    double dp = 0.0;
    for (int it = 0; it < 20; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = x * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      dp = std::sqrt(2.0 * n) * p2;
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / (dp * dp);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int order) {
  if (order < 1 || order > 400) throw ValidationError("Gauss-Hermite order out of range");
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

double gauss_hermite_expect(const std::function<double(double)>& g, int order) {
  if (order < 10 || order > 200) throw ValidationError("gauss_hermite_expect: order must lie in [10, 200]");
  const auto& rule = gauss_hermite_rule(order);
  const double scale = std::numbers::sqrt2;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = g(scale * rule.nodes[i]);
    if (!std::isfinite(v)) throw NumericalError("gauss_hermite_expect: non-finite integrand at a node");
    acc += rule.weights[i] * v;
  }
  return acc / std::sqrt(std::numbers::pi);
}

}  // namespace statopt
