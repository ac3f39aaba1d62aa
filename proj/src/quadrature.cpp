#include "flatcone/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "flatcone/signature.hpp"

namespace flatcone {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(build_gauss_legendre(n));
  return *slot;
}

QuadratureRule gauss_legendre(int n, double lo, double hi) {
  QuadratureRule mapped = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t k = 0; k < mapped.nodes.size(); ++k) {
    mapped.nodes[k] = mid + half * mapped.nodes[k];
    mapped.weights[k] *= half;
  }
  return mapped;
}

QuadratureRule tanh_gauss_legendre(int n, double lo, double hi, double u_max) {
  const QuadratureRule& base = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  QuadratureRule rule;
  rule.nodes.reserve(base.nodes.size());
  rule.weights.reserve(base.nodes.size());
  for (std::size_t k = 0; k < base.nodes.size(); ++k) {
    const double u = u_max * base.nodes[k];
    const double t = std::tanh(u);
    const double sech = 1.0 / std::cosh(u);
    double beta = mid + half * t;
    // Keep nodes strictly interior even when tanh rounds to +-1.
    beta = std::min(std::max(beta, std::nextafter(lo, hi)), std::nextafter(hi, lo));
    rule.nodes.push_back(beta);
    rule.weights.push_back(base.weights[k] * u_max * half * sech * sech);
  }
  return rule;
}

}  // namespace flatcone
