#pragma once

#include <span>
#include <vector>

namespace flatcone {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n, thread-safe.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [lo, hi].
QuadratureRule gauss_legendre(int n, double lo, double hi);

/// Rule for the open interval (lo, hi): beta = mid + half * tanh(u) with
/// Gauss-Legendre nodes in u on [-u_max, u_max]. Weights include the
/// sech^2 Jacobian, and no node lands on an endpoint.
QuadratureRule tanh_gauss_legendre(int n, double lo, double hi,
                                   double u_max = 9.0);

template <typename F>
double integrate_gl(F&& f, double lo, double hi, int n = 16) {
  const QuadratureRule& rule = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  return sum * half;
}

/// Adaptive Gauss-Kronrod (61-point) integration; throws
/// QuadratureNotConverged if the error estimate stays above tolerance.
template <typename F>
double integrate_adaptive(F&& f, double lo, double hi, double rel_tol = 1e-11,
                          double abs_tol = 1e-300);

}  // namespace flatcone

#include "flatcone/quadrature_impl.hpp"
