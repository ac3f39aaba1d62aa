#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "flatcone/error.hpp"

namespace flatcone {

template <typename F>
double integrate_adaptive(F&& f, double lo, double hi, double rel_tol,
                          double abs_tol) {
  if (!(hi > lo)) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, lo, hi, 25, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > std::max(abs_tol, 1e3 * rel_tol * l1)) {
    throw Error(ErrorKind::QuadratureNotConverged,
                "adaptive quadrature on [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "] error " + std::to_string(error));
  }
  return value;
}

}  // namespace flatcone
