#include "flatcone/thurston.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flatcone/error.hpp"

namespace flatcone {

namespace {

constexpr double kDefectSumTolerance = 1e-12;

void require_thurston_defects(const std::vector<double>& defects) {
  if (defects.size() < 3) {
    throw Error(ErrorKind::BadDefectList, "at least three defects are required");
  }
  for (double a : defects) {
    if (!(a > 0.0 && a < kTwoPi)) {
      std::ostringstream msg;
      msg << "defect " << a << " outside (0, 2pi)";
      throw Error(ErrorKind::BadDefectList, msg.str());
    }
  }
  std::vector<double> sorted = defects;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double a : sorted) sum += a;
  if (std::abs(sum - 2.0 * kTwoPi) > kDefectSumTolerance) {
    std::ostringstream msg;
    msg << "defects sum to " << sum << ", not 4pi";
    throw Error(ErrorKind::BadDefectList, msg.str());
  }
}

}  // namespace

std::vector<double> full_defects(const AngleSignature& sig) {
  std::vector<double> defects{kTwoPi - sig.phi1(), kTwoPi - sig.phi2()};
  defects.insert(defects.end(), sig.alpha().begin(), sig.alpha().end());
  for (double a : defects) {
    if (!(a > 0.0 && a < kTwoPi)) {
      throw Error(ErrorKind::BadDefectList, "distinguished angles give a defect outside (0, 2pi)");
    }
  }
  return defects;
}

AreaForm hermitian_matrix(const std::vector<double>& defects) {
  require_thurston_defects(defects);
  const int n = static_cast<int>(defects.size());
  const int m = n - 2;
  Eigen::VectorXd c(n);
  for (int k = 0; k < n; ++k) c[k] = 1.0 / std::tan(0.5 * defects[static_cast<std::size_t>(k)]);

  const std::complex<double> i(0.0, 1.0);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    h(k, k) = -0.25 * (c[k] + c[k + 1]);
    if (k + 1 < m) {
      h(k, k + 1) = -0.25 * (c[k + 1] - i);
      h(k + 1, k) = std::conj(h(k, k + 1));
    }
  }
  return AreaForm{defects, std::move(h)};
}

double determinant(const AreaForm& form) {
  const Eigen::MatrixXcd& h = form.matrix;
  double prev = 1.0;
  double cur = h(0, 0).real();
  for (int k = 1; k < h.rows(); ++k) {
    const double next = h(k, k).real() * cur - std::norm(h(k - 1, k)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double determinant_closed_form(const std::vector<double>& defects) {
  const std::size_t n = defects.size();
  double denominator = std::pow(4.0, static_cast<double>(n) - 2.0);
  for (std::size_t k = 0; k + 1 < n; ++k) denominator *= std::sin(0.5 * defects[k]);
  const double sign = n % 2 == 0 ? -1.0 : 1.0;
  return sign * std::sin(0.5 * defects.back()) / denominator;
}

DetCheck det_identity_check(const std::vector<double>& defects) {
  const AreaForm form = hermitian_matrix(defects);
  const std::complex<double> lhs(determinant(form), 0.0);
  const std::complex<double> rhs(determinant_closed_form(defects), 0.0);
  return {lhs, rhs, std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs)};
}

double area_value(const AreaForm& form, const Eigen::VectorXcd& z) {
  if (z.size() != form.matrix.rows()) {
    std::ostringstream msg;
    msg << "coordinate vector has " << z.size() << " entries, expected " << form.matrix.rows();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  return (z.adjoint() * form.matrix * z)(0, 0).real();
}

double volume_density(const AreaForm& form, const Eigen::VectorXcd& y) {
  const Eigen::Index m = form.matrix.rows();
  if (y.size() != m - 1) {
    std::ostringstream msg;
    msg << "chart point has " << y.size() << " entries, expected " << m - 1;
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  Eigen::VectorXcd w(m);
  w << y, 1.0;
  const double area = area_value(form, w);
  if (!(area > 0.0)) throw Error(ErrorKind::NonPositiveArea, "chart point has nonpositive area");
  return std::abs(determinant(form)) / std::pow(area, static_cast<double>(m));
}

}  // namespace flatcone
