#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "flatcone/signature.hpp"

namespace flatcone {

/// Area of a flat cone sphere as a Hermitian form in polygonal coordinates.
struct AreaForm {
  std::vector<double> defects;
  Eigen::MatrixXcd matrix;

  int dimension() const noexcept { return static_cast<int>(matrix.rows()); }
};

/// Full defect list (2pi - phi1, 2pi - phi2, alpha...) of a signature;
/// BadDefectList unless every entry lies in (0, 2pi).
std::vector<double> full_defects(const AngleSignature& sig);

/// Tridiagonal matrix -1/4 [c_k + c_{k+1} on the diagonal, c_{k+1} -/+ i off it],
/// c_k = cot(alpha_k / 2). Needs n >= 3 defects in (0, 2pi) summing to 4pi.
AreaForm hermitian_matrix(const std::vector<double>& defects);

/// det H through the three-term recurrence of a Hermitian tridiagonal matrix.
double determinant(const AreaForm& form);

/// (-1)^(n-1) sin(alpha_n/2) / (4^(n-2) prod_{k<n} sin(alpha_k/2)).
double determinant_closed_form(const std::vector<double>& defects);

struct DetCheck {
  std::complex<double> lhs;
  std::complex<double> rhs;
  bool ok;
};

DetCheck det_identity_check(const std::vector<double>& defects);

/// z^* H z; DimensionMismatch unless z has n - 2 entries.
double area_value(const AreaForm& form, const Eigen::VectorXcd& z);

/// |det H| / ((y, 1)^* H (y, 1))^(n-2); NonPositiveArea when the area is not positive.
double volume_density(const AreaForm& form, const Eigen::VectorXcd& y);

}  // namespace flatcone
