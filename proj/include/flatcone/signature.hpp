#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace flatcone {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Distinguished cone angles (phi1, phi2) together with the defects of the
/// remaining cone points. Instances are only produced by validate_signature.
class AngleSignature {
 public:
  double phi1() const noexcept { return phi1_; }
  double phi2() const noexcept { return phi2_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  int arity() const noexcept { return static_cast<int>(alpha_.size()); }
  double alpha_sum() const noexcept;

  /// Same signature with phi1 and phi2 exchanged.
  AngleSignature swapped() const;

  friend AngleSignature validate_signature(double, double, std::vector<double>);

 private:
  AngleSignature(double phi1, double phi2, std::vector<double> alpha)
      : phi1_(phi1), phi2_(phi2), alpha_(std::move(alpha)) {}

  double phi1_;
  double phi2_;
  std::vector<double> alpha_;
};

/// Ordered partition of the alpha indices into two nonempty sublists.
struct Split {
  std::vector<int> hat_indices;
  std::vector<int> tilde_indices;

  Split reversed() const { return {tilde_indices, hat_indices}; }
  friend bool operator==(const Split&, const Split&) = default;
};

struct SubSignaturePair {
  AngleSignature hat;
  AngleSignature tilde;
  double beta;
};

struct OpenInterval {
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x > lo && x < hi; }
};

AngleSignature validate_signature(double phi1, double phi2,
                                  std::vector<double> alpha);

/// cot(phi1/2) + cot(phi2/2).
double q_factor(double phi1, double phi2);

std::vector<Split> enumerate_splits(const AngleSignature& sig);

/// Values of beta for which all four sub-angles are positive.
OpenInterval beta_interval(const AngleSignature& sig, const Split& split);

SubSignaturePair sub_signatures(const AngleSignature& sig, const Split& split,
                                double beta);

/// q(hat) + q(tilde) of the sub-signature pair at beta.
double kappa(const AngleSignature& sig, const Split& split, double beta);

/// Sum of the alpha entries selected by `indices`.
double partial_sum(const AngleSignature& sig, const std::vector<int>& indices);

/// Parses "pi", "6pi/5", "pi/2", "-pi" or a plain decimal number of radians.
double parse_angle(std::string_view text);

/// Comma-separated list of parse_angle values.
std::vector<double> parse_angle_list(std::string_view text);

}  // namespace flatcone
