#include "flatcone/signature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "flatcone/error.hpp"

namespace flatcone {

namespace {

constexpr double kGaussBonnetTolerance = 1e-12;

// Summation in ascending magnitude keeps the Gauss-Bonnet check independent
// of the order in which the caller lists the angles.
double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

double cot_half(double angle) { return 1.0 / std::tan(0.5 * angle); }

}  // namespace

double AngleSignature::alpha_sum() const noexcept {
  double sum = 0.0;
  for (double a : alpha_) sum += a;
  return sum;
}

AngleSignature AngleSignature::swapped() const {
  return AngleSignature(phi2_, phi1_, alpha_);
}

AngleSignature validate_signature(double phi1, double phi2,
                                  std::vector<double> alpha) {
  if (alpha.empty()) throw Error(ErrorKind::EmptyAlpha, "alpha is empty");
  for (double a : alpha) {
    if (!(a > 0.0 && a < kTwoPi)) {
      std::ostringstream msg;
      msg << "defect " << a << " outside (0, 2pi)";
      throw Error(ErrorKind::DefectOutOfRange, msg.str());
    }
  }
  if (!(phi1 > 0.0 && phi2 > 0.0) || !std::isfinite(phi1) ||
      !std::isfinite(phi2)) {
    throw Error(ErrorKind::DefectOutOfRange,
                "distinguished angles must be positive and finite");
  }
  std::vector<double> lhs{phi1, phi2};
  const double mismatch = ordered_sum(lhs) - ordered_sum(alpha);
  if (std::abs(mismatch) > kGaussBonnetTolerance) {
    std::ostringstream msg;
    msg << "phi1 + phi2 - sum(alpha) = " << mismatch;
    throw Error(ErrorKind::GaussBonnetViolation, msg.str());
  }
  return AngleSignature(phi1, phi2, std::move(alpha));
}

double q_factor(double phi1, double phi2) {
  for (double phi : {phi1, phi2}) {
    const double turns = phi / kTwoPi;
    if (!(phi > 0.0 && phi < 2.0 * kTwoPi) ||
        std::abs(turns - std::round(turns)) < 1e-15) {
      throw Error(ErrorKind::PoleAtMultipleOf2Pi,
                  "q is undefined at multiples of 2pi or outside (0, 4pi)");
    }
  }
  const double c1 = cot_half(phi1);
  const double c2 = cot_half(phi2);
  const double sum = c1 + c2;
  // Rounding residue of cot(pi/2) and of exact cancellations is reported as zero.
  if (std::abs(sum) <= 8.0 * std::numeric_limits<double>::epsilon() * (std::abs(c1) + std::abs(c2) + 1.0)) {
    return 0.0;
  }
  return sum;
}

std::vector<Split> enumerate_splits(const AngleSignature& sig) {
  const int n = sig.arity();
  std::vector<Split> splits;
  if (n < 2) return splits;
  const unsigned full = (1u << n) - 1u;
  splits.reserve(full - 1u);
  for (unsigned mask = 1; mask < full; ++mask) {
    Split split;
    for (int i = 0; i < n; ++i) {
      (mask >> i & 1u ? split.hat_indices : split.tilde_indices).push_back(i);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

double partial_sum(const AngleSignature& sig, const std::vector<int>& indices) {
  double sum = 0.0;
  for (int i : indices) sum += sig.alpha()[static_cast<std::size_t>(i)];
  return sum;
}

OpenInterval beta_interval(const AngleSignature& sig, const Split& split) {
  const double hat_sum = partial_sum(sig, split.hat_indices);
  const double tilde_sum = partial_sum(sig, split.tilde_indices);
  return {std::max(0.0, sig.phi1() - tilde_sum), std::min(sig.phi1(), hat_sum)};
}

namespace {

std::vector<double> pick(const AngleSignature& sig,
                         const std::vector<int>& indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(sig.alpha()[static_cast<std::size_t>(i)]);
  return out;
}

void require_inside(const AngleSignature& sig, const Split& split,
                    double beta) {
  const OpenInterval range = beta_interval(sig, split);
  if (!range.contains(beta)) {
    std::ostringstream msg;
    msg << "beta " << beta << " outside (" << range.lo << ", " << range.hi
        << ")";
    throw Error(ErrorKind::BetaOutOfInterval, msg.str());
  }
}

}  // namespace

SubSignaturePair sub_signatures(const AngleSignature& sig, const Split& split,
                                double beta) {
  require_inside(sig, split, beta);
  std::vector<double> hat_alpha = pick(sig, split.hat_indices);
  std::vector<double> tilde_alpha = pick(sig, split.tilde_indices);
  const double hat_sum = partial_sum(sig, split.hat_indices);
  const double tilde_sum = partial_sum(sig, split.tilde_indices);
  const double hat_phi2 = hat_sum - beta;
  const double tilde_phi1 = sig.phi1() - beta;
  const double tilde_phi2 = tilde_sum - sig.phi1() + beta;
  return SubSignaturePair{
      validate_signature(beta, hat_phi2, std::move(hat_alpha)),
      validate_signature(tilde_phi1, tilde_phi2, std::move(tilde_alpha)), beta};
}

double kappa(const AngleSignature& sig, const Split& split, double beta) {
  require_inside(sig, split, beta);
  const double hat_sum = partial_sum(sig, split.hat_indices);
  const double tilde_sum = partial_sum(sig, split.tilde_indices);
  return q_factor(beta, hat_sum - beta) +
         q_factor(sig.phi1() - beta, tilde_sum - sig.phi1() + beta);
}

double parse_angle(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorKind::ParseError,
                 "cannot parse angle '" + std::string(text) + "'");
  };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw fail();

  const std::size_t pi_pos = text.find("pi");
  if (pi_pos == std::string_view::npos) {
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) throw fail();
    return value;
  }

  auto parse_int = [&](std::string_view digits) {
    long value = 0;
    const auto [end, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || end != digits.data() + digits.size()) throw fail();
    return value;
  };

  std::string_view numerator = text.substr(0, pi_pos);
  std::string_view rest = text.substr(pi_pos + 2);
  double factor = 1.0;
  if (numerator == "-") {
    factor = -1.0;
  } else if (!numerator.empty()) {
    factor = static_cast<double>(parse_int(numerator));
  }
  if (!rest.empty()) {
    if (rest.front() != '/') throw fail();
    const long denominator = parse_int(rest.substr(1));
    if (denominator == 0) throw fail();
    factor /= static_cast<double>(denominator);
  }
  return factor * kPi;
}

std::vector<double> parse_angle_list(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
    values.push_back(parse_angle(text.substr(start, stop - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

}  // namespace flatcone
