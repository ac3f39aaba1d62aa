#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "flatcone/error.hpp"
#include "flatcone/quadrature.hpp"

namespace flatcone {

struct Atom {
  double position;
  double mass;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Density C (1 - q x)^k x^(-p) on (start, inf), attached beyond the last
/// breakpoint. q <= 0 so the factor stays positive.
struct PowerTail {
  double coefficient = 0.0;
  double q = 0.0;
  int factor_power = 0;
  double power = 2.0;

  double density(double x) const;
  /// Closed-form integral of x^e times the tail density over (x, inf).
  double moment_above(double x, double e) const;
  double mass_above(double x) const { return moment_above(x, 0.0); }
  friend bool operator==(const PowerTail&, const PowerTail&) = default;
};

/// Piecewise-linear density on a grid. Each cell stores its exact mass; the
/// density inside the cell is the linear interpolant of the breakpoint values
/// rescaled to that mass. The first (last) cell may carry a power factor
/// d^s in the distance d to the left (right) support end.
class PiecewiseDensity {
 public:
  PiecewiseDensity() = default;
  PiecewiseDensity(std::vector<double> breakpoints, std::vector<double> values,
                   std::vector<double> cell_masses,
                   std::optional<double> left_exponent = std::nullopt,
                   std::optional<double> right_exponent = std::nullopt,
                   std::optional<PowerTail> tail = std::nullopt);

  /// Cell masses taken from the shape itself.
  static PiecewiseDensity from_values(std::vector<double> breakpoints,
                                      std::vector<double> values,
                                      std::optional<double> left_exponent = std::nullopt,
                                      std::optional<double> right_exponent = std::nullopt,
                                      std::optional<PowerTail> tail = std::nullopt);

  /// Breakpoint values derived from neighbouring cell averages.
  static PiecewiseDensity from_cell_masses(std::vector<double> breakpoints,
                                           std::vector<double> cell_masses);

  bool empty() const noexcept { return breakpoints_.size() < 2 && !tail_; }
  std::size_t cell_count() const noexcept {
    return breakpoints_.size() < 2 ? 0 : breakpoints_.size() - 1;
  }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& cell_masses() const noexcept { return cell_masses_; }
  const std::optional<double>& left_exponent() const noexcept { return left_exponent_; }
  const std::optional<double>& right_exponent() const noexcept { return right_exponent_; }
  const std::optional<PowerTail>& tail() const noexcept { return tail_; }

  double support_begin() const noexcept { return breakpoints_.empty() ? 0.0 : breakpoints_.front(); }
  double support_end() const noexcept;
  double grid_end() const noexcept { return breakpoints_.empty() ? 0.0 : breakpoints_.back(); }

  double mass() const noexcept { return total_; }
  double tail_mass() const noexcept { return tail_mass_; }
  double density_at(double x) const;
  /// Mass of [support_begin, x].
  double cumulative(double x) const;
  /// Index of the cell containing x (x inside the grid).
  std::size_t locate(double x) const;

  /// Integral of fn against the density over [lo, hi] within cell k.
  template <typename F>
  double integrate_cell(std::size_t k, F&& fn, double lo, double hi, int order = 8) const;

  /// Integral of fn against the tail density over [lo, hi], both beyond grid_end.
  template <typename F>
  double integrate_tail(F&& fn, double lo, double hi) const;

  /// Integral of fn against the whole density.
  template <typename F>
  double integrate(F&& fn, int order = 8) const;

  /// Running integrals of fn against the density from support_begin up to each
  /// of the sorted points.
  template <typename F>
  std::vector<double> cumulative_weighted(F&& fn, const std::vector<double>& points,
                                          int order = 4) const;

  /// Integral of x^e against the density; DivergentMoment when infinite.
  double moment(double e) const;

 private:
  enum class CellKind { Plain, LeftPower, RightPower };

  CellKind kind(std::size_t k) const noexcept;
  double exponent(std::size_t k) const noexcept;
  /// Unnormalized shape value and primitive inside cell k.
  double shape(std::size_t k, double x) const;
  double primitive(std::size_t k, double x) const;
  double shape_integral(std::size_t k) const { return primitive(k, breakpoints_[k + 1]); }
  void finalize();

  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::vector<double> cell_masses_;
  std::optional<double> left_exponent_;
  std::optional<double> right_exponent_;
  std::optional<PowerTail> tail_;

  std::vector<double> scale_;    // cell mass / shape integral
  std::vector<bool> uniform_;    // zero shape integral with positive mass
  std::vector<double> prefix_;   // mass up to each breakpoint
  double tail_mass_ = 0.0;
  double total_ = 0.0;
};

/// Finite nonnegative measure on the positive half-line.
class Measure1D {
 public:
  Measure1D() = default;
  Measure1D(std::vector<Atom> atoms, PiecewiseDensity density = {});

  static Measure1D single_atom(double position, double mass);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const PiecewiseDensity& density() const noexcept { return density_; }

  double atom_mass() const noexcept { return atom_mass_; }
  double total_mass() const noexcept { return atom_mass_ + density_.mass(); }
  bool is_zero() const noexcept { return total_mass() < 1e-15; }

  /// Mass of (0, x].
  double cdf(double x) const;
  /// Mass of (0, x).
  double cdf_left(double x) const;

  template <typename F>
  double integrate(F&& fn) const {
    double sum = density_.integrate(fn);
    for (const Atom& atom : atoms_) sum += atom.mass * fn(atom.position);
    return sum;
  }

  /// Multiplies every mass by c >= 0.
  Measure1D scaled(double c) const;

 private:
  std::vector<Atom> atoms_;
  PiecewiseDensity density_;
  std::vector<double> atom_prefix_;
  double atom_mass_ = 0.0;
};

double total_mass(const Measure1D& mu);
double moment(const Measure1D& mu, double exponent);
/// Smallest a with mu((0, a]) >= p * total mass.
double quantile(const Measure1D& mu, double p);

/// Monotone branch of a piecewise-monotone map on [lo, hi].
struct MonotoneBranch {
  double lo;
  double hi;
  std::function<double(double)> map;
  std::function<double(double)> inverse;
  std::function<double(double)> derivative;
};

/// Image measure; `refine` subdivides each source cell before mapping.
Measure1D pushforward(const Measure1D& mu, const std::vector<MonotoneBranch>& branches,
                      int refine = 1);

/// Change of variables l = a^(-1/2): rho(l) = 2 l^-3 f(l^-2).
Measure1D to_length_density(const Measure1D& mu_area);
/// Inverse of to_length_density for measures without tails.
Measure1D from_length_density(const Measure1D& mu_length);

/// sup |CDF_mu - CDF_nu| over merged breakpoints and atoms.
double ks_distance(const Measure1D& mu, const Measure1D& nu);

/// Equal-mass atoms at the samples, total mass 1.
Measure1D empirical_measure(std::vector<double> samples);

/// c1 mu + c2 nu on the merged grid.
Measure1D combine(double c1, const Measure1D& mu, double c2, const Measure1D& nu);

Measure1D normalized(const Measure1D& mu);

// ---------------------------------------------------------------------------

template <typename F>
double PiecewiseDensity::integrate_cell(std::size_t k, F&& fn, double lo, double hi,
                                        int order) const {
  if (!(hi > lo) || cell_masses_[k] == 0.0) return 0.0;
  const QuadratureRule& rule = gauss_legendre(order);
  const double x0 = breakpoints_[k];
  const double x1 = breakpoints_[k + 1];
  if (uniform_[k]) {
    const double c = cell_masses_[k] / (x1 - x0);
    return c * integrate_gl([&](double t) { return fn(t); }, lo, hi, order);
  }
  const double c = scale_[k];
  const double v0 = values_[k];
  const double v1 = values_[k + 1];
  const double h = x1 - x0;
  const auto linear = [&](double t) { return v0 + (v1 - v0) * (t - x0) / h; };
  switch (kind(k)) {
    case CellKind::Plain: {
      double sum = 0.0;
      const double half = 0.5 * (hi - lo);
      const double mid = 0.5 * (hi + lo);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = mid + half * rule.nodes[i];
        sum += rule.weights[i] * fn(t) * linear(t);
      }
      return c * sum * half;
    }
    case CellKind::LeftPower:
    case CellKind::RightPower: {
      // w = d^(s+1) with d the distance to the singular end absorbs d^s.
      const double s = exponent(k);
      const bool left = kind(k) == CellKind::LeftPower;
      const double d_lo = left ? lo - x0 : x1 - hi;
      const double d_hi = left ? hi - x0 : x1 - lo;
      const double w_lo = std::pow(std::max(d_lo, 0.0), s + 1.0);
      const double w_hi = std::pow(d_hi, s + 1.0);
      double sum = 0.0;
      const double half = 0.5 * (w_hi - w_lo);
      const double mid = 0.5 * (w_hi + w_lo);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double w = mid + half * rule.nodes[i];
        const double d = std::pow(w, 1.0 / (s + 1.0));
        const double t = left ? x0 + d : x1 - d;
        sum += rule.weights[i] * fn(t) * linear(t);
      }
      return c * sum * half / (s + 1.0);
    }
  }
  return 0.0;
}

template <typename F>
double PiecewiseDensity::integrate_tail(F&& fn, double lo, double hi) const {
  if (!tail_ || !(hi > lo)) return 0.0;
  // Gauss-Legendre panels in log x, at most a factor 2 wide.
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  const int panels = std::max(1, static_cast<int>(std::ceil((log_hi - log_lo) / std::log(2.0))));
  const double width = (log_hi - log_lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    sum += integrate_gl(
        [&](double u) {
          const double x = std::exp(u);
          return fn(x) * tail_->density(x) * x;
        },
        log_lo + p * width, log_lo + (p + 1) * width, 8);
  }
  return sum;
}

template <typename F>
double PiecewiseDensity::integrate(F&& fn, int order) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < cell_count(); ++k) {
    sum += integrate_cell(k, fn, breakpoints_[k], breakpoints_[k + 1], order);
  }
  if (tail_ && tail_mass_ > 0.0) {
    double lo = grid_end();
    for (int panel = 0; panel < 400; ++panel) {
      const double piece = integrate_tail(fn, lo, 2.0 * lo);
      sum += piece;
      lo *= 2.0;
      if (tail_->mass_above(lo) < 1e-17 * std::max(total_, 1e-300)) break;
    }
  }
  return sum;
}

template <typename F>
std::vector<double> PiecewiseDensity::cumulative_weighted(F&& fn,
                                                          const std::vector<double>& points,
                                                          int order) const {
  std::vector<double> out(points.size(), 0.0);
  if (breakpoints_.empty()) return out;
  const std::size_t cells = cell_count();
  double running = 0.0;  // integral up to breakpoint k (or up to `cursor`)
  std::size_t k = 0;
  double cursor = breakpoints_.front();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double y = points[i];
    if (y <= cursor) {
      out[i] = running;
      continue;
    }
    while (k < cells && breakpoints_[k + 1] <= y) {
      running += integrate_cell(k, fn, cursor, breakpoints_[k + 1], order);
      cursor = breakpoints_[k + 1];
      ++k;
    }
    if (k < cells) {
      running += integrate_cell(k, fn, cursor, y, order);
      cursor = y;
    } else if (tail_) {
      running += integrate_tail(fn, cursor, y);
      cursor = y;
    }
    out[i] = running;
  }
  return out;
}

}  // namespace flatcone
