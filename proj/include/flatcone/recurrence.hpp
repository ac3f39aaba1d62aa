#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flatcone/measure.hpp"
#include "flatcone/signature.hpp"

namespace flatcone {

struct SolverConfig {
  int beta_nodes = 256;
  int grid_cells = 2048;
  double grading_ratio = 1.15;
  double calibration_constant = 0.25;
  double ode_tolerance = 1e-9;
  int max_arity = 4;
  int workers = 1;
  /// Top-level results are persisted here when set.
  std::optional<std::filesystem::path> cache_dir;

  /// Throws InvalidConfig when a setting is out of range.
  void validate() const;
};

struct SourceTerm {
  AngleSignature signature;
  Measure1D measure;
  std::vector<std::pair<Split, Measure1D>> per_split_breakdown;
  /// Source mass landing beyond the grid end (above 1/q when q > 0), dropped.
  double mass_beyond_grid = 0.0;
  /// Mass the same contributions would have without the cut.
  double mass_total = 0.0;
};

/// Supplies f for a sub-signature; a null result raises MissingChild.
using ChildLookup =
    std::function<std::shared_ptr<const Measure1D>(const AngleSignature&)>;

Measure1D base_density(const AngleSignature& sig);

/// +inf when phi1 + phi2 >= 2 pi, else 1 / q(phi).
double upper_support(double phi1, double phi2);

/// Right-hand side S of the recurrence as a measure in the area variable.
SourceTerm source_term(const AngleSignature& sig, const ChildLookup& children,
                       const SolverConfig& config, bool with_breakdown = false);

/// Solves (1 - q a) f' + (n/a - 2q) f = S with f = 0 below the source,
/// truncated at support_hint when it is finite.
Measure1D solve_ode(double q, int n, const Measure1D& source, double support_hint,
                    const SolverConfig& config);

struct Solution {
  Measure1D density;
  SourceTerm source;
};

/// Density together with the source it was solved from (n >= 2).
Solution solve(const AngleSignature& sig, const SolverConfig& config);

/// Memoized f(phi, alpha, .); uses the on-disk cache when configured.
std::shared_ptr<const Measure1D> density(const AngleSignature& sig, const SolverConfig& config);

void clear_density_memo();
std::size_t density_memo_size();

double volume(const AngleSignature& sig, const SolverConfig& config);

struct LengthStats {
  double mean;
  double median;
};

LengthStats length_stats(const Measure1D& f);
LengthStats length_stats(const AngleSignature& sig, const SolverConfig& config);

struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double lo;
  double hi;
};

/// Smooth bump exp(-1/(1-t^2)), t = (a - center)/half_width.
TestFunction bump(double center, double half_width);

/// |int ((n/a - q) g + (q a - 1) g') df - int g dS|.
double weak_form_residual(const AngleSignature& sig, const Measure1D& f, const Measure1D& source,
                          const TestFunction& g);

/// Largest weak_form_residual over five bumps centred at the 0.1, 0.3, 0.5,
/// 0.7 and 0.9 quantiles of f, kept inside the support.
double weak_form_battery(const AngleSignature& sig, const Measure1D& f, const Measure1D& source);

/// L1 mismatch of the operator (2q - n/a) f' + (1 - q a) f against S; NaN for n = 1.
double theorem1_residual(const AngleSignature& sig, const Measure1D& f, const Measure1D& source);

struct CalibrationResult {
  double c0;
  double relative_misfit;
  std::vector<std::string> warnings;
};

/// Least-squares fit of c0 from the uncalibrated anchor source against the
/// source reconstructed from the closed-form anchor density.
CalibrationResult calibrate(const SolverConfig& config);

/// The anchor f(a) = (1 - sqrt(1 - a^2))/a^2 on (0,1], 1/a^2 beyond.
double anchor_density(double a);
/// Its distribution function, total mass pi/2.
double anchor_cdf(double a);

}  // namespace flatcone
