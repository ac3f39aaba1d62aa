#include "flatcone/recurrence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "flatcone/cache.hpp"
#include "flatcone/parallel.hpp"
#include "flatcone/quadrature.hpp"

namespace flatcone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double x, int k) {
  if (k < 0) return 1.0 / ipow(x, -k);
  double result = 1.0;
  while (k) {
    if (k & 1) result *= x;
    x *= x;
    k >>= 1;
  }
  return result;
}

/// Geometric clusters around features on top of a log-uniform base grid.
std::vector<double> build_grid(double x0, double x_end, std::vector<double> features, int cells,
                               double ratio) {
  features.erase(std::remove_if(features.begin(), features.end(),
                                [&](double c) { return !(c > x0 && c <= x_end); }),
                 features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end(),
                             [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
                 features.end());
  const int base = features.empty() ? cells : std::max(8, cells / 2);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(cells) + 8);
  const double log_ratio = std::log(x_end / x0);
  for (int i = 0; i <= base; ++i) grid.push_back(x0 * std::exp(log_ratio * i / base));
  if (!features.empty()) {
    const int per_side =
        std::max(4, (cells - base) / static_cast<int>(2 * features.size()));
    for (double c : features) {
      grid.push_back(c);
      double d = 0.1;
      for (int k = 0; k < per_side && d > 1e-12; ++k, d /= ratio) {
        grid.push_back(c * (1.0 - d));
        grid.push_back(c * (1.0 + d));
      }
    }
  }
  std::vector<double> clean;
  std::sort(grid.begin(), grid.end());
  for (double x : grid) {
    if (x < x0 || x >= x_end * (1.0 - 1e-13)) continue;
    if (!clean.empty() && x <= clean.back() * (1.0 + 1e-13)) continue;
    clean.push_back(x);
  }
  clean.push_back(x_end);
  return clean;
}

// ------------------------------------------------------------ two cones

/// Total area a(beta) = 1/q(hat) + 1/q(tilde) of an atom pair, which is a
/// sinusoid R cos(beta - theta) + D in beta.
struct AreaCurve {
  double alpha_hat;
  double alpha_tilde;
  double phi1;
  double lo;
  double hi;
  double R;
  double theta;
  double D;

  AreaCurve(double alpha_hat_, double alpha_tilde_, double phi1_, OpenInterval interval)
      : alpha_hat(alpha_hat_), alpha_tilde(alpha_tilde_), phi1(phi1_), lo(interval.lo),
        hi(interval.hi) {
    const double A = 0.5 / std::sin(0.5 * alpha_hat);
    const double B = 0.5 / std::sin(0.5 * alpha_tilde);
    const double c1 = 0.5 * alpha_hat;
    const double c2 = phi1 - 0.5 * alpha_tilde;
    const double x = A * std::cos(c1) + B * std::cos(c2);
    const double y = A * std::sin(c1) + B * std::sin(c2);
    R = std::hypot(x, y);
    theta = std::atan2(y, x);
    D = -(A * std::cos(0.5 * alpha_hat) + B * std::cos(0.5 * alpha_tilde));
  }

  double operator()(double beta) const {
    const double a1 =
        std::sin(0.5 * beta) * std::sin(0.5 * (alpha_hat - beta)) / std::sin(0.5 * alpha_hat);
    const double a2 = std::sin(0.5 * (phi1 - beta)) *
                      std::sin(0.5 * (alpha_tilde - phi1 + beta)) / std::sin(0.5 * alpha_tilde);
    return a1 + a2;
  }

  double slope(double beta) const { return -R * std::sin(beta - theta); }

  bool constant() const { return R <= 1e-14 * std::abs(D); }

  /// Monotone pieces split at the critical points theta + k pi.
  std::vector<std::pair<double, double>> branches() const {
    std::vector<double> cuts{lo};
    const double k0 = std::ceil((lo - theta) / kPi);
    for (double k = k0; theta + k * kPi < hi; k += 1.0) {
      const double c = theta + k * kPi;
      if (c > lo) cuts.push_back(c);
    }
    cuts.push_back(hi);
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) out.emplace_back(cuts[i], cuts[i + 1]);
    }
    return out;
  }

  /// beta in [b0, b1] with a(beta) = x on a monotone branch.
  double invert(double b0, double b1, double x) const {
    const double k = std::floor((0.5 * (b0 + b1) - theta) / kPi);
    const double sign = std::fmod(std::abs(k), 2.0) == 0.0 ? 1.0 : -1.0;
    const double t = std::acos(std::clamp(sign * (x - D) / R, -1.0, 1.0));
    double beta = std::clamp(theta + k * kPi + t, b0, b1);
    // Newton polish, kept only while it reduces the residual: near a critical
    // value the slope vanishes and a raw step would be thrown far off.
    double residual = std::abs((*this)(beta) - x);
    for (int iter = 0; iter < 3; ++iter) {
      const double s = slope(beta);
      if (std::abs(s) < 1e-300) break;
      const double next = std::clamp(beta - ((*this)(beta) - x) / s, b0, b1);
      const double next_residual = std::abs((*this)(next) - x);
      if (!(next_residual < residual)) break;
      beta = next;
      residual = next_residual;
    }
    return beta;
  }
};

struct PairSource {
  std::vector<double> masses;
  std::vector<Atom> atoms;
  double beyond = 0.0;
  double total = 0.0;
};

/// Exact source of a two-cone signature: for each split the atoms of the
/// children travel along a(beta) with weight kappa * w = 1/a.
PairSource two_cone_source(const AreaCurve& curve, const std::vector<double>& grid, double c0) {
  PairSource out;
  out.masses.assign(grid.size() - 1, 0.0);
  const double x0 = grid.front();
  const double x_end = grid.back();
  const auto weight = [&](double beta) { return 1.0 / curve(beta); };
  const auto integral = [&](double b0, double b1) {
    if (b1 < b0) std::swap(b0, b1);
    if (!(b1 > b0)) return 0.0;
    return c0 * integrate_gl(weight, b0, b1, 10);
  };
  if (curve.constant()) {
    const double a = curve(0.5 * (curve.lo + curve.hi));
    const double mass = c0 * (curve.hi - curve.lo) / a;
    out.total = mass;
    if (a > x_end) {
      out.beyond = mass;
    } else if (a >= x0) {
      out.atoms.push_back({a, mass});
    }
    return out;
  }
  for (auto [b0, b1] : curve.branches()) {
    const double y0 = curve(b0);
    const double y1 = curve(b1);
    const double y_lo = std::min(y0, y1);
    const double y_hi = std::max(y0, y1);
    const auto at = [&](double x) { return curve.invert(b0, b1, x); };
    // Portion above the grid end.
    if (y_hi > x_end) {
      const double piece = integral(at(std::max(x_end, y_lo)), y1 > y0 ? b1 : b0);
      out.beyond += piece;
      out.total += piece;
    }
    const double lo = std::max(y_lo, x0);
    const double hi = std::min(y_hi, x_end);
    if (!(hi > lo)) continue;
    auto first = std::upper_bound(grid.begin(), grid.end(), lo);
    std::size_t k = static_cast<std::size_t>(first - grid.begin());
    k = k == 0 ? 0 : k - 1;
    double x_prev = lo;
    double beta_prev = at(lo);
    for (; k + 1 < grid.size() && grid[k] < hi; ++k) {
      const double x_next = std::min(grid[k + 1], hi);
      if (!(x_next > x_prev)) continue;
      const double beta_next = at(x_next);
      const double piece = integral(beta_prev, beta_next);
      out.masses[k] += piece;
      out.total += piece;
      x_prev = x_next;
      beta_prev = beta_next;
    }
  }
  return out;
}

/// Features of the two-cone source: branch ends and critical values.
void two_cone_features(const AreaCurve& curve, std::vector<double>& features, double& top) {
  if (curve.constant()) {
    const double a = curve(0.5 * (curve.lo + curve.hi));
    features.push_back(a);
    top = std::max(top, a);
    return;
  }
  for (auto [b0, b1] : curve.branches()) {
    for (double b : {b0, b1}) {
      const double a = curve(b);
      if (a > 0.0) features.push_back(a);
      top = std::max(top, a);
    }
  }
}

// ------------------------------------------------------------ general pairs

struct PointMass {
  double position;
  double mass;
};

/// Atoms plus Gauss-Legendre pseudo-atoms of the density part.
std::vector<PointMass> discretize(const Measure1D& mu) {
  std::vector<PointMass> points;
  for (const Atom& atom : mu.atoms()) points.push_back({atom.position, atom.mass});
  const PiecewiseDensity& d = mu.density();
  const QuadratureRule& rule = gauss_legendre(3);
  const auto& xs = d.breakpoints();
  for (std::size_t k = 0; k < d.cell_count(); ++k) {
    const double m = d.cell_masses()[k];
    if (m == 0.0) continue;
    const double half = 0.5 * (xs[k + 1] - xs[k]);
    const double mid = 0.5 * (xs[k + 1] + xs[k]);
    double norm = 0.0;
    std::array<double, 3> w{};
    for (std::size_t i = 0; i < 3; ++i) {
      w[i] = rule.weights[i] * d.density_at(mid + half * rule.nodes[i]);
      norm += w[i];
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const double share = norm > 0.0 ? w[i] / norm : 1.0 / 3.0;
      points.push_back({mid + half * rule.nodes[i], m * share});
    }
  }
  if (d.tail() && d.tail_mass() > 0.0) {
    double lo = d.grid_end();
    double remaining = d.tail_mass();
    for (int panel = 0; panel < 200 && remaining > 1e-16 * d.mass(); ++panel) {
      const double hi = 2.0 * lo;
      const double m = d.tail()->mass_above(lo) - d.tail()->mass_above(hi);
      points.push_back({std::sqrt(lo * hi), m});
      remaining -= m;
      lo = hi;
    }
  }
  return points;
}

/// Cell masses on `grid` of the pairing of point masses with a measure under
/// the weight p^np y^nd / (p + y)^n.
void pair_with_points(const std::vector<PointMass>& points, int np, const Measure1D& other,
                      int nd, int n, const std::vector<double>& grid, PairSource& out) {
  std::vector<double> shifted(grid.size());
  for (const PointMass& pm : points) {
    const double p = pm.position;
    const auto weight = [&](double y) { return ipow(p, np) * ipow(y, nd) / ipow(p + y, n); };
    for (std::size_t i = 0; i < grid.size(); ++i) shifted[i] = std::max(grid[i] - p, 0.0);
    std::vector<double> running = other.density().cumulative_weighted(weight, shifted);
    for (const Atom& atom : other.atoms()) {
      const double w = weight(atom.position) * atom.mass;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (shifted[i] >= atom.position) running[i] += w;
      }
    }
    const double full = other.integrate(weight);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      out.masses[k] += pm.mass * std::max(running[k + 1] - running[k], 0.0);
    }
    const double above = pm.mass * std::max(full - running.back(), 0.0);
    out.beyond += above;
    out.total += pm.mass * std::max(full - running.front(), 0.0);
  }
}

// ------------------------------------------------------------ memo

std::string memo_key(const AngleSignature& sig, const SolverConfig& config) {
  std::ostringstream key;
  const auto rounded = [](double x) { return std::llround(x * 1e10); };
  key << rounded(sig.phi1()) << ',' << rounded(sig.phi2()) << '|';
  for (double a : sig.alpha()) key << rounded(a) << ',';
  key << '|' << config.beta_nodes << ',' << config.grid_cells << ','
      << std::llround(config.grading_ratio * 1e12) << ','
      << std::llround(config.calibration_constant * 1e15) << ','
      << std::llround(std::log10(config.ode_tolerance) * 1e6);
  return key.str();
}

struct Memo {
  std::mutex mutex;
  std::map<std::string, std::shared_future<std::shared_ptr<const Measure1D>>> table;
};

Memo& memo() {
  static Memo instance;
  return instance;
}

Measure1D compute_density(const AngleSignature& sig, const SolverConfig& config);

std::shared_ptr<const Measure1D> memo_density(const AngleSignature& sig,
                                              const SolverConfig& config) {
  if (sig.arity() == 1) return std::make_shared<const Measure1D>(base_density(sig));
  const std::string key = memo_key(sig, config);
  std::promise<std::shared_ptr<const Measure1D>> promise;
  std::shared_future<std::shared_ptr<const Measure1D>> future;
  bool owner = false;
  {
    std::lock_guard lock(memo().mutex);
    auto [it, inserted] = memo().table.try_emplace(key);
    if (inserted) {
      it->second = promise.get_future().share();
      owner = true;
    }
    future = it->second;
  }
  if (owner) {
    try {
      promise.set_value(std::make_shared<const Measure1D>(compute_density(sig, config)));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(memo().mutex);
      memo().table.erase(key);
    }
  }
  return future.get();
}

ChildLookup memo_lookup(const SolverConfig& config) {
  return [config](const AngleSignature& child) { return memo_density(child, config); };
}

Measure1D compute_density(const AngleSignature& sig, const SolverConfig& config) {
  if (sig.arity() == 1) return base_density(sig);
  if (sig.arity() > config.max_arity) {
    throw Error(ErrorKind::ArityLimitExceeded,
                "arity " + std::to_string(sig.arity()) + " exceeds the configured maximum " +
                    std::to_string(config.max_arity));
  }
  const SourceTerm source = source_term(sig, memo_lookup(config), config);
  return solve_ode(q_factor(sig.phi1(), sig.phi2()), sig.arity(), source.measure,
                   upper_support(sig.phi1(), sig.phi2()), config);
}

}  // namespace

// ------------------------------------------------------------ public API

void SolverConfig::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (beta_nodes < 8) fail("beta_nodes must be at least 8");
  if (grid_cells < 8) fail("grid_cells must be at least 8");
  if (!(grading_ratio > 1.0)) fail("grading_ratio must exceed 1");
  if (!(calibration_constant > 0.0)) fail("calibration constant must be positive");
  if (!(ode_tolerance > 0.0 && ode_tolerance < 1e-3)) fail("ode_tolerance must lie in (0, 1e-3)");
  if (max_arity < 1) fail("max_arity must be positive");
  if (workers < 1) fail("workers must be positive");
}

Measure1D base_density(const AngleSignature& sig) {
  if (sig.arity() != 1) {
    throw Error(ErrorKind::WrongArity, "base density needs exactly one defect");
  }
  return Measure1D::single_atom(1.0 / q_factor(sig.phi1(), sig.phi2()), 1.0);
}

double upper_support(double phi1, double phi2) {
  if (phi1 + phi2 >= kTwoPi) return kInf;
  return 1.0 / q_factor(phi1, phi2);
}

SourceTerm source_term(const AngleSignature& sig, const ChildLookup& children,
                       const SolverConfig& config, bool with_breakdown) {
  config.validate();
  const int n = sig.arity();
  const double c0 = config.calibration_constant;
  const std::vector<Split> splits = enumerate_splits(sig);
  SourceTerm result{sig, Measure1D{}, {}, 0.0, 0.0};
  if (splits.empty()) return result;

  const double q = q_factor(sig.phi1(), sig.phi2());
  const double support = upper_support(sig.phi1(), sig.phi2());
  if (q > 0.0 && !std::isfinite(support)) {
    throw Error(ErrorKind::SingularityUnresolved,
                "q > 0 with phi1 + phi2 >= 2 pi puts 1/q inside the support");
  }

  std::vector<double> grid;
  std::vector<PairSource> parts;

  if (n == 2) {
    std::vector<AreaCurve> curves;
    std::vector<double> features;
    double top = 0.0;
    for (const Split& split : splits) {
      curves.emplace_back(sig.alpha()[split.hat_indices[0]], sig.alpha()[split.tilde_indices[0]],
                          sig.phi1(), beta_interval(sig, split));
      two_cone_features(curves.back(), features, top);
    }
    double x_end = top;
    if (q > 0.0) {
      x_end = 1.0 / q;
      features.push_back(x_end);
    }
    grid = build_grid(1e-8 * x_end, x_end, features, config.grid_cells, config.grading_ratio);
    for (const AreaCurve& curve : curves) parts.push_back(two_cone_source(curve, grid, c0));
  } else {
    std::vector<double> features;
    double x0 = 1e-8;
    double x_end = 1e6;
    if (q > 0.0) {
      x_end = 1.0 / q;
      x0 = 1e-8 * x_end;
      features.push_back(x_end);
    }
    grid = build_grid(x0, x_end, features, config.grid_cells, config.grading_ratio);

    struct Task {
      std::size_t split;
      double beta;
      double weight;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < splits.size(); ++s) {
      const OpenInterval interval = beta_interval(sig, splits[s]);
      const QuadratureRule rule = tanh_gauss_legendre(config.beta_nodes, interval.lo, interval.hi);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        tasks.push_back({s, rule.nodes[i], rule.weights[i]});
      }
    }
    std::vector<PairSource> contributions(tasks.size());
    parallel_for(tasks.size(), config.workers, [&](std::size_t t) {
      const Task& task = tasks[t];
      const Split& split = splits[task.split];
      const SubSignaturePair pair = sub_signatures(sig, split, task.beta);
      const auto hat = children(pair.hat);
      const auto tilde = children(pair.tilde);
      if (!hat || !tilde) throw Error(ErrorKind::MissingChild, "child density not supplied");
      const int n1 = pair.hat.arity();
      const int n2 = pair.tilde.arity();
      PairSource part;
      part.masses.assign(grid.size() - 1, 0.0);
      // Discretize the purely atomic side when there is one, else the hat side.
      const bool tilde_points = hat->density().cell_count() > 0 && tilde->density().cell_count() == 0;
      if (tilde_points) {
        pair_with_points(discretize(*tilde), n2, *hat, n1, n, grid, part);
      } else {
        pair_with_points(discretize(*hat), n1, *tilde, n2, n, grid, part);
      }
      const double scale = c0 * task.weight * kappa(sig, split, task.beta);
      for (double& m : part.masses) m *= scale;
      part.beyond *= scale;
      part.total *= scale;
      contributions[t] = std::move(part);
    });
    // Sum per split in task order so the result does not depend on scheduling.
    parts.assign(splits.size(), PairSource{});
    for (auto& p : parts) p.masses.assign(grid.size() - 1, 0.0);
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      PairSource& target = parts[tasks[t].split];
      for (std::size_t k = 0; k < target.masses.size(); ++k) {
        target.masses[k] += contributions[t].masses[k];
      }
      target.beyond += contributions[t].beyond;
      target.total += contributions[t].total;
    }
  }

  std::vector<double> masses(grid.size() - 1, 0.0);
  std::vector<Atom> atoms;
  for (std::size_t s = 0; s < parts.size(); ++s) {
    for (std::size_t k = 0; k < masses.size(); ++k) masses[k] += parts[s].masses[k];
    atoms.insert(atoms.end(), parts[s].atoms.begin(), parts[s].atoms.end());
    result.mass_beyond_grid += parts[s].beyond;
    result.mass_total += parts[s].total;
    if (with_breakdown) {
      result.per_split_breakdown.emplace_back(
          splits[s], Measure1D(parts[s].atoms,
                               PiecewiseDensity::from_cell_masses(grid, parts[s].masses)));
    }
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  std::vector<Atom> merged;
  for (const Atom& atom : atoms) {
    if (!merged.empty() && merged.back().position == atom.position) {
      merged.back().mass += atom.mass;
    } else {
      merged.push_back(atom);
    }
  }
  result.measure = Measure1D(std::move(merged),
                             PiecewiseDensity::from_cell_masses(std::move(grid), std::move(masses)));
  return result;
}

Measure1D solve_ode(double q, int n, const Measure1D& source, double support_hint,
                    const SolverConfig& config) {
  config.validate();
  const PiecewiseDensity& s = source.density();
  std::vector<double> grid = s.breakpoints();
  for (const Atom& atom : source.atoms()) grid.push_back(atom.position);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) return Measure1D{};
  if (grid.size() < 2) grid.insert(grid.begin(), 0.5 * grid.front());

  const bool finite_support = std::isfinite(support_hint);
  if (finite_support) {
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [&](double x) { return x > support_hint * (1.0 + 1e-13); }),
               grid.end());
    if (grid.empty()) return Measure1D{};
    if (grid.back() < support_hint * (1.0 - 1e-13)) {
      // Homogeneous stretch up to the support bound, refined towards it.
      const double gap = support_hint - grid.back();
      const double last = grid.back();
      for (int k = 1; k <= 48; ++k) {
        const double x = support_hint - gap * std::pow(config.grading_ratio, -2.0 * k);
        if (x > last * (1.0 + 1e-13) && x < support_hint * (1.0 - 1e-13)) grid.push_back(x);
      }
      grid.push_back(support_hint);
    } else {
      grid.back() = support_hint;
    }
  }

  const auto M = [&](double t) { return ipow(t, n) * ipow(1.0 - q * t, 1 - n); };
  const auto inv_mu = [&](double t) {
    const double gap = 1.0 - q * t;
    if (gap <= 0.0) return n == 2 ? 1.0 / (t * t) : 0.0;
    return ipow(gap, n - 2) / ipow(t, n);
  };
  const double tol = config.ode_tolerance;

  // Adaptive cell integral of M against the source density.
  std::function<double(std::size_t, double, double, int)> cell_integral =
      [&](std::size_t k, double lo, double hi, int depth) -> double {
    const double coarse = s.integrate_cell(k, M, lo, hi, 8);
    const double fine = s.integrate_cell(k, M, lo, hi, 16);
    if (!std::isfinite(fine)) {
      throw Error(ErrorKind::SingularityUnresolved, "integrating factor diverges inside a cell");
    }
    if (std::abs(fine - coarse) <= tol * std::abs(fine) + 1e-300) return fine;
    if (depth >= 40) {
      throw Error(ErrorKind::SingularityUnresolved,
                  "integrating-factor quadrature did not converge near " + std::to_string(lo));
    }
    const double mid = 0.5 * (lo + hi);
    return cell_integral(k, lo, mid, depth + 1) + cell_integral(k, mid, hi, depth + 1);
  };
  const auto density_piece = [&](double lo, double hi) {
    if (!(hi > lo) || s.cell_count() == 0) return 0.0;
    const double mid = 0.5 * (lo + hi);
    if (mid < s.support_begin()) return 0.0;
    if (mid > s.grid_end()) {
      return s.tail() ? s.integrate_tail(M, lo, hi) : 0.0;
    }
    return cell_integral(s.locate(mid), lo, hi, 0);
  };

  // Cumulative F at the grid, right-continuous at atoms.
  const auto& atoms = source.atoms();
  std::size_t next_atom = 0;
  std::vector<double> F(grid.size(), 0.0);
  double running = 0.0;
  const auto absorb_atoms = [&](double x) {
    while (next_atom < atoms.size() && atoms[next_atom].position <= x) {
      const double p = atoms[next_atom].position;
      if (!finite_support || p < support_hint) running += M(p) * atoms[next_atom].mass;
      ++next_atom;
    }
  };
  absorb_atoms(grid.front());
  F[0] = running;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    running += density_piece(grid[i], grid[i + 1]);
    absorb_atoms(grid[i + 1]);
    F[i + 1] = running;
  }
  const double scale = std::max(std::abs(running), 1e-300);
  for (double& value : F) {
    if (value < -1e-9 * scale) {
      throw Error(ErrorKind::NegativeDensity, "negative cumulative source");
    }
    value = std::max(value, 0.0);
  }

  // f = F / mu at breakpoints; cell masses by Gauss-Legendre on F / mu.
  std::vector<double> xs;
  std::vector<double> values;
  std::vector<double> masses;
  const bool pad_origin = grid.front() > 0.0;
  if (pad_origin) {
    const double f0 = F[0] * inv_mu(grid.front());
    xs.push_back(0.0);
    values.push_back(f0);
    masses.push_back(f0 * grid.front());
  }
  const QuadratureRule& rule = gauss_legendre(8);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    xs.push_back(grid[i]);
    values.push_back(F[i] * inv_mu(grid[i]));
    if (i + 1 == grid.size()) break;
    const double lo = grid[i];
    const double hi = grid[i + 1];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    const std::size_t cell = s.cell_count() > 0 ? s.locate(mid) : 0;
    const bool inside = s.cell_count() > 0 && mid > s.support_begin() && mid < s.grid_end();
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double t = mid + half * rule.nodes[j];
      double Ft = F[i];
      if (inside) Ft += s.integrate_cell(cell, M, lo, t, 8);
      sum += rule.weights[j] * std::max(Ft, 0.0) * inv_mu(t);
    }
    masses.push_back(sum * half);
  }
  if (!pad_origin) values.front() = values.size() > 1 ? values[1] : 0.0;

  std::optional<PowerTail> tail;
  if (!finite_support && F.back() > 0.0) {
    if (q > 0.0) {
      throw Error(ErrorKind::SingularityUnresolved, "unbounded support with q > 0");
    }
    tail = PowerTail{F.back(), q, n - 2, static_cast<double>(n)};
  }
  return Measure1D({}, PiecewiseDensity(std::move(xs), std::move(values), std::move(masses),
                                        std::nullopt, std::nullopt, tail));
}

Solution solve(const AngleSignature& sig, const SolverConfig& config) {
  config.validate();
  if (sig.arity() == 1) {
    return {base_density(sig), SourceTerm{sig, Measure1D{}, {}, 0.0, 0.0}};
  }
  if (sig.arity() > config.max_arity) {
    throw Error(ErrorKind::ArityLimitExceeded,
                "arity " + std::to_string(sig.arity()) + " exceeds the configured maximum");
  }
  SourceTerm source = source_term(sig, memo_lookup(config), config, true);
  Measure1D f = solve_ode(q_factor(sig.phi1(), sig.phi2()), sig.arity(), source.measure,
                          upper_support(sig.phi1(), sig.phi2()), config);
  return {std::move(f), std::move(source)};
}

std::shared_ptr<const Measure1D> density(const AngleSignature& sig, const SolverConfig& config) {
  config.validate();
  if (sig.arity() > config.max_arity) {
    throw Error(ErrorKind::ArityLimitExceeded,
                "arity " + std::to_string(sig.arity()) + " exceeds the configured maximum");
  }
  if (config.cache_dir && sig.arity() >= 2) {
    const auto descriptor = cache_descriptor(sig, config);
    if (auto cached = cache_load(*config.cache_dir, descriptor)) {
      return std::make_shared<const Measure1D>(std::move(*cached));
    }
    auto f = memo_density(sig, config);
    cache_store(*config.cache_dir, descriptor, *f);
    return f;
  }
  return memo_density(sig, config);
}

void clear_density_memo() {
  std::lock_guard lock(memo().mutex);
  memo().table.clear();
}

std::size_t density_memo_size() {
  std::lock_guard lock(memo().mutex);
  return memo().table.size();
}

double volume(const AngleSignature& sig, const SolverConfig& config) {
  return density(sig, config)->total_mass();
}

LengthStats length_stats(const Measure1D& f) {
  const double vol = f.total_mass();
  if (!(vol > 1e-15)) throw Error(ErrorKind::InvalidMeasure, "zero density has no statistics");
  return {moment(f, -0.5) / vol, quantile(to_length_density(f), 0.5)};
}

LengthStats length_stats(const AngleSignature& sig, const SolverConfig& config) {
  return length_stats(*density(sig, config));
}

TestFunction bump(double center, double half_width) {
  const auto value = [=](double a) {
    const double t = (a - center) / half_width;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
  };
  const auto derivative = [=](double a) {
    const double t = (a - center) / half_width;
    if (std::abs(t) >= 1.0) return 0.0;
    const double u = 1.0 - t * t;
    return std::exp(-1.0 / u) * (-2.0 * t / (u * u)) / half_width;
  };
  return {value, derivative, center - half_width, center + half_width};
}

double weak_form_residual(const AngleSignature& sig, const Measure1D& f, const Measure1D& source,
                          const TestFunction& g) {
  if (f.is_zero() && source.is_zero()) return 0.0;
  const int n = sig.arity();
  const double q = q_factor(sig.phi1(), sig.phi2());
  const auto lhs_weight = [&](double a) {
    if (a <= g.lo || a >= g.hi) return 0.0;
    return (n / a - q) * g.value(a) + (q * a - 1.0) * g.derivative(a);
  };
  const auto rhs_weight = [&](double a) {
    if (a <= g.lo || a >= g.hi) return 0.0;
    return g.value(a);
  };
  // Restrict to the bump support with sub-cell refinement for accuracy.
  const auto restricted = [&](const Measure1D& mu, const auto& fn) {
    double sum = 0.0;
    for (const Atom& atom : mu.atoms()) sum += atom.mass * fn(atom.position);
    const PiecewiseDensity& d = mu.density();
    const auto& xs = d.breakpoints();
    for (std::size_t k = 0; k < d.cell_count(); ++k) {
      const double lo = std::max(xs[k], g.lo);
      const double hi = std::min(xs[k + 1], g.hi);
      if (!(hi > lo)) continue;
      constexpr int kPieces = 4;
      for (int p = 0; p < kPieces; ++p) {
        sum += d.integrate_cell(k, fn, lo + (hi - lo) * p / kPieces,
                                lo + (hi - lo) * (p + 1) / kPieces, 16);
      }
    }
    if (d.tail() && g.hi > d.grid_end()) {
      const double lo = std::max(g.lo, d.grid_end());
      constexpr int kTailPieces = 64;
      for (int p = 0; p < kTailPieces; ++p) {
        sum += d.integrate_tail(fn, lo + (g.hi - lo) * p / kTailPieces,
                                lo + (g.hi - lo) * (p + 1) / kTailPieces);
      }
    }
    return sum;
  };
  return std::abs(restricted(f, lhs_weight) - restricted(source, rhs_weight));
}

double weak_form_battery(const AngleSignature& sig, const Measure1D& f, const Measure1D& source) {
  if (f.is_zero()) return weak_form_residual(sig, f, source, bump(1.0, 0.5));
  const double top = upper_support(sig.phi1(), sig.phi2());
  double worst = 0.0;
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double center = quantile(f, p);
    double half_width = 0.25 * center;
    if (std::isfinite(top)) half_width = std::min(half_width, 0.99 * (top - center));
    if (!(half_width > 0.0)) continue;
    worst = std::max(worst, weak_form_residual(sig, f, source, bump(center, half_width)));
  }
  return worst;
}

double theorem1_residual(const AngleSignature& sig, const Measure1D& f, const Measure1D& source) {
  if (sig.arity() == 1) {
    std::clog << "warning: theorem1_residual is not defined for an atomic density\n";
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (f.is_zero() && source.is_zero()) return 0.0;
  const int n = sig.arity();
  const double q = q_factor(sig.phi1(), sig.phi2());
  const PiecewiseDensity& d = f.density();
  const auto& xs = d.breakpoints();
  double l1 = 0.0;
  for (std::size_t k = 0; k < d.cell_count(); ++k) {
    const double lo = xs[k];
    const double hi = xs[k + 1];
    if (lo <= 0.0) continue;
    const double mid = 0.5 * (lo + hi);
    const double derivative = (d.density_at(hi * (1.0 - 1e-15)) - d.density_at(lo)) / (hi - lo);
    const double operator_value =
        (2.0 * q - n / mid) * derivative + (1.0 - q * mid) * d.density_at(mid);
    l1 += std::abs(operator_value - source.density().density_at(mid)) * (hi - lo);
  }
  return l1;
}

double anchor_density(double a) {
  if (a <= 0.0) return 0.5;
  if (a <= 1.0) {
    const double root = std::sqrt((1.0 - a) * (1.0 + a));
    // (1 - root)/a^2 = 1/(1 + root), stable for small a
    return 1.0 / (1.0 + root);
  }
  return 1.0 / (a * a);
}

double anchor_cdf(double a) {
  if (a <= 0.0) return 0.0;
  if (a <= 1.0) {
    const double root = std::sqrt((1.0 - a) * (1.0 + a));
    // (root - 1)/a = -a/(1 + root)
    return -a / (1.0 + root) + std::asin(a);
  }
  return 0.5 * kPi - 1.0 / a;
}

CalibrationResult calibrate(const SolverConfig& config) {
  SolverConfig raw = config;
  raw.calibration_constant = 1.0;
  raw.validate();
  CalibrationResult result{0.0, 0.0, {}};
  if (config.beta_nodes < 64 || config.grid_cells < 256) {
    result.warnings.push_back("coarse grids: calibration accuracy is reduced");
  }
  const AngleSignature anchor = validate_signature(kPi, kPi, {kPi, kPi});
  const SourceTerm source = source_term(anchor, memo_lookup(raw), raw);
  // Reference source 1/(a sqrt(1 - a^2)) has primitive log(a / (1 + sqrt(1 - a^2))).
  const auto primitive = [](double a) {
    a = std::min(a, 1.0);
    return std::log(a / (1.0 + std::sqrt((1.0 - a) * (1.0 + a))));
  };
  const PiecewiseDensity& d = source.measure.density();
  const auto& xs = d.breakpoints();
  double num = 0.0;
  double den = 0.0;
  double ref_norm = 0.0;
  std::vector<double> reference(d.cell_count());
  for (std::size_t k = 0; k < d.cell_count(); ++k) {
    reference[k] = xs[k] >= 1.0 ? 0.0 : primitive(xs[k + 1]) - primitive(xs[k]);
    num += reference[k] * d.cell_masses()[k];
    den += d.cell_masses()[k] * d.cell_masses()[k];
    ref_norm += reference[k] * reference[k];
  }
  if (!(den > 0.0)) throw Error(ErrorKind::InvalidMeasure, "anchor source vanished");
  result.c0 = num / den;
  double misfit = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double r = reference[k] - result.c0 * d.cell_masses()[k];
    misfit += r * r;
  }
  result.relative_misfit = std::sqrt(misfit / ref_norm);
  return result;
}

}  // namespace flatcone
