#include "flatcone/measure.hpp"

#include <cassert>
#include <limits>
#include <numeric>
#include <string>

namespace flatcone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double binomial(int n, int k) {
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
  return value;
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::InvalidMeasure, what);
}

}  // namespace

// ---------------------------------------------------------------- PowerTail

double PowerTail::density(double x) const {
  return coefficient * std::pow(1.0 - q * x, factor_power) * std::pow(x, -power);
}

double PowerTail::moment_above(double x, double e) const {
  if (coefficient == 0.0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j <= factor_power; ++j) {
    const double c = binomial(factor_power, j) * std::pow(-q, j);
    if (c == 0.0) continue;
    const double exponent = e + j - power;
    if (exponent >= -1.0) {
      throw Error(ErrorKind::DivergentMoment,
                  "tail moment of order " + std::to_string(e) + " diverges");
    }
    sum += c * std::pow(x, exponent + 1.0) / (-exponent - 1.0);
  }
  return coefficient * sum;
}

// -------------------------------------------------------- PiecewiseDensity

PiecewiseDensity::PiecewiseDensity(std::vector<double> breakpoints, std::vector<double> values,
                                   std::vector<double> cell_masses,
                                   std::optional<double> left_exponent,
                                   std::optional<double> right_exponent,
                                   std::optional<PowerTail> tail)
    : breakpoints_(std::move(breakpoints)),
      values_(std::move(values)),
      cell_masses_(std::move(cell_masses)),
      left_exponent_(left_exponent),
      right_exponent_(right_exponent),
      tail_(tail) {
  finalize();
}

PiecewiseDensity PiecewiseDensity::from_values(std::vector<double> breakpoints,
                                               std::vector<double> values,
                                               std::optional<double> left_exponent,
                                               std::optional<double> right_exponent,
                                               std::optional<PowerTail> tail) {
  PiecewiseDensity shape_only;
  shape_only.breakpoints_ = breakpoints;
  shape_only.values_ = values;
  shape_only.left_exponent_ = left_exponent;
  shape_only.right_exponent_ = right_exponent;
  std::vector<double> masses(breakpoints.size() < 2 ? 0 : breakpoints.size() - 1);
  for (std::size_t k = 0; k < masses.size(); ++k) masses[k] = shape_only.shape_integral(k);
  return PiecewiseDensity(std::move(breakpoints), std::move(values), std::move(masses),
                          left_exponent, right_exponent, tail);
}

PiecewiseDensity PiecewiseDensity::from_cell_masses(std::vector<double> breakpoints,
                                                    std::vector<double> cell_masses) {
  const std::size_t cells = cell_masses.size();
  std::vector<double> values(breakpoints.size(), 0.0);
  if (cells > 0) {
    std::vector<double> avg(cells);
    for (std::size_t k = 0; k < cells; ++k) {
      avg[k] = cell_masses[k] / (breakpoints[k + 1] - breakpoints[k]);
    }
    values.front() = avg.front();
    values.back() = avg.back();
    for (std::size_t k = 1; k < cells; ++k) values[k] = 0.5 * (avg[k - 1] + avg[k]);
  }
  return PiecewiseDensity(std::move(breakpoints), std::move(values), std::move(cell_masses));
}

void PiecewiseDensity::finalize() {
  const std::size_t n = breakpoints_.size();
  if (n == 1) invalid("a density grid needs at least two breakpoints");
  if (values_.size() != n) invalid("values and breakpoints differ in length");
  if (cell_masses_.size() != (n == 0 ? 0 : n - 1)) invalid("one mass per cell is required");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(breakpoints_[k]) || breakpoints_[k] < 0.0) {
      invalid("breakpoints must be finite and nonnegative");
    }
    if (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1])) {
      invalid("breakpoints must be strictly increasing");
    }
    if (!(values_[k] >= 0.0) || !std::isfinite(values_[k])) {
      invalid("density values must be finite and nonnegative");
    }
  }
  for (double m : cell_masses_) {
    if (!(m >= 0.0) || !std::isfinite(m)) invalid("cell masses must be finite and nonnegative");
  }
  for (const auto& s : {left_exponent_, right_exponent_}) {
    if (s && !(*s > -1.0 && *s <= 0.0)) invalid("singularity exponents must lie in (-1, 0]");
  }
  if (n == 2 && left_exponent_ && right_exponent_) {
    invalid("a single cell cannot carry both singularity exponents");
  }
  if (tail_) {
    if (n == 0) invalid("a tail needs a grid to attach to");
    if (tail_->q > 0.0 || tail_->factor_power < 0 || !(tail_->coefficient >= 0.0)) {
      invalid("tail must have q <= 0, nonnegative coefficient and factor power");
    }
  }

  const std::size_t cells = cell_count();
  scale_.assign(cells, 0.0);
  uniform_.assign(cells, false);
  prefix_.assign(n, 0.0);
  for (std::size_t k = 0; k < cells; ++k) {
    const double integral = shape_integral(k);
    if (cell_masses_[k] > 0.0) {
      if (integral > 0.0 && std::isfinite(integral)) {
        scale_[k] = cell_masses_[k] / integral;
      } else {
        uniform_[k] = true;
      }
    }
    prefix_[k + 1] = prefix_[k] + cell_masses_[k];
  }
  tail_mass_ = tail_ ? tail_->mass_above(grid_end()) : 0.0;
  total_ = (n ? prefix_.back() : 0.0) + tail_mass_;
}

double PiecewiseDensity::support_end() const noexcept {
  return tail_ && tail_mass_ > 0.0 ? kInf : grid_end();
}

PiecewiseDensity::CellKind PiecewiseDensity::kind(std::size_t k) const noexcept {
  if (k == 0 && left_exponent_ && *left_exponent_ != 0.0) return CellKind::LeftPower;
  if (k + 2 == breakpoints_.size() && right_exponent_ && *right_exponent_ != 0.0) {
    return CellKind::RightPower;
  }
  return CellKind::Plain;
}

double PiecewiseDensity::exponent(std::size_t k) const noexcept {
  switch (kind(k)) {
    case CellKind::LeftPower:
      return *left_exponent_;
    case CellKind::RightPower:
      return *right_exponent_;
    case CellKind::Plain:
      break;
  }
  return 0.0;
}

double PiecewiseDensity::shape(std::size_t k, double x) const {
  const double x0 = breakpoints_[k];
  const double x1 = breakpoints_[k + 1];
  const double h = x1 - x0;
  const double linear = values_[k] + (values_[k + 1] - values_[k]) * (x - x0) / h;
  switch (kind(k)) {
    case CellKind::Plain:
      return linear;
    case CellKind::LeftPower:
      return std::pow(x - x0, exponent(k)) * linear;
    case CellKind::RightPower:
      return std::pow(x1 - x, exponent(k)) * linear;
  }
  return linear;
}

double PiecewiseDensity::primitive(std::size_t k, double x) const {
  const double x0 = breakpoints_[k];
  const double x1 = breakpoints_[k + 1];
  const double h = x1 - x0;
  const double v0 = values_[k];
  const double v1 = values_[k + 1];
  switch (kind(k)) {
    case CellKind::Plain: {
      const double d = x - x0;
      return v0 * d + (v1 - v0) * d * d / (2.0 * h);
    }
    case CellKind::LeftPower: {
      const double s = exponent(k);
      const double d = std::max(x - x0, 0.0);
      return v0 * std::pow(d, s + 1.0) / (s + 1.0) +
             (v1 - v0) / h * std::pow(d, s + 2.0) / (s + 2.0);
    }
    case CellKind::RightPower: {
      const double s = exponent(k);
      const auto g = [&](double e) {
        return v1 * std::pow(e, s + 1.0) / (s + 1.0) +
               (v0 - v1) / h * std::pow(e, s + 2.0) / (s + 2.0);
      };
      return g(h) - g(std::max(x1 - x, 0.0));
    }
  }
  return 0.0;
}

std::size_t PiecewiseDensity::locate(double x) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
  k = k == 0 ? 0 : k - 1;
  return std::min(k, cell_count() - 1);
}

double PiecewiseDensity::density_at(double x) const {
  if (breakpoints_.size() < 2 || x < breakpoints_.front()) return 0.0;
  if (x > breakpoints_.back()) return tail_ ? tail_->density(x) : 0.0;
  const std::size_t k = locate(x);
  if (cell_masses_[k] == 0.0) return 0.0;
  if (uniform_[k]) return cell_masses_[k] / (breakpoints_[k + 1] - breakpoints_[k]);
  return scale_[k] * shape(k, x);
}

double PiecewiseDensity::cumulative(double x) const {
  if (breakpoints_.size() < 2 || x <= breakpoints_.front()) return 0.0;
  if (x >= breakpoints_.back()) {
    if (!tail_ || tail_mass_ == 0.0) return prefix_.back();
    return prefix_.back() + tail_mass_ - tail_->mass_above(x);
  }
  const std::size_t k = locate(x);
  if (cell_masses_[k] == 0.0) return prefix_[k];
  double partial;
  if (uniform_[k]) {
    partial = cell_masses_[k] * (x - breakpoints_[k]) / (breakpoints_[k + 1] - breakpoints_[k]);
  } else {
    partial = scale_[k] * primitive(k, x);
  }
  return prefix_[k] + std::clamp(partial, 0.0, cell_masses_[k]);
}

double PiecewiseDensity::moment(double e) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < cell_count(); ++k) {
    const double m = cell_masses_[k];
    if (m == 0.0) continue;
    const double x0 = breakpoints_[k];
    const double x1 = breakpoints_[k + 1];
    if (x0 > 0.0 || e >= 0.0) {
      sum += integrate_cell(k, [e](double t) { return std::pow(t, e); }, x0, x1, 16);
      continue;
    }
    // Cell touching the origin: closed form for t^(e+s) times a linear factor.
    const double s = kind(k) == CellKind::LeftPower ? exponent(k) : 0.0;
    if (kind(k) == CellKind::RightPower) {
      sum += integrate_cell(k, [e](double t) { return std::pow(t, e); }, x0, x1, 16);
      continue;
    }
    const double h = x1;
    double v0 = values_[k];
    double v1 = values_[k + 1];
    double c = scale_[k];
    if (uniform_[k]) {
      v0 = v1 = 1.0;
      c = m / h;
    }
    const double a = e + s + 1.0;
    if (a <= 0.0 && v0 > 0.0) {
      throw Error(ErrorKind::DivergentMoment,
                  "moment of order " + std::to_string(e) + " diverges at the origin");
    }
    if (a + 1.0 <= 0.0) {
      throw Error(ErrorKind::DivergentMoment,
                  "moment of order " + std::to_string(e) + " diverges at the origin");
    }
    double value = (v1 - v0) * std::pow(h, a) / (a + 1.0);
    if (v0 > 0.0) value += v0 * std::pow(h, a) / a;
    sum += c * value;
  }
  if (tail_ && tail_mass_ > 0.0) sum += tail_->moment_above(grid_end(), e);
  return sum;
}

// ---------------------------------------------------------------- Measure1D

Measure1D::Measure1D(std::vector<Atom> atoms, PiecewiseDensity density)
    : atoms_(std::move(atoms)), density_(std::move(density)) {
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  atom_prefix_.assign(atoms_.size() + 1, 0.0);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& atom = atoms_[i];
    if (!(atom.position > 0.0) || !std::isfinite(atom.position)) {
      invalid("atom positions must be positive and finite");
    }
    if (!(atom.mass > 0.0) || !std::isfinite(atom.mass)) invalid("atom masses must be positive");
    if (i > 0 && !(atom.position > atoms_[i - 1].position)) {
      invalid("atom positions must be strictly increasing");
    }
    atom_prefix_[i + 1] = atom_prefix_[i] + atom.mass;
  }
  atom_mass_ = atom_prefix_.back();
}

Measure1D Measure1D::single_atom(double position, double mass) {
  return Measure1D({Atom{position, mass}});
}

double Measure1D::cdf(double x) const {
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x,
                             [](double v, const Atom& a) { return v < a.position; });
  return atom_prefix_[static_cast<std::size_t>(it - atoms_.begin())] + density_.cumulative(x);
}

double Measure1D::cdf_left(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                             [](const Atom& a, double v) { return a.position < v; });
  return atom_prefix_[static_cast<std::size_t>(it - atoms_.begin())] + density_.cumulative(x);
}

Measure1D Measure1D::scaled(double c) const {
  if (!(c >= 0.0)) invalid("scale factor must be nonnegative");
  std::vector<Atom> atoms;
  if (c > 0.0) {
    for (const Atom& atom : atoms_) atoms.push_back({atom.position, atom.mass * c});
  }
  const PiecewiseDensity& d = density_;
  std::vector<double> values = d.values();
  std::vector<double> masses = d.cell_masses();
  for (double& v : values) v *= c;
  for (double& m : masses) m *= c;
  std::optional<PowerTail> tail = d.tail();
  if (tail) tail->coefficient *= c;
  return Measure1D(std::move(atoms),
                   PiecewiseDensity(d.breakpoints(), std::move(values), std::move(masses),
                                    d.left_exponent(), d.right_exponent(), tail));
}

// ---------------------------------------------------------------- operations

double total_mass(const Measure1D& mu) { return mu.total_mass(); }

double moment(const Measure1D& mu, double exponent) {
  double sum = mu.density().moment(exponent);
  for (const Atom& atom : mu.atoms()) sum += atom.mass * std::pow(atom.position, exponent);
  return sum;
}

double quantile(const Measure1D& mu, double p) {
  const double total = mu.total_mass();
  if (!(total > 1e-15)) invalid("quantile of a zero measure");
  if (!(p > 0.0 && p < 1.0)) invalid("quantile level must lie in (0, 1)");
  const double target = p * total;

  std::vector<double> candidates = mu.density().breakpoints();
  for (const Atom& atom : mu.atoms()) candidates.push_back(atom.position);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto it = std::partition_point(candidates.begin(), candidates.end(),
                                 [&](double c) { return mu.cdf(c) < target; });
  double lo;
  double hi;
  if (it == candidates.end()) {
    // Target lies in the tail: bracket by doubling.
    lo = candidates.back();
    hi = 2.0 * lo;
    while (mu.cdf(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) invalid("quantile bracket diverged");
    }
  } else {
    hi = *it;
    if (mu.cdf_left(hi) < target) return hi;  // jump at an atom or cell start
    lo = it == candidates.begin() ? 0.0 : *(it - 1);
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(hi, 1e-300); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mu.cdf(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

Measure1D pushforward(const Measure1D& mu, const std::vector<MonotoneBranch>& branches,
                      int refine) {
  const PiecewiseDensity& d = mu.density();
  if (d.tail() && d.tail_mass() > 0.0) invalid("pushforward of a measure with a tail");
  if (refine < 1) invalid("refinement factor must be positive");

  struct Oriented {
    const MonotoneBranch* branch;
    bool increasing;
  };
  std::vector<Oriented> oriented;
  for (const MonotoneBranch& b : branches) {
    if (!(b.hi > b.lo)) throw Error(ErrorKind::NonMonotoneBranch, "empty branch domain");
    const double y0 = b.map(b.lo);
    const double y1 = b.map(b.hi);
    if (y0 == y1) throw Error(ErrorKind::NonMonotoneBranch, "constant branch");
    const bool increasing = y1 > y0;
    constexpr int kProbes = 64;
    for (int i = 1; i < kProbes; ++i) {
      const double t = b.lo + (b.hi - b.lo) * i / kProbes;
      const double slope = b.derivative(t);
      if (slope == 0.0) {
        throw Error(ErrorKind::ZeroDerivativeInInterior, "zero derivative inside branch");
      }
      if ((slope > 0.0) != increasing) {
        throw Error(ErrorKind::NonMonotoneBranch, "derivative changes sign inside branch");
      }
    }
    oriented.push_back({&b, increasing});
  }

  // Atoms follow the map; shared branch endpoints belong to the left branch.
  std::vector<Atom> atoms;
  for (const Atom& atom : mu.atoms()) {
    for (const Oriented& o : oriented) {
      if (atom.position >= o.branch->lo && atom.position <= o.branch->hi) {
        atoms.push_back({o.branch->map(atom.position), atom.mass});
        break;
      }
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

  if (d.cell_count() == 0) return Measure1D(std::move(merged));

  // Source points: refined grid clipped to each branch domain.
  std::vector<double> source;
  const auto& xs = d.breakpoints();
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    for (int r = 0; r < refine; ++r) source.push_back(xs[k] + (xs[k + 1] - xs[k]) * r / refine);
  }
  source.push_back(xs.back());

  std::vector<double> image;
  for (const Oriented& o : oriented) {
    const double lo = std::max(o.branch->lo, xs.front());
    const double hi = std::min(o.branch->hi, xs.back());
    if (!(hi > lo)) continue;
    image.push_back(o.branch->map(lo));
    image.push_back(o.branch->map(hi));
    for (double x : source) {
      if (x > lo && x < hi) image.push_back(o.branch->map(x));
    }
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::abs(b); }),
              image.end());
  if (image.size() < 2) return Measure1D(std::move(merged));

  const std::size_t cells = image.size() - 1;
  std::vector<double> masses(cells, 0.0);
  std::vector<double> values(image.size(), 0.0);
  for (const Oriented& o : oriented) {
    const MonotoneBranch& b = *o.branch;
    const double lo = std::max(b.lo, xs.front());
    const double hi = std::min(b.hi, xs.back());
    if (!(hi > lo)) continue;
    const double y_lo = std::min(b.map(lo), b.map(hi));
    const double y_hi = std::max(b.map(lo), b.map(hi));
    const auto preimage = [&](double y) { return std::clamp(b.inverse(y), lo, hi); };
    for (std::size_t k = 0; k < cells; ++k) {
      const double a = std::max(image[k], y_lo);
      const double c = std::min(image[k + 1], y_hi);
      if (!(c > a)) continue;
      masses[k] += std::abs(d.cumulative(preimage(c)) - d.cumulative(preimage(a)));
    }
    for (std::size_t k = 0; k < image.size(); ++k) {
      const double y = image[k];
      if (y < y_lo || y > y_hi) continue;
      const double x = preimage(y);
      const double v = d.density_at(x) / std::abs(b.derivative(x));
      values[k] += std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
    }
  }
  // Endpoint singularities of the Jacobian: fall back to cell averages.
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::isfinite(values[k])) continue;
    double v = 0.0;
    if (k > 0) v = std::max(v, masses[k - 1] / (image[k] - image[k - 1]));
    if (k < cells) v = std::max(v, masses[k] / (image[k + 1] - image[k]));
    values[k] = v;
  }
  return Measure1D(std::move(merged), PiecewiseDensity(std::move(image), std::move(values),
                                                       std::move(masses)));
}

Measure1D to_length_density(const Measure1D& mu_area) {
  std::vector<Atom> atoms;
  for (const Atom& atom : mu_area.atoms()) {
    atoms.push_back({1.0 / std::sqrt(atom.position), atom.mass});
  }
  const PiecewiseDensity& d = mu_area.density();
  if (d.cell_count() == 0) return Measure1D(std::move(atoms));

  const auto& xs = d.breakpoints();
  const auto& fs = d.values();
  const auto& ms = d.cell_masses();
  std::vector<double> ls;
  std::vector<double> rho;
  std::vector<double> masses;

  // Area tail beyond the grid becomes a head [0, l_min] on a fine grid.
  const bool has_tail = d.tail() && d.tail_mass() > 0.0;
  const double l_min = 1.0 / std::sqrt(xs.back());
  if (has_tail) {
    const PowerTail& t = *d.tail();
    constexpr int kHeadCells = 64;
    for (int i = 0; i < kHeadCells; ++i) {
      const double l = l_min * i / kHeadCells;
      ls.push_back(l);
      // rho(l) = 2 C l^(2p - 3 - 2k) (l^2 - q)^k
      rho.push_back(l == 0.0 ? (2.0 * t.power - 3.0 - 2.0 * t.factor_power == 0.0
                                    ? 2.0 * t.coefficient * std::pow(-t.q, t.factor_power)
                                    : 0.0)
                             : 2.0 * std::pow(l, -3.0) * t.density(1.0 / (l * l)));
      const double l_next = l_min * (i + 1) / kHeadCells;
      const double beyond = i == 0 ? 0.0 : t.mass_above(1.0 / (l * l));
      masses.push_back(std::max(0.0, t.mass_above(1.0 / (l_next * l_next)) - beyond));
    }
  }
  // Grid cells in reverse order keep their exact masses.
  const bool origin_cell = xs.front() == 0.0;
  const std::size_t first = origin_cell ? 1 : 0;
  for (std::size_t i = xs.size(); i-- > first;) {
    const double l = 1.0 / std::sqrt(xs[i]);
    ls.push_back(l);
    rho.push_back(2.0 * l * l * l * fs[i]);
    if (i > first) masses.push_back(ms[i - 1]);
  }
  std::optional<double> left;
  std::optional<double> right;
  if (d.right_exponent() && !has_tail) left = d.right_exponent();
  if (d.left_exponent() && !origin_cell) right = d.left_exponent();

  // An area cell [0, x1] becomes a power tail beyond 1/sqrt(x1).
  std::optional<PowerTail> tail;
  if (origin_cell && ms.front() > 0.0) {
    const double s = d.left_exponent().value_or(0.0);
    const double x1 = xs[1];
    // f ~ c t^s on [0, x1] with mass m gives rho ~ 2c l^(-3-2s).
    const double c = ms.front() * (s + 1.0) / std::pow(x1, s + 1.0);
    tail = PowerTail{2.0 * c, 0.0, 0, 3.0 + 2.0 * s};
  }
  if (ls.size() < 2) return Measure1D(std::move(atoms));
  return Measure1D(std::move(atoms),
                   PiecewiseDensity(std::move(ls), std::move(rho), std::move(masses),
                                    left, right, tail));
}

Measure1D from_length_density(const Measure1D& mu_length) {
  std::vector<Atom> atoms;
  for (const Atom& atom : mu_length.atoms()) {
    atoms.push_back({1.0 / (atom.position * atom.position), atom.mass});
  }
  const PiecewiseDensity& d = mu_length.density();
  if (d.tail() && d.tail_mass() > 0.0) invalid("inverse length transform of a measure with a tail");
  if (d.cell_count() == 0) return Measure1D(std::move(atoms));
  if (d.breakpoints().front() == 0.0) invalid("inverse length transform needs l > 0");
  const auto& ls = d.breakpoints();
  const auto& rs = d.values();
  const auto& ms = d.cell_masses();
  std::vector<double> xs;
  std::vector<double> fs;
  std::vector<double> masses;
  for (std::size_t i = ls.size(); i-- > 0;) {
    const double l = ls[i];
    xs.push_back(1.0 / (l * l));
    fs.push_back(0.5 * rs[i] / (l * l * l));
    if (i > 0) masses.push_back(ms[i - 1]);
  }
  return Measure1D(std::move(atoms),
                   PiecewiseDensity(std::move(xs), std::move(fs), std::move(masses),
                                    d.right_exponent(), d.left_exponent()));
}

double ks_distance(const Measure1D& mu, const Measure1D& nu) {
  for (const Measure1D* m : {&mu, &nu}) {
    if (std::abs(m->total_mass() - 1.0) > 1e-9) {
      throw Error(ErrorKind::NotNormalized,
                  "KS distance needs unit mass, got " + std::to_string(m->total_mass()));
    }
  }
  double sup = 0.0;
  const auto probe = [&](double x) {
    sup = std::max(sup, std::abs(mu.cdf(x) - nu.cdf(x)));
    sup = std::max(sup, std::abs(mu.cdf_left(x) - nu.cdf_left(x)));
  };
  for (const Measure1D* m : {&mu, &nu}) {
    for (double x : m->density().breakpoints()) probe(x);
    for (const Atom& atom : m->atoms()) probe(atom.position);
  }
  return sup;
}

Measure1D empirical_measure(std::vector<double> samples) {
  if (samples.empty()) return {};
  std::sort(samples.begin(), samples.end());
  const double w = 1.0 / static_cast<double>(samples.size());
  std::vector<Atom> atoms;
  for (double x : samples) {
    if (!atoms.empty() && atoms.back().position == x) {
      atoms.back().mass += w;
    } else {
      atoms.push_back({x, w});
    }
  }
  return Measure1D(std::move(atoms));
}

Measure1D combine(double c1, const Measure1D& mu, double c2, const Measure1D& nu) {
  if (!(c1 >= 0.0 && c2 >= 0.0)) invalid("combination weights must be nonnegative");
  const PiecewiseDensity& a = mu.density();
  const PiecewiseDensity& b = nu.density();
  for (const PiecewiseDensity* d : {&a, &b}) {
    if (d->left_exponent() || d->right_exponent()) {
      if (a.breakpoints() != b.breakpoints()) {
        invalid("combining densities with singularity exponents needs a shared grid");
      }
    }
  }
  std::vector<Atom> atoms;
  for (const Atom& atom : mu.atoms()) atoms.push_back({atom.position, c1 * atom.mass});
  for (const Atom& atom : nu.atoms()) atoms.push_back({atom.position, c2 * atom.mass});
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return x.position < y.position; });
  std::vector<Atom> merged;
  for (const Atom& atom : atoms) {
    if (atom.mass == 0.0) continue;
    if (!merged.empty() && merged.back().position == atom.position) {
      merged.back().mass += atom.mass;
    } else {
      merged.push_back(atom);
    }
  }

  std::vector<double> grid = a.breakpoints();
  grid.insert(grid.end(), b.breakpoints().begin(), b.breakpoints().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.size() < 2) return Measure1D(std::move(merged));

  // Tails: equal forms add, otherwise the tail must start past the other grid.
  std::optional<PowerTail> tail;
  const auto& ta = a.tail();
  const auto& tb = b.tail();
  if (ta && tb) {
    if (ta->q != tb->q || ta->factor_power != tb->factor_power || ta->power != tb->power ||
        a.grid_end() != b.grid_end()) {
      invalid("combining incompatible tails");
    }
    tail = *ta;
    tail->coefficient = c1 * ta->coefficient + c2 * tb->coefficient;
  } else if (ta || tb) {
    const PiecewiseDensity& with = ta ? a : b;
    const PiecewiseDensity& without = ta ? b : a;
    if (without.cell_count() > 0 && without.grid_end() > with.grid_end()) {
      invalid("a tail overlaps the other density's grid");
    }
    tail = ta ? *ta : *tb;
    tail->coefficient *= ta ? c1 : c2;
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [&](double x) { return x > with.grid_end(); }),
               grid.end());
  }

  std::vector<double> values(grid.size());
  std::vector<double> masses(grid.size() - 1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    values[k] = c1 * a.density_at(grid[k]) + c2 * b.density_at(grid[k]);
    if (k + 1 < grid.size()) {
      masses[k] = c1 * (a.cumulative(grid[k + 1]) - a.cumulative(grid[k])) +
                  c2 * (b.cumulative(grid[k + 1]) - b.cumulative(grid[k]));
      masses[k] = std::max(masses[k], 0.0);
    }
  }
  return Measure1D(std::move(merged),
                   PiecewiseDensity(std::move(grid), std::move(values), std::move(masses),
                                    std::nullopt, std::nullopt, tail));
}

Measure1D normalized(const Measure1D& mu) {
  const double total = mu.total_mass();
  if (!(total > 1e-15)) invalid("cannot normalize a zero measure");
  return mu.scaled(1.0 / total);
}

}  // namespace flatcone
