#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "flatcone/cache.hpp"
#include "flatcone/error.hpp"
#include "flatcone/recurrence.hpp"

using namespace flatcone;

namespace {

AngleSignature anchor() { return validate_signature(kPi, kPi, {kPi, kPi}); }

AngleSignature five_cones() {
  const double d = 4 * kPi / 5;
  return validate_signature(6 * kPi / 5, 6 * kPi / 5, {d, d, d});
}

/// Volume of the hyperbolic sphere with cone angles |2 pi - d_i - d_j|, which
/// is what Thurston's metric makes of every n = 2 moduli space.
double gauss_bonnet_volume(double phi1, double phi2, double a1, double a2) {
  return (kTwoPi - std::abs(phi1 + phi2 - kTwoPi) - std::abs(phi1 - a1) - std::abs(phi1 - a2)) / 4;
}

/// Primitive of 1/(a sqrt(1 - a^2)) on (0, 1].
double anchor_source_primitive(double a) {
  return std::log(a / (1.0 + std::sqrt((1.0 - a) * (1.0 + a))));
}

}  // namespace

TEST_SUITE("recurrence") {
  TEST_CASE("base_density") {
    auto f = base_density(validate_signature(kPi / 2, kPi / 2, {kPi}));
    REQUIRE(f.atoms().size() == 1);
    CHECK(f.atoms()[0].position == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f.total_mass() == 1.0);
    f = base_density(validate_signature(2 * kPi / 3, 2 * kPi / 3, {4 * kPi / 3}));
    CHECK(f.atoms()[0].position == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
    f = base_density(validate_signature(kPi / 3, 2 * kPi / 3, {kPi}));
    CHECK(f.atoms()[0].position == doctest::Approx(std::sqrt(3.0) / 4).epsilon(1e-14));
    CHECK_THROWS_AS(base_density(anchor()), Error);
  }

  TEST_CASE("upper_support") {
    CHECK(std::isinf(upper_support(kPi, kPi)));
    CHECK(upper_support(kPi / 2, kPi / 2) == doctest::Approx(0.5));
    CHECK(std::isinf(upper_support(6 * kPi / 5, 6 * kPi / 5)));
  }

  TEST_CASE("anchor source is 4 c0 / (a sqrt(1 - a^2))") {
    SolverConfig config;
    const auto lookup = [&](const AngleSignature& s) {
      return std::make_shared<const Measure1D>(base_density(s));
    };
    const SourceTerm s = source_term(anchor(), lookup, config, true);
    CHECK(s.per_split_breakdown.size() == 2);
    CHECK(s.measure.atoms().empty());
    for (auto [lo, hi] : {std::pair{0.2, 0.8}, std::pair{0.01, 0.5}, std::pair{0.9, 0.999}}) {
      const double expected = anchor_source_primitive(hi) - anchor_source_primitive(lo);
      // 1e-6: partial cells near the square-root singularity use the linear shape.
      CHECK(s.measure.cdf(hi) - s.measure.cdf(lo) == doctest::Approx(expected).epsilon(1e-6));
    }
    CHECK(s.measure.cdf(1.5) == doctest::Approx(s.measure.cdf(1.0)).epsilon(1e-15));

    SolverConfig raw = config;
    raw.calibration_constant = 1.0;
    const SourceTerm s4 = source_term(anchor(), lookup, raw);
    CHECK(s4.measure.cdf(0.8) - s4.measure.cdf(0.2) ==
          doctest::Approx(4 * (s.measure.cdf(0.8) - s.measure.cdf(0.2))).epsilon(1e-12));
  }

  TEST_CASE("missing child") {
    // n = 2 children are base atoms built in place; n = 3 needs the lookup.
    const auto none = [](const AngleSignature&) { return std::shared_ptr<const Measure1D>(); };
    try {
      source_term(five_cones(), none, SolverConfig{});
      FAIL("expected MissingChild");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingChild);
    }
  }

  TEST_CASE("n = 1 source is zero") {
    const auto lookup = [](const AngleSignature& s) {
      return std::make_shared<const Measure1D>(base_density(s));
    };
    const auto s = source_term(validate_signature(1.0, 1.0, {2.0}), lookup, SolverConfig{});
    CHECK(s.measure.is_zero());
  }

  TEST_CASE("solve_ode: zero and atomic sources") {
    SolverConfig config;
    CHECK(solve_ode(0.0, 2, Measure1D{}, INFINITY, config).is_zero());
    const Measure1D f = solve_ode(0.0, 2, Measure1D::single_atom(1.0, 0.7), INFINITY, config);
    CHECK(f.atoms().empty());
    for (double a : {1.2, 2.0, 7.5, 40.0}) {
      CHECK(f.density().density_at(a) == doctest::Approx(0.7 / (a * a)).epsilon(1e-9));
    }
    CHECK(f.density().density_at(0.5) == 0.0);
    CHECK(f.total_mass() == doctest::Approx(0.7).epsilon(1e-9));
  }

  TEST_CASE("anchor density matches the closed form") {
    SolverConfig config;
    const auto f = density(anchor(), config);
    CHECK(f->atoms().empty());
    double err = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double a = 0.05 * std::pow(100.0, i / 1000.0);
      err = std::max(err, std::abs(f->density().density_at(a) / anchor_density(a) - 1.0));
    }
    CHECK(err < 1e-3);
    CHECK(volume(anchor(), config) == doctest::Approx(kPi / 2).epsilon(1e-4));
    const LengthStats st = length_stats(anchor(), config);
    CHECK(st.mean == doctest::Approx(1.09).epsilon(0.03));
    CHECK(st.median == doctest::Approx(0.886).epsilon(0.01));
  }

  TEST_CASE("anchor closed form helpers agree") {
    for (double a : {0.1, 0.5, 0.9, 2.0}) {
      const double h = 1e-6;
      const double derivative = (anchor_cdf(a + h) - anchor_cdf(a - h)) / (2 * h);
      CHECK(derivative == doctest::Approx(anchor_density(a)).epsilon(1e-5));
    }
    CHECK(anchor_cdf(1e12) == doctest::Approx(kPi / 2).epsilon(1e-10));
  }

  TEST_CASE("n = 1 delegates to the base case") {
    SolverConfig config;
    const auto sig = validate_signature(kPi / 2, kPi / 2, {kPi});
    const auto f = density(sig, config);
    REQUIRE(f->atoms().size() == 1);
    CHECK(f->atoms()[0].position == doctest::Approx(0.5));
    CHECK(volume(sig, config) == 1.0);
    const LengthStats st = length_stats(sig, config);
    CHECK(st.mean == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(st.median == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  TEST_CASE("n = 2 volumes match the Gauss-Bonnet oracle") {
    SolverConfig config;
    const std::vector<std::array<double, 4>> cases{
        {kPi / 2, kPi / 2, kPi / 2, kPi / 2}, {1.5 * kPi, 1.5 * kPi, 1.5 * kPi, 1.5 * kPi},
        {2.0, 1.0, 1.2, 1.8},                 {3.5, 2.5, 3.3, 2.7},
        {0.9, 2.6, 1.9, 1.6},                 {2.6, 0.9, 1.9, 1.6},
        {1.2, 1.2, 1.2, 1.2},                 {1.0, 1.5, 1.2, 1.3}};
    for (const auto& [p1, p2, a1, a2] : cases) {
      const auto sig = validate_signature(p1, p2, {a1, a2});
      CHECK(volume(sig, config) == doctest::Approx(gauss_bonnet_volume(p1, p2, a1, a2)).epsilon(1e-5));
    }
  }

  TEST_CASE("label symmetry") {
    SolverConfig config;
    const auto sig = validate_signature(2.0, 1.5, {1.0, 1.2, 1.3});
    const double v = volume(sig, config);
    CHECK(volume(sig.swapped(), config) == doctest::Approx(v).epsilon(1e-5));
    CHECK(volume(validate_signature(2.0, 1.5, {1.3, 1.0, 1.2}), config) ==
          doctest::Approx(v).epsilon(1e-5));
    const auto two = validate_signature(0.9, 2.6, {1.9, 1.6});
    CHECK(volume(two.swapped(), config) == doctest::Approx(volume(two, config)).epsilon(1e-5));
  }

  TEST_CASE("nonnegativity, support and atom bookkeeping") {
    SolverConfig config;
    for (const auto& sig : {validate_signature(2.0, 1.0, {1.2, 1.8}),
                            validate_signature(3.5, 2.5, {3.3, 2.7}),
                            validate_signature(2.0, 1.5, {1.0, 1.2, 1.3})}) {
      const auto f = density(sig, config);
      CHECK(f->atoms().empty());
      for (double v : f->density().values()) CHECK(v >= -1e-9);
      const double top = upper_support(sig.phi1(), sig.phi2());
      if (std::isfinite(top)) CHECK(f->total_mass() - f->cdf(top) < 1e-6 * f->total_mass());
    }
  }

  TEST_CASE("weak-form residual") {
    SolverConfig config;
    const Solution sol = solve(anchor(), config);
    CHECK(weak_form_residual(anchor(), sol.density, sol.source.measure, bump(0.5, 0.3)) < 1e-6);
    CHECK(weak_form_battery(anchor(), sol.density, sol.source.measure) < 1e-5);
    CHECK(weak_form_residual(anchor(), Measure1D{}, Measure1D{}, bump(0.5, 0.3)) == 0.0);

    // Uncalibrated source: the residual is three times the S-integral of g.
    SolverConfig raw = config;
    raw.calibration_constant = 1.0;
    const auto lookup = [](const AngleSignature& s) {
      return std::make_shared<const Measure1D>(base_density(s));
    };
    const Measure1D s4 = source_term(anchor(), lookup, raw).measure;
    const TestFunction g = bump(0.5, 0.3);
    const double s_of_g = sol.source.measure.integrate(
        [&](double a) { return a > g.lo && a < g.hi ? g.value(a) : 0.0; });
    CHECK(weak_form_residual(anchor(), sol.density, s4, g) == doctest::Approx(3 * s_of_g).epsilon(1e-5));
  }

  TEST_CASE("weak-form battery on three-cone densities") {
    SolverConfig config;
    for (const auto& sig : {validate_signature(2.0, 1.5, {1.0, 1.2, 1.3}), five_cones()}) {
      const Solution sol = solve(sig, config);
      CHECK(weak_form_battery(sig, sol.density, sol.source.measure) < 1e-5);
    }
  }

  TEST_CASE("theorem1_residual is a diagnostic") {
    SolverConfig config;
    const Solution sol = solve(anchor(), config);
    CHECK(theorem1_residual(anchor(), sol.density, sol.source.measure) > 1e-3);
    CHECK(theorem1_residual(anchor(), Measure1D{}, Measure1D{}) == 0.0);
    const auto one = validate_signature(kPi / 2, kPi / 2, {kPi});
    CHECK(std::isnan(theorem1_residual(one, base_density(one), Measure1D{})));
  }

  TEST_CASE("five cones: paper statistics and regression values") {
    SolverConfig config;
    const auto f = density(five_cones(), config);
    const LengthStats st = length_stats(*f);
    CHECK(st.mean == doctest::Approx(0.71).epsilon(0.03 / 0.71));
    CHECK(st.median == doctest::Approx(0.76).epsilon(0.03 / 0.76));
    // First verified run at default grids.
    CHECK(f->total_mass() == doctest::Approx(0.98695556).epsilon(1e-6));
    CHECK(st.mean == doctest::Approx(0.732891).epsilon(1e-5));
    CHECK(st.median == doctest::Approx(0.752652).epsilon(1e-5));
  }

  TEST_CASE("grid convergence") {
    SolverConfig coarse;
    SolverConfig fine;
    fine.beta_nodes *= 2;
    fine.grid_cells *= 2;
    for (const auto& sig : {anchor(), validate_signature(3.5, 2.5, {3.3, 2.7}),
                            validate_signature(2.0, 1.5, {1.0, 1.2, 1.3})}) {
      const double v0 = volume(sig, coarse);
      const double v1 = volume(sig, fine);
      CHECK(std::abs(v1 / v0 - 1.0) < 1e-4);
    }
  }

  TEST_CASE("calibration") {
    SolverConfig config;
    const auto result = calibrate(config);
    CHECK(result.c0 == doctest::Approx(0.25).epsilon(4e-6));
    CHECK(std::abs(result.c0 - 0.25) < 1e-6);
    CHECK(result.warnings.empty());
    config.beta_nodes = 16;
    const auto coarse = calibrate(config);
    CHECK(std::abs(coarse.c0 - 0.25) < 1e-3);
    CHECK(!coarse.warnings.empty());
  }

  TEST_CASE("configuration limits") {
    SolverConfig config;
    config.grid_cells = 4;
    CHECK_THROWS_AS(config.validate(), Error);
    config = SolverConfig{};
    config.ode_tolerance = 1e-2;
    CHECK_THROWS_AS(config.validate(), Error);
    config = SolverConfig{};
    config.max_arity = 2;
    try {
      density(five_cones(), config);
      FAIL("expected ArityLimitExceeded");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ArityLimitExceeded);
    }
  }

  TEST_CASE("memo and on-disk cache") {
    clear_density_memo();
    CHECK(density_memo_size() == 0);
    SolverConfig config;
    const auto f = density(anchor(), config);
    CHECK(density_memo_size() > 0);

    const auto dir = std::filesystem::temp_directory_path() / "flatcone-test-cache";
    std::filesystem::remove_all(dir);
    config.cache_dir = dir;
    const auto stored = density(anchor(), config);
    const auto descriptor = cache_descriptor(anchor(), config);
    CHECK(std::filesystem::exists(cache_path(dir, descriptor)));
    const auto loaded = cache_load(dir, descriptor);
    REQUIRE(loaded.has_value());
    CHECK(loaded->density().cell_masses() == f->density().cell_masses());
    CHECK(loaded->density().breakpoints() == f->density().breakpoints());
    CHECK(loaded->total_mass() == f->total_mass());

    SolverConfig other = config;
    other.grid_cells = 1024;
    CHECK(!cache_load(dir, cache_descriptor(anchor(), other)).has_value());
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  }
}
