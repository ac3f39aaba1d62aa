#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "doctest.h"
#include "flatcone/error.hpp"
#include "flatcone/geometry.hpp"
#include "flatcone/measure.hpp"
#include "flatcone/recurrence.hpp"
#include "flatcone/signature.hpp"

using namespace flatcone;
using cd = std::complex<double>;

namespace {

double sum(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

/// Moebius action of an integer matrix on the upper half plane.
cd act(int a, int b, int c, int d, cd tau) { return (double(a) * tau + double(b)) / (double(c) * tau + double(d)); }

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("cone defects and Gauss-Bonnet") {
    for (double d : cone_defects(regular_polygon(4))) CHECK(d == doctest::Approx(kPi));
    for (double d : cone_defects(regular_tetrahedron())) CHECK(d == doctest::Approx(kPi));
    const auto pyramid = square_pyramid(0.3 * kPi);
    const auto defects = cone_defects(pyramid);
    REQUIRE(defects.size() == 5);
    for (double d : defects) CHECK(d == doctest::Approx(4 * kPi / 5).epsilon(1e-12));
    for (int m = 3; m <= 12; ++m) CHECK(std::abs(sum(cone_defects(regular_polygon(m))) - 2 * kTwoPi) < 1e-9);
    for (double h : {0.1, 0.5, 2.0, 10.0}) {
      CHECK(std::abs(sum(cone_defects(square_pyramid_with_height(h))) - 2 * kTwoPi) < 1e-9);
    }
  }

  TEST_CASE("double square and pentagon at unit area") {
    const auto square = regular_polygon(4);
    CHECK(doubled_distance(square, 0, 1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(doubled_distance(square, 0, 2) == doctest::Approx(1.0).epsilon(1e-12));
    const auto pentagon = regular_polygon(5);
    const double side = std::sqrt(2 * std::tan(kPi / 5) / 5);
    CHECK(doubled_distance(pentagon, 0, 1) == doctest::Approx(side).epsilon(1e-12));
    CHECK(doubled_distance(pentagon, 0, 2) == doctest::Approx(side * (1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
    CHECK(doubled_distance(pentagon, 0, 1) == doctest::Approx(0.5391).epsilon(1e-4));
    CHECK(doubled_distance(pentagon, 0, 2) == doctest::Approx(0.8723).epsilon(1e-4));
  }

  TEST_CASE("regular tetrahedron") {
    const auto tetra = regular_tetrahedron();
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        CHECK(polyhedron_distance(tetra, i, j) == doctest::Approx(std::pow(3.0, -0.25)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("square pyramid with equal defects") {
    // Apex 4, base 0..3 in cyclic order. The shortest paths are the lateral
    // edge, the base edge and the base diagonal, so the values follow from
    // the face geometry alone.
    const auto pyramid = square_pyramid(0.3 * kPi);
    const double lateral = 0.5 / std::sin(0.15 * kPi);
    const double area = 1.0 + 2 * lateral * lateral * std::sin(0.3 * kPi);
    const double scale = 1 / std::sqrt(area);
    CHECK(polyhedron_distance(pyramid, 4, 0) == doctest::Approx(lateral * scale).epsilon(1e-12));
    CHECK(polyhedron_distance(pyramid, 0, 1) == doctest::Approx(scale).epsilon(1e-12));
    CHECK(polyhedron_distance(pyramid, 0, 2) == doctest::Approx(std::sqrt(2.0) * scale).epsilon(1e-12));
  }

  TEST_CASE("flattened pyramid tends to the double square") {
    const auto flat = square_pyramid_with_height(1e-7);
    CHECK(polyhedron_distance(flat, 0, 1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(polyhedron_distance(flat, 0, 2) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("geodesics cross faces when that is shorter") {
    // A tall pyramid: the shortest path between opposite base vertices runs
    // across the base diagonal, and between adjacent ones along the base edge.
    const auto tall = square_pyramid_with_height(5.0);
    CHECK(polyhedron_distance(tall, 0, 2, false) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // A flat one: the apex lies almost in the base plane, so the path from a
    // base vertex to the apex is the straight half diagonal.
    const auto low = square_pyramid_with_height(1e-3);
    CHECK(polyhedron_distance(low, 0, 4, false) ==
          doctest::Approx(std::sqrt(0.5 + 1e-6)).epsilon(1e-12));
  }

  TEST_CASE("symmetry and triangle inequality on the pyramid family") {
    for (double h : {0.2, 0.6, 0.8443695867804547, 1.5, 4.0}) {
      const auto p = square_pyramid_with_height(h);
      double d[5][5];
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) d[i][j] = i == j ? 0.0 : polyhedron_distance(p, i, j);
      }
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
          CHECK(d[i][j] == doctest::Approx(d[j][i]).epsilon(1e-12));
          for (int k = 0; k < 5; ++k) CHECK(d[i][k] <= d[i][j] + d[j][k] + 1e-12);
        }
      }
    }
  }

  TEST_CASE("scale covariance") {
    std::mt19937_64 rng(8);
    const auto tetra = regular_tetrahedron();
    const auto pentagon = regular_polygon(5);
    for (int trial = 0; trial < 10; ++trial) {
      const double lambda = 0.1 + 5.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const auto t2 = tetra.scaled(lambda);
      CHECK(polyhedron_distance(t2, 0, 1, false) ==
            doctest::Approx(lambda * polyhedron_distance(tetra, 0, 1, false)).epsilon(1e-12));
      CHECK(t2.area() == doctest::Approx(lambda * lambda * tetra.area()).epsilon(1e-12));
      CHECK(polyhedron_distance(t2, 0, 1) == doctest::Approx(polyhedron_distance(tetra, 0, 1)).epsilon(1e-12));
      const auto p2 = pentagon.scaled(lambda);
      CHECK(doubled_distance(p2, 0, 2, false) ==
            doctest::Approx(lambda * doubled_distance(pentagon, 0, 2, false)).epsilon(1e-12));
      CHECK(doubled_distance(p2, 0, 2) == doctest::Approx(doubled_distance(pentagon, 0, 2)).epsilon(1e-12));
    }
  }

  TEST_CASE("invalid surfaces") {
    CHECK(kind_of([] { DoubledPolygon({{0, 0}, {1, 0}, {1, 1}, {0.5, 0.2}}); }) == ErrorKind::InvalidSurface);
    CHECK(kind_of([] { DoubledPolygon({{0, 0}, {0, 1}, {1, 0}}); }) == ErrorKind::InvalidSurface);
    // Open mesh: one face of the tetrahedron missing.
    const auto t = regular_tetrahedron();
    std::vector<std::vector<int>> faces = t.faces();
    faces.pop_back();
    CHECK_THROWS_AS(ConvexPolyhedron(t.vertices(), faces), Error);
    // Inconsistent orientation.
    faces = t.faces();
    std::reverse(faces[0].begin(), faces[0].end());
    CHECK_THROWS_AS(ConvexPolyhedron(t.vertices(), faces), Error);
    CHECK_THROWS_AS(polyhedron_distance(t, 0, 7), Error);
  }

  TEST_CASE("doubled triangle area is 1/q") {
    CHECK(doubled_triangle_area(kPi / 2, kPi / 2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(doubled_triangle_area(2 * kPi / 3, 2 * kPi / 3) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
    std::mt19937_64 rng(12);
    const auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 100; ++trial) {
      const double p1 = 0.05 + (kTwoPi - 0.1) * u();
      const double p2 = 0.05 + (kTwoPi - 0.1 - p1) * u();
      const double area = doubled_triangle_area(p1, p2);
      CHECK(std::abs(area * q_factor(p1, p2) - 1.0) < 1e-12);
    }
    CHECK(kind_of([] { doubled_triangle_area(4.0, 3.0); }) == ErrorKind::DegenerateTriangle);
  }

  TEST_CASE("torus quotient invariants") {
    auto s = torus_invariants(cd(0, 1));
    CHECK(s.l == doctest::Approx(0.5));
    CHECK(s.area == doctest::Approx(0.5));
    CHECK(s.a == doctest::Approx(2.0));
    s = torus_invariants(cd(0, 2));
    CHECK(s.a == doctest::Approx(4.0));

    // Brute force over |m|, |n| <= 3.
    const cd tau(0.3, 1.7);
    double best = 1e300;
    for (int m = -3; m <= 3; ++m) {
      for (int n = -3; n <= 3; ++n) best = std::min(best, std::abs(0.5 + double(m) + double(n) * tau));
    }
    s = torus_quotient_invariants(TorusQuotient(tau));
    CHECK(s.l == doctest::Approx(best).epsilon(1e-15));
    CHECK(s.area == doctest::Approx(0.85));
    CHECK(s.a == doctest::Approx(s.area / (s.l * s.l)).epsilon(1e-12));

    CHECK_THROWS_AS(TorusQuotient(cd(0.3, 0.1)), Error);
    CHECK_THROWS_AS(TorusQuotient(cd(1.5, 2.0)), Error);
  }

  TEST_CASE("invariants are unchanged by the level-2 group") {
    const int gens[3][4] = {{1, 2, 0, 1}, {1, 0, 2, 1}, {3, 2, 4, 3}};
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const double x = 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
      const double y = 0.05 + 3.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const cd tau(x, y);
      if (std::abs(tau - 0.5) < 0.5 || std::abs(tau + 0.5) < 0.5) continue;
      const double a = torus_invariants(tau).a;
      for (const auto& g : gens) {
        const double a2 = torus_invariants(act(g[0], g[1], g[2], g[3], tau)).a;
        worst = std::max(worst, std::abs(a2 / a - 1.0));
      }
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("sampler records and determinism") {
    const SampleBatch b1 = sample_torus_quotient(5000, 42, 0.01);
    const SampleBatch b2 = sample_torus_quotient(5000, 42, 0.01, 3);
    CHECK(samples_to_csv(b1) == samples_to_csv(b2));
    for (const Sample& s : b1.samples) CHECK(std::abs(s.a - s.area / (s.l * s.l)) <= 1e-12 * s.a);
    CHECK(samples_to_csv(b1).rfind("l,area,a\n", 0) == 0);
    const auto side = samples_sidecar(b1);
    CHECK(side.at("seed") == 42);
    CHECK(side.at("n") == 5000);
    CHECK(side.at("epsilon") == 0.01);
    CHECK_THROWS_AS(sample_torus_quotient(10, 1, 0.1), Error);
    CHECK_THROWS_AS(sample_torus_quotient(0, 1, 0.01), Error);
    CHECK(truncation_bias_bound(0.01) == doctest::Approx(0.03 / kTwoPi));
  }

  TEST_CASE("sampler median length") {
    const SampleBatch batch = sample_torus_quotient(1000000, 1, 0.01);
    std::vector<double> l;
    for (const Sample& s : batch.samples) l.push_back(s.l / std::sqrt(s.area));
    std::nth_element(l.begin(), l.begin() + l.size() / 2, l.end());
    CHECK(l[l.size() / 2] == doctest::Approx(0.886).epsilon(0.005 / 0.886));
  }

  TEST_CASE("mesh JSON round trip and errors") {
    const auto pyramid = square_pyramid(0.3 * kPi);
    const auto doc = polyhedron_to_json(pyramid);
    CHECK(doc.at("format_version") == kPolyhedronFormat);
    const auto back = polyhedron_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.vertices() == pyramid.vertices());
    CHECK(back.faces() == pyramid.faces());

    const auto pentagon = regular_polygon(5);
    const auto pback = polygon_from_json(nlohmann::json::parse(polygon_to_json(pentagon).dump()));
    CHECK(pback.vertices() == pentagon.vertices());

    CHECK(kind_of([] { polyhedron_from_json(nlohmann::json{{"vertices", 3}}); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { polygon_from_json(nlohmann::json::array()); }) == ErrorKind::ParseError);
  }
}
