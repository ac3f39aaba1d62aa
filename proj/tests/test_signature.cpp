#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "flatcone/error.hpp"
#include "flatcone/signature.hpp"

using namespace flatcone;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

Split split_of(std::vector<int> hat, std::vector<int> tilde) { return {std::move(hat), std::move(tilde)}; }

}  // namespace

TEST_SUITE("signature") {
  TEST_CASE("validate_signature accepts Gauss-Bonnet data") {
    const auto sig = validate_signature(kPi, kPi, {kPi, kPi});
    CHECK(sig.arity() == 2);
    CHECK(validate_signature(kPi / 2, kPi / 2, {kPi}).arity() == 1);
  }

  TEST_CASE("validate_signature rejects bad data") {
    CHECK(kind_of([] { validate_signature(kPi, kPi, {kPi, kPi / 2}); }) ==
          ErrorKind::GaussBonnetViolation);
    CHECK(kind_of([] { validate_signature(kPi, kPi, {}); }) == ErrorKind::EmptyAlpha);
    CHECK(kind_of([] { validate_signature(3 * kPi, kPi, {2 * kPi, 2 * kPi}); }) ==
          ErrorKind::DefectOutOfRange);
    CHECK(kind_of([] { validate_signature(-1.0, 2.0, {1.0}); }) == ErrorKind::DefectOutOfRange);
  }

  TEST_CASE("Gauss-Bonnet check ignores the order of alpha") {
    std::vector<double> alpha{0.1, 1.7, 2.3, 0.3};
    double sum = 0.0;
    for (double a : alpha) sum += a;
    const double phi1 = 1.0;
    const auto a = validate_signature(phi1, sum - phi1, alpha);
    std::reverse(alpha.begin(), alpha.end());
    CHECK_NOTHROW(validate_signature(phi1, sum - phi1, alpha));
    CHECK(a.arity() == 4);
  }

  TEST_CASE("q_factor values") {
    CHECK(q_factor(kPi, kPi) == 0.0);
    CHECK(q_factor(kPi / 2, kPi / 2) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(q_factor(2 * kPi / 3, 2 * kPi / 3) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(kind_of([] { q_factor(kTwoPi, 1.0); }) == ErrorKind::PoleAtMultipleOf2Pi);
    CHECK(kind_of([] { q_factor(1.0, 0.0); }) == ErrorKind::PoleAtMultipleOf2Pi);
  }

  TEST_CASE("q_factor sign follows phi1 + phi2 against 2 pi") {
    for (int i = 1; i < 40; ++i) {
      for (int j = 1; j < 40; ++j) {
        const double p1 = kTwoPi * i / 40.0;
        const double p2 = kTwoPi * j / 40.0;
        if (i + j == 40) {
          CHECK(std::abs(q_factor(p1, p2)) < 1e-12);
        } else {
          CHECK((q_factor(p1, p2) > 0.0) == (i + j < 40));
        }
      }
    }
  }

  TEST_CASE("enumerate_splits counts 2^n - 2 distinct splits") {
    for (int n = 1; n <= 10; ++n) {
      std::vector<double> alpha(static_cast<std::size_t>(n), 0.5);
      const auto sig = validate_signature(0.25 * n, 0.25 * n, alpha);
      const auto splits = enumerate_splits(sig);
      CHECK(splits.size() == (std::size_t{1} << n) - 2);
      std::set<std::vector<int>> seen;
      for (const Split& s : splits) {
        CHECK(!s.hat_indices.empty());
        CHECK(!s.tilde_indices.empty());
        CHECK(s.hat_indices.size() + s.tilde_indices.size() == static_cast<std::size_t>(n));
        CHECK(std::is_sorted(s.hat_indices.begin(), s.hat_indices.end()));
        seen.insert(s.hat_indices);
      }
      CHECK(seen.size() == splits.size());
    }
  }

  TEST_CASE("beta_interval is the positivity domain") {
    const auto anchor = validate_signature(kPi, kPi, {kPi, kPi});
    auto iv = beta_interval(anchor, split_of({0}, {1}));
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == doctest::Approx(kPi));

    const double d = 4 * kPi / 5;
    const auto five = validate_signature(6 * kPi / 5, 6 * kPi / 5, {d, d, d});
    iv = beta_interval(five, split_of({0}, {1, 2}));
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == doctest::Approx(d));

    const auto skew = validate_signature(3.9, 0.1, {2.0, 2.0});
    iv = beta_interval(skew, split_of({0}, {1}));
    CHECK(iv.lo == doctest::Approx(1.9));
    CHECK(iv.hi == doctest::Approx(2.0));
  }

  TEST_CASE("sub_signatures arithmetic") {
    const auto anchor = validate_signature(kPi, kPi, {kPi, kPi});
    const Split s = split_of({0}, {1});
    auto pair = sub_signatures(anchor, s, kPi / 2);
    CHECK(pair.hat.phi1() == doctest::Approx(kPi / 2));
    CHECK(pair.hat.phi2() == doctest::Approx(kPi / 2));
    CHECK(pair.tilde.phi1() == doctest::Approx(kPi / 2));
    CHECK(pair.tilde.phi2() == doctest::Approx(kPi / 2));

    pair = sub_signatures(anchor, s, kPi / 4);
    CHECK(pair.hat.phi2() == doctest::Approx(3 * kPi / 4));
    CHECK(pair.tilde.phi1() == doctest::Approx(3 * kPi / 4));
    CHECK(pair.tilde.phi2() == doctest::Approx(kPi / 4));

    const double d = 4 * kPi / 5;
    const auto five = validate_signature(6 * kPi / 5, 6 * kPi / 5, {d, d, d});
    pair = sub_signatures(five, split_of({0}, {1, 2}), 2 * kPi / 5);
    CHECK(pair.hat.phi1() == doctest::Approx(2 * kPi / 5));
    CHECK(pair.hat.phi2() == doctest::Approx(2 * kPi / 5));
    CHECK(pair.tilde.phi1() == doctest::Approx(d));
    CHECK(pair.tilde.phi2() == doctest::Approx(d));
    CHECK(pair.tilde.arity() == 2);

    CHECK(kind_of([&] { sub_signatures(anchor, s, kPi); }) == ErrorKind::BetaOutOfInterval);
  }

  TEST_CASE("kappa on the anchor is 4 / sin beta") {
    const auto anchor = validate_signature(kPi, kPi, {kPi, kPi});
    const Split s = split_of({0}, {1});
    CHECK(kappa(anchor, s, kPi / 2) == doctest::Approx(4.0).epsilon(1e-14));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
      const double beta = 0.01 + (kPi - 0.02) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
      CHECK(kappa(anchor, s, beta) == doctest::Approx(4.0 / std::sin(beta)).epsilon(1e-12));
    }
    CHECK(kappa(anchor, s, 1e-3) > kappa(anchor, s, 1e-2));
    CHECK(kind_of([&] { kappa(anchor, s, 0.0); }) == ErrorKind::BetaOutOfInterval);
  }

  TEST_CASE("kappa symmetry under reversed split") {
    std::mt19937_64 rng(5);
    const auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    int checked = 0;
    while (checked < 100) {
      const int n = 2 + static_cast<int>(rng() % 3);
      std::vector<double> alpha;
      double sum = 0.0;
      for (int k = 0; k < n; ++k) sum += alpha.emplace_back(0.2 + 5.0 * u());
      const double phi1 = sum * (0.1 + 0.8 * u());
      const double phi2 = sum - phi1;
      if (phi1 >= 2 * kTwoPi || phi2 >= 2 * kTwoPi) continue;
      const auto sig = validate_signature(phi1, phi2, alpha);
      const auto splits = enumerate_splits(sig);
      const Split& s = splits[rng() % splits.size()];
      const auto iv = beta_interval(sig, s);
      const double beta = iv.lo + iv.width() * (0.05 + 0.9 * u());
      const double k1 = kappa(sig, s, beta);
      const double k2 = kappa(sig, s.reversed(), phi1 - beta);
      CHECK(k1 == doctest::Approx(k2).epsilon(1e-9));
      ++checked;
    }
  }

  TEST_CASE("parse_angle forms") {
    CHECK(parse_angle("pi") == doctest::Approx(kPi));
    CHECK(parse_angle("6pi/5") == doctest::Approx(6 * kPi / 5));
    CHECK(parse_angle("pi/2") == doctest::Approx(kPi / 2));
    CHECK(parse_angle("1.25") == 1.25);
    const auto list = parse_angle_list("4pi/5,4pi/5,4pi/5");
    CHECK(list.size() == 3);
    CHECK_THROWS_AS(parse_angle("pie"), Error);
    CHECK_THROWS_AS(parse_angle(""), Error);
  }
}
