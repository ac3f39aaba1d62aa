#include <filesystem>

#include "doctest.h"
#include "flatcone/error.hpp"
#include "flatcone/measure_io.hpp"
#include "flatcone/recurrence.hpp"

using namespace flatcone;

TEST_SUITE("io") {
  TEST_CASE("measure JSON round trip is exact") {
    const auto f = density(validate_signature(2.0, 1.0, {1.2, 1.8}), SolverConfig{});
    const auto doc = measure_to_json(*f);
    CHECK(doc.at("format_version") == std::string(kMeasureFormat));
    const auto back = measure_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(back.density().breakpoints() == f->density().breakpoints());
    CHECK(back.density().cell_masses() == f->density().cell_masses());
    CHECK(back.total_mass() == f->total_mass());
    CHECK(measure_to_json(back).dump() == doc.dump());
  }

  TEST_CASE("tails survive the round trip") {
    const auto f = density(validate_signature(kPi, kPi, {kPi, kPi}), SolverConfig{});
    REQUIRE(f->density().tail().has_value());
    const auto back = measure_from_json(measure_to_json(*f));
    CHECK(back.density().tail() == f->density().tail());
    CHECK(back.total_mass() == f->total_mass());
  }

  TEST_CASE("CSV never carries atoms") {
    const auto atom = Measure1D::single_atom(0.5, 1.0);
    CHECK(measure_to_csv(atom) == "a,f\n");
    const auto side = measure_sidecar(atom);
    REQUIRE(side.at("atoms").size() == 1);
    CHECK(side.at("atoms")[0][0] == 0.5);

    const auto f = density(validate_signature(kPi, kPi, {kPi, kPi}), SolverConfig{});
    const std::string csv = measure_to_csv(*f);
    CHECK(csv.rfind("a,f\n", 0) == 0);
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(static_cast<std::size_t>(lines) == f->density().breakpoints().size() + 1);
  }

  TEST_CASE("malformed measure JSON") {
    const auto parse_kind = [](const nlohmann::json& doc) {
      try {
        measure_from_json(doc);
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::IoError;
    };
    CHECK(parse_kind({{"format_version", "other/1"}}) == ErrorKind::ParseError);
    CHECK(parse_kind({{"format_version", std::string(kMeasureFormat)}, {"atoms", 3}}) ==
          ErrorKind::ParseError);
  }

  TEST_CASE("atomic file writes") {
    const auto dir = std::filesystem::temp_directory_path() / "flatcone-io-test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "nested" / "x.txt";
    write_text_file(path, "hello\n");
    CHECK(read_text_file(path) == "hello\n");
    CHECK(!std::filesystem::exists(dir / "nested" / "x.txt.tmp"));
    CHECK_THROWS_AS(read_text_file(dir / "missing"), Error);
    std::filesystem::remove_all(dir);
  }
}
