#include "flatcone/cache.hpp"

#include <cstdio>

#include "flatcone/measure_io.hpp"
#include "flatcone/version.hpp"

namespace flatcone {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

json cache_descriptor(const AngleSignature& sig, const SolverConfig& config) {
  return {{"signature", {{"phi1", sig.phi1()}, {"phi2", sig.phi2()}, {"alpha", sig.alpha()}}},
          {"config",
           {{"beta_nodes", config.beta_nodes},
            {"grid_cells", config.grid_cells},
            {"grading_ratio", config.grading_ratio},
            {"calibration_constant", config.calibration_constant},
            {"ode_tolerance", config.ode_tolerance},
            {"max_arity", config.max_arity}}},
          {"code_version", std::string(kCodeVersion)}};
}

std::filesystem::path cache_path(const std::filesystem::path& dir, const json& descriptor) {
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json",
                static_cast<unsigned long long>(fnv1a64(descriptor.dump())));
  return dir / name;
}

std::optional<Measure1D> cache_load(const std::filesystem::path& dir, const json& descriptor) {
  const auto path = cache_path(dir, descriptor);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const json doc = json::parse(read_text_file(path));
    if (doc.at("descriptor") != descriptor) return std::nullopt;
    Measure1D f = measure_from_json(doc.at("measure"));
    const double stored = doc.at("measure").at("total_mass").get<double>();
    if (std::abs(f.total_mass() - stored) > 1e-12 * std::max(1.0, std::abs(stored))) {
      return std::nullopt;
    }
    return f;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entries are recomputed
  }
}

void cache_store(const std::filesystem::path& dir, const json& descriptor, const Measure1D& f) {
  const json doc = {{"descriptor", descriptor}, {"measure", measure_to_json(f)}};
  write_text_file(cache_path(dir, descriptor), doc.dump());
}

}  // namespace flatcone
