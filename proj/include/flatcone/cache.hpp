#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "flatcone/measure.hpp"
#include "flatcone/recurrence.hpp"
#include "json.hpp"

namespace flatcone {

std::uint64_t fnv1a64(std::string_view bytes);

/// Canonical description of a computation: signature, solver settings, code version.
nlohmann::json cache_descriptor(const AngleSignature& sig, const SolverConfig& config);

std::filesystem::path cache_path(const std::filesystem::path& dir, const nlohmann::json& descriptor);

/// Cached density if present, matching and mass-consistent.
std::optional<Measure1D> cache_load(const std::filesystem::path& dir,
                                    const nlohmann::json& descriptor);

void cache_store(const std::filesystem::path& dir, const nlohmann::json& descriptor,
                 const Measure1D& f);

}  // namespace flatcone
