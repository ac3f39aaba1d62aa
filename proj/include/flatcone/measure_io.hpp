#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "flatcone/measure.hpp"
#include "json.hpp"

namespace flatcone {

inline constexpr std::string_view kMeasureFormat = "flatcone-measure/1";

nlohmann::json measure_to_json(const Measure1D& mu);
Measure1D measure_from_json(const nlohmann::json& doc);

/// Breakpoint samples of the density part only; atoms never appear here.
std::string measure_to_csv(const Measure1D& mu, std::string_view header = "a,f");

/// Atoms (and tail) for the CSV sidecar.
nlohmann::json measure_sidecar(const Measure1D& mu);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace flatcone
