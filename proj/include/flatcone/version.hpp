#pragma once

#include <string_view>

namespace flatcone {

/// Bumped whenever numerical output changes; part of every cache key.
inline constexpr std::string_view kCodeVersion = "flatcone 1.0.0";

}  // namespace flatcone
