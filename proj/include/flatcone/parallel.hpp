#pragma once

#include <cstddef>
#include <functional>

namespace flatcone {

/// Runs body(0..count-1) on up to `workers` threads. Nested calls run
/// serially on the calling thread. The exception thrown for the lowest index
/// is rethrown, so failures are reported deterministically.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace flatcone
