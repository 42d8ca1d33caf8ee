#pragma once

#include <cstddef>
#include <functional>

namespace stosc {

/// Runs body(0) .. body(count - 1) on up to `threads` workers. Work items are
/// claimed in index order; callers store results by index so output never
/// depends on scheduling. The first exception thrown by a body is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace stosc
