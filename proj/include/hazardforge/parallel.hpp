#pragma once

#include <cstddef>
#include <functional>

namespace hazardforge {

/// Worker count: HAZARDFORGE_THREADS if set and positive, else hardware.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Indices are split into contiguous blocks,
/// one per worker; callers keep results independent of the split by seeding
/// per index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hazardforge
