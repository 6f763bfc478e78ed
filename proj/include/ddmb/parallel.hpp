#pragma once

#include <cstddef>
#include <functional>

namespace ddmb {

/// Worker count used when a caller passes 0.
std::size_t default_threads();

/// Splits [0, count) into contiguous chunks and runs body(begin, end) on up
/// to `threads` workers (0 = default). Exceptions from workers are rethrown
/// in the caller. Callers write results by index, so the outcome does not
/// depend on the number of workers.
void parallel_for_chunks(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ddmb
