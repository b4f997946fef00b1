#pragma once

#include <cstddef>
#include <functional>

namespace winterscan {

/// Worker cap for internal parallelism. Reads WINTERSCAN_THREADS once per
/// process; unset, zero or unparsable values fall back to the hardware
/// concurrency.
std::size_t thread_cap();

/// Runs fn(begin..end) split into contiguous index blocks across at most
/// thread_cap() workers. Blocks are fixed by the range alone, so results
/// written by index are identical regardless of worker count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace winterscan
