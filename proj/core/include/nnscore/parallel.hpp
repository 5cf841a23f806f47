#pragma once

#include <cstddef>
#include <functional>

namespace nnscore {

/// Number of workers actually used for `requested` (0 = hardware default).
std::size_t resolve_thread_count(std::size_t requested);

/// Runs fn(i) for i in [0, count) across `threads` workers. Items are
/// claimed from a shared atomic counter; callers must make fn(i) depend
/// only on i (per-item output slots, per-item derived RNG streams) so the
/// result is identical for every thread count. Exceptions from fn are
/// captured and rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace nnscore
