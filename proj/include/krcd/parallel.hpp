#pragma once

#include <cstddef>
#include <functional>

namespace krcd {

/// Worker count used by internal loops. Defaults to the hardware
/// concurrency capped by the KRCD_THREADS environment variable.
int thread_count();

/// Overrides the worker count for the whole process (0 restores the default).
void set_thread_count(int threads);

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks write to
/// disjoint outputs, so results do not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  int threads = 0);

}  // namespace krcd
