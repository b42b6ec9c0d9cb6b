#pragma once

#include <functional>

namespace garment {

/// Process-wide worker count for row-parallel kernels. Every kernel that uses it writes
/// disjoint outputs per index, so results do not depend on the count.
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for i in [begin, end), split into contiguous blocks across workers.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

}  // namespace garment
