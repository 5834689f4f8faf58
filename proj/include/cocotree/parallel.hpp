#pragma once

#include <cstddef>
#include <functional>

namespace cocotree {

// Runs fn(0..n-1) on up to `parallelism` threads (1 or n==0 stays on the
// calling thread). All indices are attempted; if any calls threw, the
// exception with the smallest index is rethrown after the join, so failure
// reporting does not depend on scheduling.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace cocotree
