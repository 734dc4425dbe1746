#pragma once

#include <cstddef>
#include <functional>

namespace gevnet {

// Static-partition parallel loop. Each index must write only its own output
// slot; results are then identical for every thread count, which is what the
// seeded-determinism contract of the pipeline stages relies on.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace gevnet
