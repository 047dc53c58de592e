#pragma once

#include <cstddef>
#include <functional>

namespace weakkam {

// Worker count: WEAKKAM_THREADS if set and positive, otherwise the hardware concurrency.
[[nodiscard]] std::size_t worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads. Each index is visited
// exactly once, so results written per index are independent of scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace weakkam
