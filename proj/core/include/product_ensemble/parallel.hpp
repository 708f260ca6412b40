#pragma once

#include <cstddef>
#include <functional>

namespace pe {

/// Worker cap: PRODUCT_ENSEMBLE_THREADS when set to a positive integer, else the hardware count.
int max_threads();

/// Runs body(i) for i in [0, count) on the worker pool. Iterations must be independent.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pe
