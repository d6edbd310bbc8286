#pragma once

#include <cstddef>
#include <functional>

namespace laxol {

// Process-wide worker cap for the block-level parallel loops. Results are
// written to per-index slots and reduced in fixed order afterwards, so the
// outcome is bit-identical for any thread count.
int max_threads();
void set_max_threads(int n);

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace laxol
