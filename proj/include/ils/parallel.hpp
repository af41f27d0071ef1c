// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace ils {

// Process-wide cap on worker threads. Every parallel loop in the library
// writes into pre-assigned output slots, so results never depend on it.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Calls fn(i) for i in [0, n), spread over thread_count() workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ils
