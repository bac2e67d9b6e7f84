#pragma once

#include <cstddef>
#include <functional>

namespace distq {

/// Worker count used by internally parallel operations. Defaults to 1.
std::size_t thread_count();

/// 0 selects std::thread::hardware_concurrency().
void set_thread_count(std::size_t n);

/// Runs fn(i) for every i in [0, n). Callers write results into slot i so
/// output never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace distq
