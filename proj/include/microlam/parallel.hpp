#pragma once

#include <cstddef>
#include <functional>

namespace microlam {

// Worker count: MICROLAM_THREADS if set and positive, else hardware concurrency.
int thread_count();

// Splits [0, n) into contiguous chunks and runs body(begin, end) on worker threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Runs task(i) for i in [0, n) on up to thread_count() workers pulling from a shared counter.
void parallel_tasks(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace microlam
