#pragma once

#include <cstddef>
#include <functional>

namespace semiclass {

// Worker count used by parallel_for; 0 selects hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs f(i) for i in [0, n) over the worker count.  Exceptions from workers
// are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace semiclass
