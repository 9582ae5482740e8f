#pragma once

#include <cstddef>
#include <functional>

namespace intimacy {

// Process-wide worker count used when a caller passes threads == 0.
void set_default_threads(std::size_t threads);
std::size_t default_threads();

// Runs fn(i) for i in [0, count). Work is claimed dynamically, so fn must
// write only to slots owned by i. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

}  // namespace intimacy
