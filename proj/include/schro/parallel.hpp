#pragma once

#include <cstddef>
#include <functional>

namespace schro {

// Worker count used by parallel_for; 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned n) noexcept;
unsigned thread_count() noexcept;

// Runs body(i) for i in [0, n). Work is split into contiguous chunks so the
// assignment of indices to workers does not affect results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace schro
