#pragma once

#include <cstddef>

namespace nbavg {

/// Upper bound on worker threads used inside library calls (graph building,
/// per-object scoring). 0 restores the default of hardware_concurrency().
void set_max_threads(std::size_t n) noexcept;
std::size_t max_threads() noexcept;

}  // namespace nbavg
