#include "nbavg/threading.hpp"

#include <atomic>
#include <thread>

namespace nbavg {
namespace {
std::atomic<std::size_t> g_max_threads{0};
}

void set_max_threads(std::size_t n) noexcept { g_max_threads.store(n); }

std::size_t max_threads() noexcept {
    const std::size_t n = g_max_threads.load();
    if (n != 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace nbavg
