#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "nbavg/threading.hpp"

namespace nbavg::detail {

// Runs fn(i) for i in [0, n). Work is handed out in fixed chunks so results
// never depend on scheduling. The first exception thrown is rethrown.
// `worker_limit` of 0 means max_threads().
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 64, std::size_t worker_limit = 0) {
    grain = std::max<std::size_t>(grain, 1);
    const std::size_t limit = worker_limit == 0 ? max_threads() : worker_limit;
    const std::size_t workers = std::min(limit, (n + grain - 1) / grain);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(grain);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + grain);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace nbavg::detail
