#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace zx {

/// Default worker count: available hardware threads, at least 1.
inline int default_workers() {
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

/// Calls f(i) for i in [0, n) on up to `workers` threads. Items are claimed dynamically, so f
/// must write only to per-item outputs. The first exception is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr       error;
    std::mutex               errorMutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    const std::lock_guard lock(errorMutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread& th: pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace zx
