#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace parnoise {

/// Environment variable that overrides any requested thread count.
inline constexpr const char* kThreadsEnvVar = "PARNOISE_THREADS";

/// PARNOISE_THREADS if set and valid, else `requested`; 0 means hardware concurrency.
[[nodiscard]] int resolve_thread_count(int requested);

/**
 * Runs body(i) for i in [0, n) on up to `threads` workers. Each index is processed
 * exactly once; callers write results into slot i so the outcome does not depend on
 * scheduling. The first exception thrown by a body is rethrown after all workers join.
 */
template <class Body>
void parallel_for(std::size_t n, int threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace parnoise
