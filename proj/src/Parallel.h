#ifndef MDIMPUTE_PARALLEL_H
#define MDIMPUTE_PARALLEL_H

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mdi {

namespace detail {
inline std::atomic<int> gThreadCount{1};
// Set inside worker threads so nested parallel regions degrade to plain
// loops instead of oversubscribing.
inline thread_local bool gInParallelRegion = false;
}

// Global worker count for the parallel regions (forest growing, per-row
// imputation). Results are independent of this value because every unit of
// work owns a pre-derived seed and writes a disjoint output slot.
inline int threadCount() { return detail::gThreadCount.load(); }
inline void setThreadCount(int threads) { detail::gThreadCount.store(std::max(1, threads)); }

// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop.
template <class Fn>
void parallelFor(size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    if (threads <= 1 || n == 1 || detail::gInParallelRegion) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
    std::atomic<size_t> next{0};
    std::exception_ptr firstError = nullptr;
    std::mutex errorMutex;
    auto body = [&] {
        detail::gInParallelRegion = true;
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(errorMutex);
                if (!firstError) firstError = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (firstError) std::rethrow_exception(firstError);
}

template <class Fn>
void parallelFor(size_t n, Fn&& fn) {
    parallelFor(n, threadCount(), std::forward<Fn>(fn));
}

}  // namespace mdi

#endif
