#ifndef GCDR_PARALLEL_HPP
#define GCDR_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

/**
 * @file parallel.hpp
 *
 * @brief Row-block parallelism with a process-wide worker cap.
 *
 * Work is split into contiguous index blocks, and callers write into
 * per-index slots. Reductions happen afterwards in index order on the calling
 * thread, so results never depend on the worker count.
 */

namespace gcdr {

namespace detail {
inline std::atomic<int>& thread_cap() {
    static std::atomic<int> cap{1};
    return cap;
}
} // namespace detail

/// Set the maximum number of workers used by `parallel_for`. Values below 1 are clamped.
inline void set_num_threads(int n) { detail::thread_cap().store(std::max(1, n)); }

inline int num_threads() { return detail::thread_cap().load(); }

/**
 * Run `fn(i)` for every `i` in `[0, n)`. Each index is visited exactly once;
 * the first exception thrown by any worker is rethrown on the caller.
 */
template<class Function>
void parallel_for(std::size_t n, Function&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(num_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;

    auto run_block = [&](std::size_t w) {
        const std::size_t start = w * chunk;
        const std::size_t end = std::min(n, start + chunk);
        try {
            for (std::size_t i = start; i < end; ++i) {
                fn(i);
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(run_block, w);
    }
    run_block(0);
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace gcdr

#endif
