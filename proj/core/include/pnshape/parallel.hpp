#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace pnshape {

/// 0 means "all hardware threads".
inline unsigned resolve_workers(unsigned requested) noexcept {
    if (requested != 0)
        return requested;
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Run fn(task) for task in [0, n_tasks) on up to `workers` threads.
/// Tasks must write to disjoint outputs; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n_tasks, unsigned workers, Fn&& fn) {
    const std::size_t n_threads = std::min<std::size_t>(resolve_workers(workers), n_tasks);
    if (n_threads <= 1) {
        for (std::size_t t = 0; t < n_tasks; ++t)
            fn(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1, std::memory_order_relaxed);
            if (t >= n_tasks)
                return;
            try {
                fn(t);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next.store(n_tasks);
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(n_threads - 1);
    for (std::size_t i = 1; i < n_threads; ++i)
        pool.emplace_back(run);
    run();
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

/// Pairwise summation in index order; result is independent of worker count.
inline double pairwise_sum(std::span<const double> v) noexcept {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

inline std::size_t block_count(std::size_t n, std::size_t block) noexcept { return (n + block - 1) / block; }

} // namespace pnshape
