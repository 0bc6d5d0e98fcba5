#ifndef ISB_PARALLEL_HPP
#define ISB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace isb {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out in
/// small chunks; results must be written to per-index slots so the outcome
/// does not depend on scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn, std::size_t chunk = 1) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || n <= chunk) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n)
                return;
            try {
                for (std::size_t i = begin; i < std::min(n, begin + chunk); ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t threads = std::min<std::size_t>(jobs, (n + chunk - 1) / chunk);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace isb

#endif
