#ifndef XRAYPHG_THREADING_HPP
#define XRAYPHG_THREADING_HPP

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace xrayphg {

/// Thread cap: min(hardware, XRAYPHG_THREADS if set).
inline int max_threads() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("XRAYPHG_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

/// Deterministic data-parallel loop: index i is always processed by the
/// same strided assignment, so results are identical for any thread count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const int nthreads = std::min<std::size_t>(max_threads(), count ? count : 1);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mtx;
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += nthreads) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mtx);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace xrayphg

#endif
