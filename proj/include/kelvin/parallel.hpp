#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kelvin {

// Runs fn(i) for i in [0, n). With parallel=true the index range is split
// across hardware threads; each index writes only its own slot, so results
// are identical to the sequential run. The first exception thrown by any
// index is rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         bool parallel = false) {
    if (!parallel || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t n_threads = std::min<std::size_t>(hw == 0 ? 4 : hw, n);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += n_threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Pairwise tree reduction. The summation order depends only on the number of
// terms, never on thread scheduling, so accumulated results are bit-stable.
template <typename T, typename Op>
T tree_reduce(std::vector<T> terms, Op op, T zero) {
    if (terms.empty()) return zero;
    while (terms.size() > 1) {
        std::size_t half = (terms.size() + 1) / 2;
        std::vector<T> next;
        next.reserve(half);
        for (std::size_t i = 0; i + 1 < terms.size(); i += 2)
            next.push_back(op(terms[i], terms[i + 1]));
        if (terms.size() % 2 == 1) next.push_back(terms.back());
        terms = std::move(next);
    }
    return terms.front();
}

}  // namespace kelvin
