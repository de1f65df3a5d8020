#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace qdep {

// Runs fn(index) for index in [0, total) across the given number of worker
// threads. Each index is processed exactly once and results must be written
// to per-index slots by the caller, so the outcome is independent of the
// worker count and of scheduling. Exceptions are collected and the first
// one rethrown after all workers join.
inline void parallel_for(std::size_t total, int workers,
                         const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || total <= 1) {
        for (std::size_t i = 0; i < total; ++i) fn(i);
        return;
    }
    const int nw = static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(workers), total));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nw));
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&, w]() {
            try {
                // Static block partition: worker w owns [lo, hi).
                const std::size_t lo = total * static_cast<std::size_t>(w) /
                                       static_cast<std::size_t>(nw);
                const std::size_t hi = total * (static_cast<std::size_t>(w) + 1) /
                                       static_cast<std::size_t>(nw);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace qdep
