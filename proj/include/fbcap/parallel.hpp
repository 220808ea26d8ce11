#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include "fbcap/common.hpp"

namespace fbcap {

/// Worker count resolution: FBCAP_WORKERS env var wins, then the requested
/// value, then 1.  Zero requests mean "hardware concurrency".
inline int resolve_workers(int requested) {
    if (const char* env = std::getenv("FBCAP_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    if (requested > 0) return requested;
    if (requested == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? static_cast<int>(hc) : 1;
    }
    return 1;
}

/// Runs body(i) for i in [0, n) across `workers` threads.  Work is
/// partitioned by index stride, each index sees only state derived from i,
/// and results must be written to slot i of a caller-owned buffer, so the
/// outcome is byte-identical for every worker count.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& body) {
    int w = resolve_workers(workers);
    if (w <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (static_cast<std::size_t>(w) > n) w = static_cast<int>(n);
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += static_cast<std::size_t>(w)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fbcap
