#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pdmesh {

// Packs an ordered integer pair into one key for hash-map lookups.
inline std::uint64_t pack_pair(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(b));
}

// Thread cap for internal per-element loops, read once from PDMESH_THREADS.
// Defaults to 1 (fully sequential).
inline int max_threads() {
    static const int cached = [] {
        const char* env = std::getenv("PDMESH_THREADS");
        if (env == nullptr) return 1;
        int n = std::atoi(env);
        return n < 1 ? 1 : n;
    }();
    return cached;
}

// Chunked parallel loop over [0, n). Each index must write only its own
// output slot so results are bit-identical to the sequential order.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int threads = max_threads();
    if (threads <= 1 || n < 4096) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace pdmesh
