#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace planeqc {

// Runs fn(i) for i in [0, n). Each item must be pure and write only its own
// output slot, so results are identical for any thread count; threads <= 1
// runs inline.
inline void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t workers = std::min<size_t>(static_cast<size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace planeqc
