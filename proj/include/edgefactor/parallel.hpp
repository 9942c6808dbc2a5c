#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace edgefactor {

inline int resolve_workers(int requested) {
    if (requested > 0)
        return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

// Splits [0, n) into one contiguous chunk per worker and runs
// fn(worker_index, begin, end) on each. Worker 0 runs on the calling thread.
inline void parallel_chunks(std::size_t n, int workers,
                            const std::function<void(int, std::size_t, std::size_t)>& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 2) {
        fn(0, 0, n);
        return;
    }
    std::size_t chunk = (n + std::size_t(workers) - 1) / std::size_t(workers);
    std::vector<std::thread> threads;
    for (int w = 1; w < workers; ++w) {
        std::size_t begin = std::size_t(w) * chunk;
        if (begin >= n)
            break;
        std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back(fn, w, begin, end);
    }
    fn(0, 0, std::min(n, chunk));
    for (auto& t : threads)
        t.join();
}

} // namespace edgefactor
