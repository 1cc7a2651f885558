#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ems {

/// Worker count for contingency/candidate sweeps; EMS_CTS_THREADS caps it.
inline int sweep_threads() {
    int n = (int)std::thread::hardware_concurrency();
    if (n < 1) n = 1;
    if (const char* env = std::getenv("EMS_CTS_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1 && cap < n) n = cap;
    }
    return n;
}

/// Runs f(i) for i in [0, n) on the sweep pool. Each index writes only its own
/// result slot, so outputs stay deterministic regardless of scheduling.
template <typename F>
void parallel_for(int n, F&& f) {
    int workers = std::min(sweep_threads(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace ems
