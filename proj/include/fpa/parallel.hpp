#ifndef FPA_PARALLEL_HPP
#define FPA_PARALLEL_HPP

#include <thread>
#include <vector>

namespace fpa {

// Static range split over plain threads. fn(begin, end) must only touch its
// own slice; with threads <= 1 it runs inline.
template <typename F>
void parallel_for(int n, int threads, F&& fn) {
    if (threads <= 1 || n < 2 * threads) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int b = t * chunk;
        const int e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fpa

#endif
