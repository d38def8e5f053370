#include "kvn/common.hpp"

#include <algorithm>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace kvn {

namespace {
int g_workers = 1;

// Chunk size for deterministic reductions. Fixed so that the partial-sum
// tree does not depend on the worker count.
constexpr std::size_t kReduceChunk = 4096;
}  // namespace

void set_worker_count(int n) { g_workers = std::max(1, n); }

int worker_count() { return g_workers; }

void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const int workers = std::min<std::size_t>(g_workers, n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t step = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t b = std::min(n, w * step);
        const std::size_t e = std::min(n, b + step);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& chunk_sum) {
    if (n == 0) return 0.0;
    const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_for(n_chunks, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            const std::size_t b = c * kReduceChunk;
            partial[c] = chunk_sum(b, std::min(n, b + kReduceChunk));
        }
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

cplx parallel_sum_cplx(std::size_t n, const std::function<cplx(std::size_t, std::size_t)>& chunk_sum) {
    if (n == 0) return {};
    const std::size_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<cplx> partial(n_chunks, cplx{});
    parallel_for(n_chunks, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            const std::size_t b = c * kReduceChunk;
            partial[c] = chunk_sum(b, std::min(n, b + kReduceChunk));
        }
    });
    cplx total{};
    for (const cplx& p : partial) total += p;
    return total;
}

}  // namespace kvn
