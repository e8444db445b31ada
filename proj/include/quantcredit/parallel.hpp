#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace quantcredit {

/// Resolves a requested worker count; 0 means "all hardware threads".
inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Splits [0, n) into fixed chunks of `chunk` items and runs
/// `fn(chunk_index, begin, end)` for each, spread across `workers` threads.
/// Chunk boundaries depend only on n and chunk, so a caller that stores one
/// partial result per chunk and reduces them in chunk order gets the same
/// answer for any worker count.
template <class Fn>
void for_each_chunk(std::size_t n, std::size_t chunk, unsigned workers, Fn&& fn) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), chunks));

    auto run = [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        fn(c, begin, std::min(n, begin + chunk));
    };
    if (threads <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
                try {
                    run(c);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = chunks;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk) {
    return n == 0 ? 0 : (n + chunk - 1) / chunk;
}

}  // namespace quantcredit
