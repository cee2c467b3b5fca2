#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace mink {

int default_threads();
void set_default_threads(int n);

// Runs body(i) for i in [0, count) on up to `threads` workers using static
// contiguous blocks. The first exception thrown is rethrown on the caller.
template <class Body>
void parallel_for(long count, Body&& body, int threads = 0) {
    if (threads <= 0) threads = default_threads();
    threads = static_cast<int>(std::min<long>(threads, std::max<long>(count, 1)));
    if (threads <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    const long chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const long lo = t * chunk, hi = std::min(count, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            try {
                for (long i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent stream per (seed, stream, index) so results do not depend on scheduling.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(stream * 0x100000001B3ull + 1));
    s = splitmix64(s ^ index);
    return std::mt19937_64(s);
}

}  // namespace mink
