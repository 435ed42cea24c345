#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

// Replica sharding.  Work items are replica indices; every item writes only
// into its own preassigned slot, and aggregation happens afterwards in
// replica order on one thread.  Results are therefore bit-identical for any
// worker count, including 1.

namespace rwrs {

template <class Fn>
inline void for_each_replica(std::uint64_t replicas, unsigned workers, Fn&& fn) {
    if (workers <= 1 || replicas < 2) {
        for (std::uint64_t r = 0; r < replicas; ++r) fn(r);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const std::uint64_t r = next.fetch_add(1, std::memory_order_relaxed);
            if (r >= replicas) return;
            try {
                fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(replicas, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace rwrs
