#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace optiseq {

/// Wall-clock span of a batch of calls: first call start to last call
/// end, so thread spawn overhead before the first call does not count.
class CallSpan {
  public:
    void record(std::chrono::steady_clock::time_point start,
                std::chrono::steady_clock::time_point end) {
        auto s = start.time_since_epoch().count();
        auto e = end.time_since_epoch().count();
        std::int64_t prev = min_start_.load(std::memory_order_relaxed);
        while (s < prev && !min_start_.compare_exchange_weak(prev, s)) {}
        prev = max_end_.load(std::memory_order_relaxed);
        while (e > prev && !max_end_.compare_exchange_weak(prev, e)) {}
    }

    double millis() const {
        std::int64_t s = min_start_.load();
        std::int64_t e = max_end_.load();
        if (e <= s) return 0.0;
        using period = std::chrono::steady_clock::period;
        return static_cast<double>(e - s) * period::num * 1000.0 / period::den;
    }

  private:
    std::atomic<std::int64_t> min_start_{std::numeric_limits<std::int64_t>::max()};
    std::atomic<std::int64_t> max_end_{std::numeric_limits<std::int64_t>::min()};
};

/// Runs fn(0..n-1) on up to `parallelism` threads. Results must be stored
/// by index inside fn, so completion order cannot affect the outcome. The
/// first exception wins and is rethrown after the pool drains.
template <class Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
    if (n == 0) return;
    if (parallelism <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> cancelled{false};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&] {
        while (!cancelled.load(std::memory_order_relaxed)) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                }
                cancelled.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// parallel_for with per-call span tracking.
template <class Fn>
double timed_parallel_for(std::size_t n, int parallelism, Fn&& fn) {
    CallSpan span;
    parallel_for(n, parallelism, [&](std::size_t i) {
        auto start = std::chrono::steady_clock::now();
        fn(i);
        span.record(start, std::chrono::steady_clock::now());
    });
    return n == 0 ? 0.0 : span.millis();
}

} // namespace optiseq
