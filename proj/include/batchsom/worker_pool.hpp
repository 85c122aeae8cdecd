#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace batchsom {

/// Fixed-size pool of threads that execute one data-parallel loop at a time.
/// The calling thread takes part as worker 0, so a pool of size 1 spawns no
/// threads at all.
///
/// Iterations are split into contiguous static ranges per worker. Callers
/// that need results independent of the worker count must make each
/// iteration write only its own outputs.
class WorkerPool {
public:
    /// `workers == 0` selects the hardware concurrency.
    explicit WorkerPool(std::size_t workers = 0);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    std::size_t size() const noexcept { return size_; }

    /// Runs `body(begin, end, worker)` over a partition of [0, count) and
    /// blocks until every range is done. The first exception thrown by any
    /// worker is rethrown here.
    void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

    /// `body(i)` for every i in [0, count).
    template <class F>
    void for_each(std::size_t count, F&& f) {
        parallel_for(count, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i) {
                f(i);
            }
        });
    }

    static std::size_t hardware_workers() noexcept;

private:
    void thread_main(std::size_t worker);
    void run_range(std::size_t worker);

    std::size_t size_;
    std::vector<std::thread> threads_;

    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stopping_ = false;

    std::size_t count_ = 0;
    const std::function<void(std::size_t, std::size_t, std::size_t)>* body_ = nullptr;
    std::exception_ptr error_;
};

}  // namespace batchsom
