#include "batchsom/worker_pool.hpp"

#include <algorithm>

namespace batchsom {

std::size_t WorkerPool::hardware_workers() noexcept {
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

WorkerPool::WorkerPool(std::size_t workers) : size_(workers == 0 ? hardware_workers() : workers) {
    threads_.reserve(size_ - 1);
    for (std::size_t w = 1; w < size_; ++w) {
        threads_.emplace_back([this, w] { thread_main(w); });
    }
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) {
        t.join();
    }
}

void WorkerPool::run_range(std::size_t worker) {
    const std::size_t begin = count_ * worker / size_;
    const std::size_t end = count_ * (worker + 1) / size_;
    if (begin == end) {
        return;
    }
    try {
        (*body_)(begin, end, worker);
    } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) {
            error_ = std::current_exception();
        }
    }
}

void WorkerPool::thread_main(std::size_t worker) {
    std::size_t seen = 0;
    while (true) {
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) {
                return;
            }
            seen = generation_;
        }
        run_range(worker);
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) {
                done_cv_.notify_one();
            }
        }
    }
}

void WorkerPool::parallel_for(std::size_t count,
                              const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (count == 0) {
        return;
    }
    if (size_ == 1) {
        body(0, count, 0);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        count_ = count;
        body_ = &body;
        error_ = nullptr;
        pending_ = size_ - 1;
        ++generation_;
    }
    start_cv_.notify_all();
    run_range(0);
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [&] { return pending_ == 0; });
        body_ = nullptr;
        error = error_;
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace batchsom
