#include <doctest.h>

#include <atomic>
#include <stdexcept>

#include "batchsom/worker_pool.hpp"

using namespace batchsom;

TEST_SUITE("worker_pool") {

TEST_CASE("every index visited exactly once") {
    for (std::size_t workers : {1, 2, 3, 8}) {
        WorkerPool pool(workers);
        CHECK(pool.size() == workers);
        for (std::size_t count : {0, 1, 5, 100, 1001}) {
            std::vector<std::atomic<int>> hits(count);
            pool.for_each(count, [&](std::size_t i) { hits[i]++; });
            for (auto& h : hits) {
                CHECK(h.load() == 1);
            }
        }
    }
}

TEST_CASE("ranges are contiguous and ordered by worker") {
    WorkerPool pool(4);
    std::vector<std::size_t> owner(10);
    pool.parallel_for(10, [&](std::size_t b, std::size_t e, std::size_t w) {
        for (std::size_t i = b; i < e; ++i) {
            owner[i] = w;
        }
    });
    CHECK(owner == std::vector<std::size_t>{0, 0, 1, 1, 1, 2, 2, 3, 3, 3});
}

TEST_CASE("exceptions propagate and the pool stays usable") {
    WorkerPool pool(3);
    CHECK_THROWS_AS(pool.for_each(30, [](std::size_t i) {
        if (i == 17) {
            throw std::runtime_error("boom");
        }
    }),
                    std::runtime_error);
    std::atomic<int> n{0};
    pool.for_each(30, [&](std::size_t) { n++; });
    CHECK(n == 30);
}

TEST_CASE("zero selects hardware concurrency") {
    WorkerPool pool(0);
    CHECK(pool.size() == WorkerPool::hardware_workers());
    CHECK(pool.size() >= 1);
}

}
