#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "batchsom/codebook.hpp"
#include "batchsom/dataset.hpp"

namespace testsupport {

// Small seeded generator for property tests.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    float uniformf(float lo, float hi) { return static_cast<float>(uniform(lo, hi)); }
    // Inclusive on both ends.
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(n) - 1)); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
    std::uint32_t seed() { return static_cast<std::uint32_t>(engine_()); }

private:
    std::mt19937_64 engine_;
};

inline batchsom::DenseDataset random_dense(Rng& rng, std::size_t n, std::size_t d, float lo = 0.0f, float hi = 1.0f) {
    batchsom::DenseDataset out(n, d);
    for (float& v : out.values) {
        v = rng.uniformf(lo, hi);
    }
    return out;
}

// Dense matrix with roughly `density` of entries nonzero.
inline batchsom::DenseDataset random_sparse_dense(Rng& rng, std::size_t n, std::size_t d, double density) {
    batchsom::DenseDataset out(n, d);
    for (float& v : out.values) {
        if (rng.coin(density)) {
            v = rng.uniformf(-2.0f, 2.0f);
        }
    }
    return out;
}

// CSR copy of a dense matrix, keeping only nonzeros.
inline batchsom::SparseDataset sparsify(const batchsom::DenseDataset& dense) {
    batchsom::SparseDataset s;
    s.nVectors = dense.nVectors;
    s.nDimensions = dense.nDimensions;
    for (std::size_t i = 0; i < dense.nVectors; ++i) {
        for (std::size_t k = 0; k < dense.nDimensions; ++k) {
            const float v = dense.at(i, k);
            if (v != 0.0f) {
                s.colIndices.push_back(static_cast<std::uint32_t>(k));
                s.values.push_back(v);
            }
        }
        s.rowOffsets.push_back(s.colIndices.size());
    }
    return s;
}

inline batchsom::CodeBook random_codebook(Rng& rng, std::uint32_t cols, std::uint32_t rows, std::size_t d,
                                          float lo = 0.0f, float hi = 1.0f) {
    batchsom::CodeBook cb(cols, rows, d);
    for (float& w : cb.weights) {
        w = rng.uniformf(lo, hi);
    }
    return cb;
}

inline bool close_rel(double a, double b, double rel) {
    if (a == b) {
        return true;
    }
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// Largest elementwise relative difference; +inf on a length mismatch.
template <class A, class B>
double max_rel_diff(const A& a, const B& b) {
    if (a.size() != b.size()) {
        return INFINITY;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i];
        const double y = b[i];
        if (x == y) {
            continue;
        }
        worst = std::max(worst, std::abs(x - y) / std::max(std::abs(x), std::abs(y)));
    }
    return worst;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("batchsom_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace testsupport
