#include "batchsom/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "batchsom/errors.hpp"
#include "batchsom/neighborhood.hpp"

namespace batchsom {

namespace {

constexpr std::size_t kLanes = 8;
constexpr double kUnitRoundoff = 0x1p-24;

/// Instances handled per scheduling unit in the naive and sparse searches.
constexpr std::size_t kSearchChunk = 64;

void check_dimensions(std::size_t dataDims, const CodeBook& cb) {
    if (dataDims != cb.nDimensions) {
        throw ShapeError(ShapeError::Kind::DimensionMismatch,
                         "data has " + std::to_string(dataDims) + " dimensions, codebook has " +
                             std::to_string(cb.nDimensions));
    }
}

/// Bound on |approximate - reference| for one (instance, node) pair, used to
/// decide which nodes need re-ranking. `gramCoeff` covers the approximate
/// route, the rest covers the lane-wise reference sum.
double rerank_margin(std::size_t dims, double gramCoeff, double xNorm, double wNorm) {
    const double referenceCoeff = static_cast<double>(dims) / kLanes + 16.0;
    const double s = xNorm + wNorm;
    return 2.0 * (referenceCoeff + gramCoeff) * kUnitRoundoff * s * s;
}

struct Winner {
    std::uint32_t node = 0;
    float sqDistance = 0.0f;
};

/// Picks the reference winner among nodes whose approximate distance could
/// still be minimal. `approx(j)` is the clamped approximation, `margin(j)`
/// its error bound, `exact(j)` the reference distance.
template <class Approx, class Margin, class Exact>
Winner rerank(std::size_t nodes, Approx&& approx, Margin&& margin, Exact&& exact) {
    double threshold = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nodes; ++j) {
        threshold = std::min(threshold, static_cast<double>(approx(j)) + margin(j));
    }
    Winner best;
    bool found = false;
    for (std::size_t j = 0; j < nodes; ++j) {
        if (static_cast<double>(approx(j)) - margin(j) > threshold) {
            continue;
        }
        const float d = exact(j);
        if (!found || d < best.sqDistance) {
            best = Winner{static_cast<std::uint32_t>(j), d};
            found = true;
        }
    }
    return best;
}

BmuSearchResult make_result(std::size_t n) {
    BmuSearchResult r;
    r.nodes.resize(n);
    r.sqDistances.resize(n);
    return r;
}

std::vector<double> dense_row_norms(const DenseView& data, std::size_t first, std::size_t count) {
    std::vector<double> norms(count);
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (float v : data.row(first + i)) {
            s += static_cast<double>(v) * v;
        }
        norms[i] = s;
    }
    return norms;
}

/// Float dot product accumulated from exact products in double, four lanes.
double gram_dot(std::span<const float> x, std::span<const float> w) noexcept {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n = x.size();
    const std::size_t body = n - n % 4;
    for (std::size_t k = 0; k < body; k += 4) {
        for (std::size_t l = 0; l < 4; ++l) {
            lane[l] += static_cast<double>(x[k + l]) * w[k + l];
        }
    }
    for (std::size_t k = body; k < n; ++k) {
        lane[k - body] += static_cast<double>(x[k]) * w[k];
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

BmuSearchResult find_bmus_blocked_impl(const DenseView& data, const CodeBook& cb, std::size_t blockSize,
                                       WorkerPool& pool, std::size_t* scratchElements) {
    check_dimensions(data.nDimensions, cb);
    if (blockSize == 0) {
        throw ConfigError("block size must be at least 1");
    }
    const std::size_t n = data.nVectors;
    const std::size_t nodes = cb.nodes();
    const std::size_t dims = cb.nDimensions;
    BmuSearchResult result = make_result(n);
    const std::vector<double> nodeNorms = node_squared_norms(cb);
    std::vector<double> nodeLengths(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        nodeLengths[j] = std::sqrt(nodeNorms[j]);
    }
    // The Gram dot accumulates exact float products in double.
    constexpr double gramCoeff = 4.0;

    const std::size_t blocks = (n + blockSize - 1) / blockSize;
    std::atomic<std::size_t> scratch{0};
    pool.parallel_for(blocks, [&](std::size_t begin, std::size_t end, std::size_t) {
        DistanceBlock block;
        for (std::size_t b = begin; b < end; ++b) {
            const std::size_t first = b * blockSize;
            const std::size_t count = std::min(blockSize, n - first);
            const DenseView rows = data.slice(first, count);
            compute_distance_block(rows, cb, nodeNorms, block);
            const std::vector<double> rowNorms = dense_row_norms(data, first, count);
            for (std::size_t i = 0; i < count; ++i) {
                const double xLength = std::sqrt(rowNorms[i]);
                const auto x = rows.row(i);
                const Winner w = rerank(
                    nodes, [&](std::size_t j) { return block.at(i, j); },
                    [&](std::size_t j) { return rerank_margin(dims, gramCoeff, xLength, nodeLengths[j]); },
                    [&](std::size_t j) { return squared_distance(x, cb.node(j)); });
                result.nodes[first + i] = w.node;
                result.sqDistances[first + i] = w.sqDistance;
            }
        }
        scratch.fetch_add(block.values.capacity());
    });
    if (scratchElements != nullptr) {
        *scratchElements += scratch.load() + nodes * 2;
    }
    return result;
}

BmuSearchResult find_bmus_sparse_impl(const SparseView& data, const CodeBook& cb, WorkerPool& pool,
                                      std::size_t* scratchElements) {
    check_dimensions(data.nDimensions, cb);
    const std::size_t n = data.nVectors;
    const std::size_t nodes = cb.nodes();
    const std::size_t dims = cb.nDimensions;
    BmuSearchResult result = make_result(n);
    const std::vector<double> nodeNorms = node_squared_norms(cb);
    std::vector<double> nodeLengths(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        nodeLengths[j] = std::sqrt(nodeNorms[j]);
    }
    // The sparse dot product accumulates exact float products in double.
    constexpr double gramCoeff = 4.0;

    const std::size_t chunks = (n + kSearchChunk - 1) / kSearchChunk;
    std::atomic<std::size_t> workers{0};
    pool.parallel_for(chunks, [&](std::size_t begin, std::size_t end, std::size_t) {
        workers.fetch_add(1);
        std::vector<float> dense(dims, 0.0f);
        std::vector<float> approx(nodes);
        for (std::size_t c = begin; c < end; ++c) {
            const std::size_t last = std::min(n, (c + 1) * kSearchChunk);
            for (std::size_t i = c * kSearchChunk; i < last; ++i) {
                const std::size_t p0 = data.row_begin(i);
                const std::size_t p1 = data.row_end(i);
                double xNorm = 0.0;
                for (std::size_t p = p0; p < p1; ++p) {
                    xNorm += static_cast<double>(data.values[p]) * data.values[p];
                }
                for (std::size_t j = 0; j < nodes; ++j) {
                    const float* w = cb.weights.data() + j * dims;
                    double acc = 0.0;
                    for (std::size_t p = p0; p < p1; ++p) {
                        acc += static_cast<double>(data.values[p]) * w[data.colIndices[p]];
                    }
                    approx[j] = static_cast<float>(std::max(0.0, xNorm - 2.0 * acc + nodeNorms[j]));
                }
                for (std::size_t p = p0; p < p1; ++p) {
                    dense[data.colIndices[p]] = data.values[p];
                }
                const double xLength = std::sqrt(xNorm);
                const Winner w = rerank(
                    nodes, [&](std::size_t j) { return approx[j]; },
                    [&](std::size_t j) { return rerank_margin(dims, gramCoeff, xLength, nodeLengths[j]); },
                    [&](std::size_t j) { return squared_distance(dense, cb.node(j)); });
                for (std::size_t p = p0; p < p1; ++p) {
                    dense[data.colIndices[p]] = 0.0f;
                }
                result.nodes[i] = w.node;
                result.sqDistances[i] = w.sqDistance;
            }
        }
    });
    if (scratchElements != nullptr) {
        *scratchElements += workers.load() * (dims + nodes) + nodes * 2;
    }
    return result;
}

BmuSearchResult find_bmus_impl(const DataView& data, const CodeBook& cb, KernelType kernel, std::size_t blockSize,
                               WorkerPool& pool, std::size_t* scratchElements) {
    const bool sparse = is_sparse(data);
    if (sparse != (kernel == KernelType::Sparse)) {
        throw ShapeError(ShapeError::Kind::KernelDataMismatch,
                         sparse ? "dense kernel selected for sparse data"
                                : "sparse kernel selected for dense data");
    }
    switch (kernel) {
    case KernelType::DenseNaive: return find_bmus_naive(std::get<DenseView>(data), cb, pool);
    case KernelType::DenseBlocked:
        return find_bmus_blocked_impl(std::get<DenseView>(data), cb, blockSize, pool, scratchElements);
    case KernelType::Sparse: return find_bmus_sparse_impl(std::get<SparseView>(data), cb, pool, scratchElements);
    }
    throw ConfigError("unknown kernel type");
}

}  // namespace

float squared_distance(std::span<const float> x, std::span<const float> w) noexcept {
    const std::size_t d = x.size();
    const float* a = x.data();
    const float* b = w.data();
    float acc[kLanes] = {};
    std::size_t k = 0;
    for (; k + kLanes <= d; k += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            const float t = a[k + l] - b[k + l];
            acc[l] += t * t;
        }
    }
    float tail = 0.0f;
    for (; k < d; ++k) {
        const float t = a[k] - b[k];
        tail += t * t;
    }
    return (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) + tail;
}

float dot(std::span<const float> x, std::span<const float> w) noexcept {
    const std::size_t d = x.size();
    const float* a = x.data();
    const float* b = w.data();
    float acc[kLanes] = {};
    std::size_t k = 0;
    for (; k + kLanes <= d; k += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            acc[l] += a[k + l] * b[k + l];
        }
    }
    float tail = 0.0f;
    for (; k < d; ++k) {
        tail += a[k] * b[k];
    }
    return (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) + tail;
}

double BmuSearchResult::quantization_error() const {
    if (sqDistances.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (float d : sqDistances) {
        sum += std::sqrt(static_cast<double>(d));
    }
    return sum / static_cast<double>(sqDistances.size());
}

BmuSearchResult find_bmus_naive(const DenseView& data, const CodeBook& cb, WorkerPool& pool) {
    check_dimensions(data.nDimensions, cb);
    const std::size_t n = data.nVectors;
    const std::size_t nodes = cb.nodes();
    BmuSearchResult result = make_result(n);
    const std::size_t chunks = (n + kSearchChunk - 1) / kSearchChunk;
    pool.parallel_for(chunks, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin * kSearchChunk; i < std::min(n, end * kSearchChunk); ++i) {
            const auto x = data.row(i);
            Winner best{0, squared_distance(x, cb.node(0))};
            for (std::size_t j = 1; j < nodes; ++j) {
                const float d = squared_distance(x, cb.node(j));
                if (d < best.sqDistance) {
                    best = Winner{static_cast<std::uint32_t>(j), d};
                }
            }
            result.nodes[i] = best.node;
            result.sqDistances[i] = best.sqDistance;
        }
    });
    return result;
}

std::vector<double> node_squared_norms(const CodeBook& cb) {
    std::vector<double> norms(cb.nodes());
    for (std::size_t j = 0; j < norms.size(); ++j) {
        double s = 0.0;
        for (float v : cb.node(j)) {
            s += static_cast<double>(v) * v;
        }
        norms[j] = s;
    }
    return norms;
}

void compute_distance_block(const DenseView& block, const CodeBook& cb, std::span<const double> nodeNorms,
                            DistanceBlock& out) {
    check_dimensions(block.nDimensions, cb);
    const std::size_t rows = block.nVectors;
    const std::size_t nodes = cb.nodes();
    out.rows = rows;
    out.nodes = nodes;
    out.values.resize(rows * nodes);
    const std::vector<double> rowNorms = dense_row_norms(block, 0, rows);
    // Node-outer: one pass over each weight vector per block.
    for (std::size_t j = 0; j < nodes; ++j) {
        const auto w = cb.node(j);
        for (std::size_t i = 0; i < rows; ++i) {
            const double g = gram_dot(block.row(i), w);
            const double d2 = rowNorms[i] - 2.0 * g + nodeNorms[j];
            out.values[i * nodes + j] = d2 > 0.0 ? static_cast<float>(d2) : 0.0f;
        }
    }
}

BmuSearchResult find_bmus_blocked(const DenseView& data, const CodeBook& cb, std::size_t blockSize,
                                  WorkerPool& pool) {
    return find_bmus_blocked_impl(data, cb, blockSize, pool, nullptr);
}

BmuSearchResult find_bmus_sparse(const SparseView& data, const CodeBook& cb, WorkerPool& pool) {
    return find_bmus_sparse_impl(data, cb, pool, nullptr);
}

BmuSearchResult find_bmus(const DataView& data, const CodeBook& cb, KernelType kernel, std::size_t blockSize,
                          WorkerPool& pool) {
    return find_bmus_impl(data, cb, kernel, blockSize, pool, nullptr);
}

BmuTable bmu_search_naive(const DenseView& data, const CodeBook& cb, std::size_t workers) {
    WorkerPool pool(workers);
    return find_bmus_naive(data, cb, pool).table(cb.nSomX);
}

BmuTable bmu_search_blocked(const DenseView& data, const CodeBook& cb, std::size_t blockSize, std::size_t workers) {
    WorkerPool pool(workers);
    return find_bmus_blocked(data, cb, blockSize, pool).table(cb.nSomX);
}

BmuTable bmu_search_sparse(const SparseView& data, const CodeBook& cb, std::size_t workers) {
    WorkerPool pool(workers);
    return find_bmus_sparse(data, cb, pool).table(cb.nSomX);
}

void Accumulators::add(std::span<const float> nums, std::span<const float> dens) {
    if (nums.size() != numerators.size() || dens.size() != denominators.size()) {
        throw ShapeError(ShapeError::Kind::DimensionMismatch, "accumulator shapes differ");
    }
    for (std::size_t i = 0; i < nums.size(); ++i) {
        numerators[i] += nums[i];
    }
    for (std::size_t j = 0; j < dens.size(); ++j) {
        denominators[j] += dens[j];
    }
}

namespace {

Accumulators accumulate_impl(const DataView& data, std::span<const std::uint32_t> bmuNodes, double radius,
                             double cutoff, const GridShape& shape, WorkerPool& pool,
                             std::size_t* workspaceElements) {
    const std::size_t n = vector_count(data);
    const std::size_t dims = dimension_count(data);
    const std::size_t nodes = shape.nodes();
    if (bmuNodes.size() != n) {
        throw ShapeError(ShapeError::Kind::DimensionMismatch,
                         "BMU table has " + std::to_string(bmuNodes.size()) + " entries for " + std::to_string(n) +
                             " instances");
    }

    // Counting sort of instances by BMU, stable in instance order.
    std::vector<std::size_t> groupStart(nodes + 1, 0);
    for (std::uint32_t b : bmuNodes) {
        if (b >= nodes) {
            throw ShapeError(ShapeError::Kind::DimensionMismatch, "BMU index outside the map");
        }
        ++groupStart[b + 1];
    }
    for (std::size_t j = 0; j < nodes; ++j) {
        groupStart[j + 1] += groupStart[j];
    }
    std::vector<std::size_t> members(n);
    {
        std::vector<std::size_t> fill(groupStart.begin(), groupStart.end() - 1);
        for (std::size_t t = 0; t < n; ++t) {
            members[fill[bmuNodes[t]]++] = t;
        }
    }
    std::vector<std::uint32_t> occupied;
    for (std::size_t j = 0; j < nodes; ++j) {
        if (groupStart[j + 1] > groupStart[j]) {
            occupied.push_back(static_cast<std::uint32_t>(j));
        }
    }

    // Per-group sums of the instances mapped to each occupied node.
    std::vector<double> groupSums(occupied.size() * dims, 0.0);
    pool.for_each(occupied.size(), [&](std::size_t g) {
        double* sum = groupSums.data() + g * dims;
        const std::uint32_t b = occupied[g];
        for (std::size_t m = groupStart[b]; m < groupStart[b + 1]; ++m) {
            const std::size_t t = members[m];
            if (const auto* dense = std::get_if<DenseView>(&data)) {
                const float* x = dense->values.data() + t * dims;
                for (std::size_t k = 0; k < dims; ++k) {
                    sum[k] += x[k];
                }
            } else {
                const auto& sparse = std::get<SparseView>(data);
                for (std::size_t p = sparse.row_begin(t); p < sparse.row_end(t); ++p) {
                    sum[sparse.colIndices[p]] += sparse.values[p];
                }
            }
        }
    });

    // Each node gathers its weighted group contributions.
    Accumulators acc(nodes, dims);
    const NeighborhoodTable weights(shape, radius);
    pool.for_each(nodes, [&](std::size_t j) {
        const GridCoord node = node_coord(j, shape.columns);
        double* num = acc.numerators.data() + j * dims;
        double den = 0.0;
        for (std::size_t g = 0; g < occupied.size(); ++g) {
            const std::uint32_t b = occupied[g];
            const double h = weights(node_coord(b, shape.columns), node);
            if (h < cutoff) {
                continue;
            }
            den += static_cast<double>(groupStart[b + 1] - groupStart[b]) * h;
            const double* sum = groupSums.data() + g * dims;
            for (std::size_t k = 0; k < dims; ++k) {
                num[k] += h * sum[k];
            }
        }
        acc.denominators[j] = den;
    });

    if (workspaceElements != nullptr) {
        *workspaceElements += acc.elements() + groupSums.size() + groupStart.size() + members.size() +
                              occupied.size() + nodes;
    }
    return acc;
}

}  // namespace

Accumulators accumulate(const DataView& data, std::span<const std::uint32_t> bmuNodes, double radius, double cutoff,
                        const GridShape& shape, WorkerPool& pool) {
    return accumulate_impl(data, bmuNodes, radius, cutoff, shape, pool, nullptr);
}

Accumulators accumulate(const DataView& data, const BmuTable& bmus, double radius, double cutoff,
                        const GridShape& shape, std::size_t workers) {
    WorkerPool pool(workers);
    const auto nodes = bmus.to_nodes(shape.columns);
    return accumulate(data, nodes, radius, cutoff, shape, pool);
}

void blend(CodeBook& cb, const Accumulators& acc, double scale) {
    if (acc.nNodes != cb.nodes() || acc.nDimensions != cb.nDimensions) {
        throw ShapeError(ShapeError::Kind::DimensionMismatch, "accumulators do not match the codebook");
    }
    const double keep = 1.0 - scale;
    for (std::size_t j = 0; j < acc.nNodes; ++j) {
        const double den = acc.denominators[j];
        if (!(den > 0.0)) {
            continue;
        }
        auto w = cb.node(j);
        const auto num = acc.numerator(j);
        for (std::size_t k = 0; k < w.size(); ++k) {
            w[k] = static_cast<float>(keep * w[k] + scale * (num[k] / den));
        }
    }
}

BmuSearchResult run_epoch(const DataView& data, CodeBook& cb, const KernelParams& params, MapType mapType,
                          WorkerPool& pool, EpochStats* stats) {
    std::size_t workspace = 0;
    BmuSearchResult bmus = find_bmus_impl(data, cb, params.kernel, params.blockSize, pool, &workspace);
    const Accumulators acc =
        accumulate_impl(data, bmus.nodes, params.radius, params.cutoff, cb.shape(mapType), pool, &workspace);
    blend(cb, acc, params.scale);
    if (stats != nullptr) {
        stats->workspaceElements = workspace + bmus.nodes.size() + bmus.sqDistances.size();
    }
    return bmus;
}

EpochKernelResult epoch_kernel(const DataView& data, const CodeBook& cb, const KernelParams& params, MapType mapType,
                               std::size_t workerCount) {
    WorkerPool pool(workerCount);
    EpochKernelResult out;
    out.codebook = cb;
    const BmuSearchResult bmus = run_epoch(data, out.codebook, params, mapType, pool);
    out.bmus = bmus.table(cb.nSomX);
    out.quantizationError = bmus.quantization_error();
    return out;
}

}  // namespace batchsom
