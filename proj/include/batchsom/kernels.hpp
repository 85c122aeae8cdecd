#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "batchsom/codebook.hpp"
#include "batchsom/config.hpp"
#include "batchsom/dataset.hpp"
#include "batchsom/worker_pool.hpp"

namespace batchsom {

/// Reference squared Euclidean distance: single precision, eight interleaved
/// partial sums combined in a fixed order. Every BMU search resolves its
/// winner with this function.
float squared_distance(std::span<const float> x, std::span<const float> w) noexcept;

/// Dot product with the same lane structure as `squared_distance`.
float dot(std::span<const float> x, std::span<const float> w) noexcept;

struct BmuSearchResult {
    std::vector<std::uint32_t> nodes;  // flat node index of each instance's BMU
    std::vector<float> sqDistances;    // reference squared distance to that BMU

    BmuTable table(std::uint32_t columns) const { return BmuTable::from_nodes(nodes, columns); }
    /// Mean Euclidean distance from instances to their BMUs.
    double quantization_error() const;
};

/// Exhaustive search with the reference distance. Ties go to the lowest
/// flat node index.
BmuSearchResult find_bmus_naive(const DenseView& data, const CodeBook& cb, WorkerPool& pool);

/// Squared distances between a block of instances and every node, computed
/// as ||x||^2 - 2 x.w + ||w||^2 and clamped at zero.
struct DistanceBlock {
    std::size_t rows = 0;
    std::size_t nodes = 0;
    std::vector<float> values;  // rows x nodes

    float at(std::size_t i, std::size_t j) const noexcept { return values[i * nodes + j]; }
};

/// ||w_j||^2 for every node, accumulated in double.
std::vector<double> node_squared_norms(const CodeBook& cb);

void compute_distance_block(const DenseView& block, const CodeBook& cb, std::span<const double> nodeNorms,
                            DistanceBlock& out);

/// Gram-matrix search over blocks of `blockSize` instances. Candidates whose
/// block distance is within the rounding bound of the block minimum are
/// re-ranked with the reference distance, so the result equals
/// `find_bmus_naive` exactly.
BmuSearchResult find_bmus_blocked(const DenseView& data, const CodeBook& cb, std::size_t blockSize,
                                  WorkerPool& pool);

/// Sparse search: ||x||^2 - 2 sum_{k in nnz(x)} x_k w_jk + ||w_j||^2, with
/// the same reference re-ranking as the blocked kernel.
BmuSearchResult find_bmus_sparse(const SparseView& data, const CodeBook& cb, WorkerPool& pool);

/// Dispatches on kernel type. Throws ShapeError(KernelDataMismatch) when
/// the kernel and the data representation disagree and
/// ShapeError(DimensionMismatch) on a dimensionality mismatch.
BmuSearchResult find_bmus(const DataView& data, const CodeBook& cb, KernelType kernel, std::size_t blockSize,
                          WorkerPool& pool);

BmuTable bmu_search_naive(const DenseView& data, const CodeBook& cb, std::size_t workers = 1);
BmuTable bmu_search_blocked(const DenseView& data, const CodeBook& cb, std::size_t blockSize,
                            std::size_t workers = 1);
BmuTable bmu_search_sparse(const SparseView& data, const CodeBook& cb, std::size_t workers = 1);

/// Batch update sums: numerators N_j = sum_t h_bj(t) x(t) and denominators
/// D_j = sum_t h_bj(t), in double precision.
struct Accumulators {
    std::size_t nNodes = 0;
    std::size_t nDimensions = 0;
    std::vector<double> numerators;    // node-major, nNodes x nDimensions
    std::vector<double> denominators;  // nNodes

    Accumulators() = default;
    Accumulators(std::size_t nodes, std::size_t dims)
        : nNodes(nodes), nDimensions(dims), numerators(nodes * dims, 0.0), denominators(nodes, 0.0) {}

    std::span<const double> numerator(std::size_t j) const noexcept {
        return std::span<const double>(numerators).subspan(j * nDimensions, nDimensions);
    }
    std::size_t elements() const noexcept { return numerators.size() + denominators.size(); }

    /// Adds single-precision partial sums (as received from a remote worker).
    void add(std::span<const float> nums, std::span<const float> dens);
};

/// Accumulates every (instance, node) pair whose neighbourhood weight is at
/// least `cutoff` (all pairs when cutoff is 0).
///
/// Instances are first grouped by BMU and summed per group in instance order;
/// each node then sums its weighted group contributions in ascending BMU
/// order. Every output element is owned by exactly one worker, so the result
/// is bit-identical for any pool size.
Accumulators accumulate(const DataView& data, std::span<const std::uint32_t> bmuNodes, double radius,
                        double cutoff, const GridShape& shape, WorkerPool& pool);
Accumulators accumulate(const DataView& data, const BmuTable& bmus, double radius, double cutoff,
                        const GridShape& shape, std::size_t workers = 1);

/// w_j <- (1 - scale) w_j + scale N_j / D_j for nodes with D_j > 0; other
/// nodes are left untouched.
void blend(CodeBook& cb, const Accumulators& acc, double scale);

struct KernelParams {
    double radius = 1.0;
    double scale = 1.0;
    double cutoff = kDefaultInfluenceCutoff;
    KernelType kernel = KernelType::DenseNaive;
    std::size_t blockSize = kDefaultBlockSize;
};

struct EpochStats {
    /// Elements allocated for the epoch beyond the data and the codebook.
    std::size_t workspaceElements = 0;
};

/// BMU search + accumulation + blend, updating `cb` in place. All workers
/// read the same codebook; it is written once, after the parallel phases.
BmuSearchResult run_epoch(const DataView& data, CodeBook& cb, const KernelParams& params, MapType mapType,
                          WorkerPool& pool, EpochStats* stats = nullptr);

struct EpochKernelResult {
    BmuTable bmus;
    CodeBook codebook;
    double quantizationError = 0.0;
};

EpochKernelResult epoch_kernel(const DataView& data, const CodeBook& cb, const KernelParams& params,
                               MapType mapType, std::size_t workerCount);

}  // namespace batchsom
