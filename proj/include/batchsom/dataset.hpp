#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace batchsom {

/// Non-owning row-major view of a dense matrix. Kernels only ever see views,
/// so caller-owned buffers are trained on without a copy.
struct DenseView {
    std::span<const float> values;
    std::size_t nVectors = 0;
    std::size_t nDimensions = 0;

    std::span<const float> row(std::size_t i) const noexcept {
        return values.subspan(i * nDimensions, nDimensions);
    }
    /// Rows [first, first + count).
    DenseView slice(std::size_t first, std::size_t count) const noexcept {
        return DenseView{values.subspan(first * nDimensions, count * nDimensions), count, nDimensions};
    }
};

/// Non-owning view of a CSR matrix. `rowOffsets` may start at a nonzero
/// offset when the view is a slice of a larger matrix.
struct SparseView {
    std::span<const std::size_t> rowOffsets;  // nVectors + 1 entries
    std::span<const std::uint32_t> colIndices;
    std::span<const float> values;
    std::size_t nVectors = 0;
    std::size_t nDimensions = 0;

    std::size_t row_begin(std::size_t i) const noexcept { return rowOffsets[i]; }
    std::size_t row_end(std::size_t i) const noexcept { return rowOffsets[i + 1]; }
    SparseView slice(std::size_t first, std::size_t count) const noexcept {
        return SparseView{rowOffsets.subspan(first, count + 1), colIndices, values, count, nDimensions};
    }
};

using DataView = std::variant<DenseView, SparseView>;

inline std::size_t vector_count(const DataView& v) {
    return std::visit([](const auto& d) { return d.nVectors; }, v);
}
inline std::size_t dimension_count(const DataView& v) {
    return std::visit([](const auto& d) { return d.nDimensions; }, v);
}
inline bool is_sparse(const DataView& v) { return std::holds_alternative<SparseView>(v); }
DataView slice(const DataView& v, std::size_t first, std::size_t count);

struct DenseDataset {
    std::size_t nVectors = 0;
    std::size_t nDimensions = 0;
    std::vector<float> values;

    DenseDataset() = default;
    DenseDataset(std::size_t n, std::size_t d) : nVectors(n), nDimensions(d), values(n * d, 0.0f) {}
    DenseDataset(std::size_t n, std::size_t d, std::vector<float> v)
        : nVectors(n), nDimensions(d), values(std::move(v)) {}

    DenseView view() const noexcept { return DenseView{values, nVectors, nDimensions}; }
    std::span<const float> row(std::size_t i) const noexcept { return view().row(i); }
    float at(std::size_t i, std::size_t k) const noexcept { return values[i * nDimensions + k]; }
    std::size_t elements() const noexcept { return values.size(); }

    friend bool operator==(const DenseDataset&, const DenseDataset&) = default;
};

struct SparseDataset {
    std::size_t nVectors = 0;
    std::size_t nDimensions = 0;
    std::vector<std::size_t> rowOffsets{0};
    std::vector<std::uint32_t> colIndices;
    std::vector<float> values;

    SparseView view() const noexcept {
        return SparseView{rowOffsets, colIndices, values, nVectors, nDimensions};
    }
    std::size_t nonzeros() const noexcept { return values.size(); }
    /// Stored element count across all three arrays: O(n + nnz).
    std::size_t elements() const noexcept {
        return rowOffsets.size() + colIndices.size() + values.size();
    }
    DenseDataset densify() const;

    friend bool operator==(const SparseDataset&, const SparseDataset&) = default;
};

/// Owning dataset of either kind.
using Dataset = std::variant<DenseDataset, SparseDataset>;

inline DataView view_of(const Dataset& d) {
    return std::visit([](const auto& x) -> DataView { return x.view(); }, d);
}

/// Copies the rows a view covers into an owning dataset (sparse offsets are
/// rebased to zero).
Dataset materialize(const DataView& v);

}  // namespace batchsom
