#include "batchsom/dataset.hpp"

namespace batchsom {

DataView slice(const DataView& v, std::size_t first, std::size_t count) {
    return std::visit([&](const auto& d) -> DataView { return d.slice(first, count); }, v);
}

DenseDataset SparseDataset::densify() const {
    DenseDataset out(nVectors, nDimensions);
    for (std::size_t i = 0; i < nVectors; ++i) {
        for (std::size_t p = rowOffsets[i]; p < rowOffsets[i + 1]; ++p) {
            out.values[i * nDimensions + colIndices[p]] = values[p];
        }
    }
    return out;
}

Dataset materialize(const DataView& v) {
    if (const auto* dense = std::get_if<DenseView>(&v)) {
        return DenseDataset(dense->nVectors, dense->nDimensions,
                            std::vector<float>(dense->values.begin(), dense->values.end()));
    }
    const auto& sparse = std::get<SparseView>(v);
    SparseDataset out;
    out.nVectors = sparse.nVectors;
    out.nDimensions = sparse.nDimensions;
    out.rowOffsets.assign(1, 0);
    out.rowOffsets.reserve(sparse.nVectors + 1);
    const std::size_t base = sparse.nVectors > 0 ? sparse.rowOffsets.front() : 0;
    const std::size_t end = sparse.nVectors > 0 ? sparse.rowOffsets.back() : 0;
    out.colIndices.assign(sparse.colIndices.begin() + base, sparse.colIndices.begin() + end);
    out.values.assign(sparse.values.begin() + base, sparse.values.begin() + end);
    for (std::size_t i = 0; i < sparse.nVectors; ++i) {
        out.rowOffsets.push_back(sparse.rowOffsets[i + 1] - base);
    }
    return out;
}

}  // namespace batchsom
