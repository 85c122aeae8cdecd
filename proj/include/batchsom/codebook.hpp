#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "batchsom/grid.hpp"

namespace batchsom {

/// Node weight vectors, node-major (row-major over the lattice) then
/// dimension, single precision.
struct CodeBook {
    std::uint32_t nSomX = 0;
    std::uint32_t nSomY = 0;
    std::size_t nDimensions = 0;
    std::vector<float> weights;

    CodeBook() = default;
    CodeBook(std::uint32_t columns, std::uint32_t rows, std::size_t dims)
        : nSomX(columns), nSomY(rows), nDimensions(dims), weights(std::size_t{columns} * rows * dims, 0.0f) {}

    std::size_t nodes() const noexcept { return std::size_t{nSomX} * nSomY; }
    std::span<const float> node(std::size_t j) const noexcept {
        return std::span<const float>(weights).subspan(j * nDimensions, nDimensions);
    }
    std::span<float> node(std::size_t j) noexcept {
        return std::span<float>(weights).subspan(j * nDimensions, nDimensions);
    }
    GridShape shape(MapType type) const noexcept { return GridShape{nSomX, nSomY, type}; }

    friend bool operator==(const CodeBook&, const CodeBook&) = default;
};

/// Best matching unit of every instance, in instance order.
struct BmuTable {
    std::vector<GridCoord> units;

    std::size_t size() const noexcept { return units.size(); }
    const GridCoord& operator[](std::size_t i) const noexcept { return units[i]; }

    static BmuTable from_nodes(std::span<const std::uint32_t> nodes, std::uint32_t columns);
    std::vector<std::uint32_t> to_nodes(std::uint32_t columns) const;

    friend bool operator==(const BmuTable&, const BmuTable&) = default;
};

/// Average distance of each node to its immediate lattice neighbours.
struct UMatrix {
    std::uint32_t nSomX = 0;
    std::uint32_t nSomY = 0;
    std::vector<float> heights;  // row-major, nSomY x nSomX

    float at(std::uint32_t col, std::uint32_t row) const noexcept {
        return heights[std::size_t{row} * nSomX + col];
    }

    friend bool operator==(const UMatrix&, const UMatrix&) = default;
};

}  // namespace batchsom
