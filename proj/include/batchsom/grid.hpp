#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace batchsom {

enum class MapType { Planar, Toroid };

MapType parse_map_type(std::string_view name);
std::string_view to_string(MapType type);

/// A node position on the map lattice: `col` runs along x (nSomX), `row`
/// along y (nSomY).
struct GridCoord {
    std::uint32_t col = 0;
    std::uint32_t row = 0;

    friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Rectangular lattice geometry shared by every grid computation.
struct GridShape {
    std::uint32_t columns = 0;  // nSomX
    std::uint32_t rows = 0;     // nSomY
    MapType type = MapType::Planar;

    std::size_t nodes() const noexcept { return std::size_t{columns} * rows; }
    bool contains(GridCoord c) const noexcept { return c.col < columns && c.row < rows; }
};

/// Moore neighbourhood: the U-matrix averages over the 8 surrounding nodes.
/// Set to 4 for von Neumann connectivity.
inline constexpr int kNeighborConnectivity = 8;

inline std::size_t node_index(GridCoord c, std::uint32_t columns) noexcept {
    return std::size_t{c.row} * columns + c.col;
}

inline GridCoord node_coord(std::size_t index, std::uint32_t columns) noexcept {
    return GridCoord{static_cast<std::uint32_t>(index % columns),
                     static_cast<std::uint32_t>(index / columns)};
}

/// Per-axis offset between two nodes, wrapped on a torus.
std::uint32_t axis_delta(std::uint32_t a, std::uint32_t b, std::uint32_t extent, MapType type) noexcept;

/// Euclidean distance from per-axis offsets. Every grid distance in the
/// library goes through here so neighbourhood tables and direct evaluations
/// agree to the last bit.
double lattice_norm(std::uint32_t dx, std::uint32_t dy) noexcept;

double grid_distance(GridCoord a, GridCoord b, const GridShape& shape) noexcept;

/// Immediate neighbours of `c` in row-major scan order of the surrounding
/// 3x3 block. Planar maps drop off-grid positions; toroid maps wrap and drop
/// duplicates (and `c` itself) on lattices narrower than 3.
std::vector<GridCoord> neighbors(GridCoord c, const GridShape& shape);

}  // namespace batchsom
