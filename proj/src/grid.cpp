#include "batchsom/grid.hpp"

#include <algorithm>
#include <cmath>

#include "batchsom/errors.hpp"

namespace batchsom {

MapType parse_map_type(std::string_view name) {
    if (name == "planar") {
        return MapType::Planar;
    }
    if (name == "toroid") {
        return MapType::Toroid;
    }
    throw ConfigError("unknown map type '" + std::string(name) + "' (expected planar or toroid)");
}

std::string_view to_string(MapType type) {
    return type == MapType::Toroid ? "toroid" : "planar";
}

std::uint32_t axis_delta(std::uint32_t a, std::uint32_t b, std::uint32_t extent, MapType type) noexcept {
    const std::uint32_t d = a > b ? a - b : b - a;
    if (type == MapType::Toroid) {
        return std::min(d, extent - d);
    }
    return d;
}

double lattice_norm(std::uint32_t dx, std::uint32_t dy) noexcept {
    const double x = dx;
    const double y = dy;
    return std::sqrt(x * x + y * y);
}

double grid_distance(GridCoord a, GridCoord b, const GridShape& shape) noexcept {
    return lattice_norm(axis_delta(a.col, b.col, shape.columns, shape.type),
                        axis_delta(a.row, b.row, shape.rows, shape.type));
}

std::vector<GridCoord> neighbors(GridCoord c, const GridShape& shape) {
    std::vector<GridCoord> out;
    out.reserve(8);
    const auto cols = static_cast<std::int64_t>(shape.columns);
    const auto rows = static_cast<std::int64_t>(shape.rows);
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) {
                continue;
            }
            if (kNeighborConnectivity == 4 && dx != 0 && dy != 0) {
                continue;
            }
            std::int64_t x = c.col + dx;
            std::int64_t y = c.row + dy;
            if (shape.type == MapType::Planar) {
                if (x < 0 || y < 0 || x >= cols || y >= rows) {
                    continue;
                }
            } else {
                x = ((x % cols) + cols) % cols;
                y = ((y % rows) + rows) % rows;
            }
            const GridCoord n{static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
            if (n == c || std::find(out.begin(), out.end(), n) != out.end()) {
                continue;
            }
            out.push_back(n);
        }
    }
    return out;
}

}  // namespace batchsom
