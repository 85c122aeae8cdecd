#include "batchsom/neighborhood.hpp"

#include <cmath>
#include <limits>

namespace batchsom {

namespace {

double weight_at(double distance, double radius) {
    return std::exp(-distance / radius);
}

}  // namespace

double neighborhood(GridCoord bmu, GridCoord node, double radius, const GridShape& shape) {
    return weight_at(grid_distance(bmu, node, shape), radius);
}

NeighborhoodTable::NeighborhoodTable(const GridShape& shape, double radius)
    : shape_(shape), weights_(shape.nodes()) {
    for (std::uint32_t dy = 0; dy < shape.rows; ++dy) {
        for (std::uint32_t dx = 0; dx < shape.columns; ++dx) {
            weights_[std::size_t{dy} * shape.columns + dx] = weight_at(lattice_norm(dx, dy), radius);
        }
    }
}

double NeighborhoodTable::cutoff_distance(double radius, double cutoff) {
    if (cutoff <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return radius * std::log(1.0 / cutoff);
}

}  // namespace batchsom
