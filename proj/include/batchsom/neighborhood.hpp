#pragma once

#include <vector>

#include "batchsom/grid.hpp"

namespace batchsom {

/// Gaussian-type neighbourhood exp(-||r_b - r_j|| / radius) over the
/// unsquared lattice distance. Equals 1 exactly when node == bmu.
double neighborhood(GridCoord bmu, GridCoord node, double radius, const GridShape& shape);

/// Neighbourhood weights for every per-axis offset of one map at one radius.
/// Lookups agree bit-for-bit with `neighborhood()`.
class NeighborhoodTable {
public:
    NeighborhoodTable(const GridShape& shape, double radius);

    double operator()(GridCoord bmu, GridCoord node) const noexcept {
        const auto dx = axis_delta(bmu.col, node.col, shape_.columns, shape_.type);
        const auto dy = axis_delta(bmu.row, node.row, shape_.rows, shape_.type);
        return weights_[std::size_t{dy} * shape_.columns + dx];
    }

    /// Largest lattice distance whose weight still reaches `cutoff`.
    static double cutoff_distance(double radius, double cutoff);

private:
    GridShape shape_;
    std::vector<double> weights_;
};

}  // namespace batchsom
