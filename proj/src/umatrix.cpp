#include "batchsom/umatrix.hpp"

#include <cmath>

namespace batchsom {

namespace {

double node_distance(const CodeBook& cb, std::size_t a, std::size_t b) {
    const auto wa = cb.node(a);
    const auto wb = cb.node(b);
    double s = 0.0;
    for (std::size_t k = 0; k < wa.size(); ++k) {
        const double t = static_cast<double>(wa[k]) - wb[k];
        s += t * t;
    }
    return std::sqrt(s);
}

}  // namespace

UMatrix compute_umatrix(const CodeBook& cb, MapType mapType) {
    const GridShape shape = cb.shape(mapType);
    UMatrix u{cb.nSomX, cb.nSomY, std::vector<float>(cb.nodes(), 0.0f)};
    for (std::uint32_t row = 0; row < shape.rows; ++row) {
        for (std::uint32_t col = 0; col < shape.columns; ++col) {
            const GridCoord c{col, row};
            const std::size_t j = node_index(c, shape.columns);
            const auto around = neighbors(c, shape);
            if (around.empty()) {
                continue;
            }
            double sum = 0.0;
            for (const GridCoord& n : around) {
                sum += node_distance(cb, j, node_index(n, shape.columns));
            }
            u.heights[j] = static_cast<float>(sum / static_cast<double>(around.size()));
        }
    }
    return u;
}

}  // namespace batchsom
