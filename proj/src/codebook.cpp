#include "batchsom/codebook.hpp"

namespace batchsom {

BmuTable BmuTable::from_nodes(std::span<const std::uint32_t> nodes, std::uint32_t columns) {
    BmuTable t;
    t.units.reserve(nodes.size());
    for (std::uint32_t j : nodes) {
        t.units.push_back(node_coord(j, columns));
    }
    return t;
}

std::vector<std::uint32_t> BmuTable::to_nodes(std::uint32_t columns) const {
    std::vector<std::uint32_t> out;
    out.reserve(units.size());
    for (const auto& c : units) {
        out.push_back(static_cast<std::uint32_t>(node_index(c, columns)));
    }
    return out;
}

}  // namespace batchsom
