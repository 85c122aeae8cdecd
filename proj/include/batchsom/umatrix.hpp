#pragma once

#include "batchsom/codebook.hpp"
#include "batchsom/grid.hpp"

namespace batchsom {

/// U(j) = mean Euclidean distance between w_j and the weights of its
/// immediate lattice neighbours (see `neighbors()`). Computed in double,
/// stored in single precision. A node without neighbours (1x1 map) gets 0.
UMatrix compute_umatrix(const CodeBook& cb, MapType mapType);

}  // namespace batchsom
