#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "batchsom/config.hpp"

namespace batchsom {

/// Caller-owned output storage, filled in place.
struct OutputBuffers {
    std::span<float> codebook;      // nSomY * nSomX * nDimensions
    std::span<std::int32_t> bmus;   // nVectors * 2: column, row
    std::span<float> umatrix;       // nSomY * nSomX
};

/// Trains on a row-major single-precision buffer without copying it and
/// writes the results into `out`. Semantics equal `train` with the same
/// resolved config. An empty `initialCodebookPath` selects random
/// initialisation.
///
/// Throws ShapeError(BufferSize) naming the expected length when any buffer
/// has the wrong size, and ShapeError(KernelDataMismatch) for kernel 2,
/// which needs sparse input.
void train_into_buffers(std::span<const float> data, std::size_t nVectors, std::size_t nDimensions,
                        std::uint32_t nSomX, std::uint32_t nSomY, const RawConfig& raw,
                        const std::string& initialCodebookPath, const OutputBuffers& out,
                        std::size_t workerThreads = 0);

}  // namespace batchsom
