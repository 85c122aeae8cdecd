#include "batchsom/buffers.hpp"

#include <algorithm>

#include "batchsom/errors.hpp"
#include "batchsom/training.hpp"

namespace batchsom {

namespace {

void check_size(const char* name, std::size_t actual, std::size_t expected, const char* formula) {
    if (actual != expected) {
        throw ShapeError(ShapeError::Kind::BufferSize, std::string(name) + " buffer has " + std::to_string(actual) +
                                                           " elements, expected " + formula + " = " +
                                                           std::to_string(expected));
    }
}

}  // namespace

void train_into_buffers(std::span<const float> data, std::size_t nVectors, std::size_t nDimensions,
                        std::uint32_t nSomX, std::uint32_t nSomY, const RawConfig& raw,
                        const std::string& initialCodebookPath, const OutputBuffers& out,
                        std::size_t workerThreads) {
    const std::size_t nodes = std::size_t{nSomX} * nSomY;
    check_size("data", data.size(), nVectors * nDimensions, "nVectors*nDimensions");
    check_size("codebook", out.codebook.size(), nodes * nDimensions, "nSomY*nSomX*nDimensions");
    check_size("bmus", out.bmus.size(), nVectors * 2, "nVectors*2");
    check_size("umatrix", out.umatrix.size(), nodes, "nSomY*nSomX");
    if (raw.kernel == KernelType::Sparse) {
        throw ShapeError(ShapeError::Kind::KernelDataMismatch, "kernel 2 needs sparse input; buffers are dense");
    }

    const TrainConfig cfg = resolve_defaults(raw, nSomX, nSomY);
    TrainOptions options;
    options.workerThreads = workerThreads;
    if (!initialCodebookPath.empty()) {
        options.initialCodebook = load_initial_codebook(cfg, nDimensions, initialCodebookPath);
    }
    const DataView view = DenseView{data, nVectors, nDimensions};
    const TrainedMap map = train(view, cfg, options);

    std::copy(map.codebook.weights.begin(), map.codebook.weights.end(), out.codebook.begin());
    for (std::size_t i = 0; i < map.bmus.size(); ++i) {
        out.bmus[2 * i] = static_cast<std::int32_t>(map.bmus[i].col);
        out.bmus[2 * i + 1] = static_cast<std::int32_t>(map.bmus[i].row);
    }
    std::copy(map.umatrix.heights.begin(), map.umatrix.heights.end(), out.umatrix.begin());
}

}  // namespace batchsom
