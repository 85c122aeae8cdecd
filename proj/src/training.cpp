#include "batchsom/training.hpp"

#include <random>

#include "batchsom/errors.hpp"
#include "batchsom/kernels.hpp"
#include "batchsom/umatrix.hpp"

namespace batchsom {

FileSink::FileSink(std::string prefix) : prefix_(std::move(prefix)) {}

void FileSink::umatrix_snapshot(std::uint32_t epoch, const UMatrix& u) {
    write_umatrix(snapshot_paths(prefix_, epoch).umatrix, u);
}

void FileSink::full_snapshot(std::uint32_t epoch, const CodeBook& cb, const BmuTable& bmus) {
    const auto paths = snapshot_paths(prefix_, epoch);
    write_codebook(paths.codebook, cb);
    write_bmus(paths.bmus, bmus);
}

void FileSink::final_outputs(const TrainedMap& map) {
    const auto paths = snapshot_paths(prefix_);
    write_codebook(paths.codebook, map.codebook);
    write_bmus(paths.bmus, map.bmus);
    write_umatrix(paths.umatrix, map.umatrix);
}

CodeBook init_codebook(const TrainConfig& cfg, std::size_t nDimensions, const HeaderedMatrix* initial) {
    CodeBook cb(cfg.nSomX, cfg.nSomY, nDimensions);
    if (initial == nullptr) {
        std::mt19937 rng(cfg.seed);
        for (float& w : cb.weights) {
            // 24 random bits: exactly representable, uniform on [0, 1).
            w = static_cast<float>(rng() >> 8) * 0x1p-24f;
        }
        return cb;
    }
    const auto& m = initial->matrix;
    const bool gridKnown = initial->rows.has_value();
    const bool gridMatches = !gridKnown || (*initial->rows == cfg.nSomY && *initial->columns == cfg.nSomX);
    if (!gridMatches || m.nVectors != cb.nodes() || m.nDimensions != nDimensions) {
        std::string found = gridKnown ? std::to_string(*initial->rows) + "x" + std::to_string(*initial->columns)
                                      : std::to_string(m.nVectors) + " nodes";
        throw ShapeError(ShapeError::Kind::CodebookShapeMismatch,
                         "initial codebook is " + found + " with " + std::to_string(m.nDimensions) +
                             " dimensions; map needs " + std::to_string(cfg.nSomY) + "x" +
                             std::to_string(cfg.nSomX) + " with " + std::to_string(nDimensions));
    }
    cb.weights = m.values;
    return cb;
}

CodeBook load_initial_codebook(const TrainConfig& cfg, std::size_t nDimensions, const std::string& path) {
    const HeaderedMatrix m = read_codebook_file(path);
    return init_codebook(cfg, nDimensions, &m);
}

namespace {

KernelParams kernel_params(const TrainConfig& cfg, const EpochState& state) {
    return KernelParams{state.radius, state.scale, cfg.influenceCutoff, cfg.kernel, cfg.blockSize};
}

}  // namespace

EpochResult train_one_epoch(const DataView& data, const CodeBook& cb, const TrainConfig& cfg, std::uint32_t epoch,
                            bool computeUMatrix, WorkerPool& pool) {
    if (epoch >= cfg.nEpochs) {
        throw ConfigError("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(cfg.nEpochs) + ")");
    }
    const EpochState state = epoch_state(cfg, epoch);
    EpochResult out;
    out.codebook = cb;
    const BmuSearchResult bmus = run_epoch(data, out.codebook, kernel_params(cfg, state), cfg.mapType, pool);
    out.bmus = bmus.table(cb.nSomX);
    out.report = EpochReport{epoch, state.radius, state.scale, bmus.quantization_error()};
    if (computeUMatrix) {
        out.umatrix = compute_umatrix(out.codebook, cfg.mapType);
    }
    return out;
}

EpochResult train_one_epoch(const DataView& data, const CodeBook& cb, const TrainConfig& cfg, std::uint32_t epoch,
                            bool computeUMatrix, std::size_t workerThreads) {
    WorkerPool pool(workerThreads);
    return train_one_epoch(data, cb, cfg, epoch, computeUMatrix, pool);
}

void check_training_inputs(const DataView& data, const TrainConfig& cfg, const std::optional<CodeBook>& initial) {
    validate(cfg);
    if (is_sparse(data) != (cfg.kernel == KernelType::Sparse)) {
        throw ShapeError(ShapeError::Kind::KernelDataMismatch,
                         is_sparse(data) ? "sparse input needs kernel 2" : "kernel 2 needs sparse input");
    }
    if (initial) {
        if (initial->nSomX != cfg.nSomX || initial->nSomY != cfg.nSomY ||
            initial->nDimensions != dimension_count(data)) {
            throw ShapeError(ShapeError::Kind::CodebookShapeMismatch, "initial codebook does not match map and data");
        }
    }
}

TrainedMap train(const DataView& data, const TrainConfig& cfg, const TrainOptions& options) {
    check_training_inputs(data, cfg, options.initialCodebook);
    WorkerPool pool(options.workerThreads);

    TrainedMap map;
    map.codebook = options.initialCodebook ? *options.initialCodebook : init_codebook(cfg, dimension_count(data));
    for (std::uint32_t epoch = 0; epoch < cfg.nEpochs; ++epoch) {
        const EpochState state = epoch_state(cfg, epoch);
        const BmuSearchResult bmus = run_epoch(data, map.codebook, kernel_params(cfg, state), cfg.mapType, pool);
        map.bmus = bmus.table(cfg.nSomX);
        if (options.onEpoch) {
            options.onEpoch(EpochReport{epoch, state.radius, state.scale, bmus.quantization_error()});
        }
        if (options.sink != nullptr && cfg.snapshotLevel >= 1) {
            options.sink->umatrix_snapshot(epoch, compute_umatrix(map.codebook, cfg.mapType));
            if (cfg.snapshotLevel == 2) {
                options.sink->full_snapshot(epoch, map.codebook, map.bmus);
            }
        }
    }
    map.umatrix = compute_umatrix(map.codebook, cfg.mapType);
    if (options.sink != nullptr) {
        options.sink->final_outputs(map);
    }
    return map;
}

}  // namespace batchsom
