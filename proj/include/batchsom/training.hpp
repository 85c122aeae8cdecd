#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "batchsom/codebook.hpp"
#include "batchsom/config.hpp"
#include "batchsom/dataset.hpp"
#include "batchsom/io.hpp"
#include "batchsom/worker_pool.hpp"

namespace batchsom {

struct TrainedMap {
    CodeBook codebook;
    BmuTable bmus;
    UMatrix umatrix;
};

struct EpochReport {
    std::uint32_t epoch = 0;
    double radius = 0.0;
    double scale = 0.0;
    double quantizationError = 0.0;
};

/// Receives interim snapshots and final artifacts.
class OutputSink {
public:
    virtual ~OutputSink() = default;
    /// Snapshot level >= 1, after every epoch.
    virtual void umatrix_snapshot(std::uint32_t epoch, const UMatrix& u) = 0;
    /// Snapshot level 2, after every epoch.
    virtual void full_snapshot(std::uint32_t epoch, const CodeBook& cb, const BmuTable& bmus) = 0;
    virtual void final_outputs(const TrainedMap& map) = 0;
};

/// Writes .wts/.bm/.umx files named by `snapshot_paths(prefix, ...)`.
class FileSink final : public OutputSink {
public:
    explicit FileSink(std::string prefix);

    void umatrix_snapshot(std::uint32_t epoch, const UMatrix& u) override;
    void full_snapshot(std::uint32_t epoch, const CodeBook& cb, const BmuTable& bmus) override;
    void final_outputs(const TrainedMap& map) override;

private:
    std::string prefix_;
};

/// Random codebook with weights uniform in [0, 1), a pure function of
/// `cfg.seed`; or `initial` verbatim after shape checks
/// (ShapeError::CodebookShapeMismatch).
CodeBook init_codebook(const TrainConfig& cfg, std::size_t nDimensions, const HeaderedMatrix* initial = nullptr);

/// Loads an initial codebook file and validates it against the map.
CodeBook load_initial_codebook(const TrainConfig& cfg, std::size_t nDimensions, const std::string& path);

struct EpochResult {
    CodeBook codebook;
    BmuTable bmus;
    std::optional<UMatrix> umatrix;
    EpochReport report;
};

/// One batch epoch: schedules at `epoch`, BMU search and accumulation with the
/// configured kernel, blend, optional U-matrix.
EpochResult train_one_epoch(const DataView& data, const CodeBook& cb, const TrainConfig& cfg, std::uint32_t epoch,
                            bool computeUMatrix, WorkerPool& pool);
EpochResult train_one_epoch(const DataView& data, const CodeBook& cb, const TrainConfig& cfg, std::uint32_t epoch,
                            bool computeUMatrix, std::size_t workerThreads = 1);

struct TrainOptions {
    /// 0 selects the hardware concurrency.
    std::size_t workerThreads = 0;
    OutputSink* sink = nullptr;
    std::function<void(const EpochReport&)> onEpoch;
    /// Starting codebook; random initialisation when empty.
    std::optional<CodeBook> initialCodebook;
};

/// Checks data against config: kernel/representation agreement and an
/// initial codebook's shape.
void check_training_inputs(const DataView& data, const TrainConfig& cfg, const std::optional<CodeBook>& initial);

/// Runs every epoch, emitting snapshots per `cfg.snapshotLevel` and the final
/// artifacts to the sink.
TrainedMap train(const DataView& data, const TrainConfig& cfg, const TrainOptions& options = {});

}  // namespace batchsom
