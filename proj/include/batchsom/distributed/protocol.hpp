#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "batchsom/distributed/transport.hpp"
#include "batchsom/training.hpp"

namespace batchsom::dist {

struct ChunkRange {
    std::uint64_t firstInstance = 0;
    std::uint64_t instanceCount = 0;

    friend bool operator==(const ChunkRange&, const ChunkRange&) = default;
};

/// Contiguous ranges in rank order; rank r gets floor(n/P) instances plus one
/// if r < n mod P.
std::vector<ChunkRange> partition(std::uint64_t nVectors, std::uint32_t workers);

struct CoordinatorOptions {
    Millis handshakeTimeout{30'000};
    /// Deadline for all accumulators of one epoch to arrive.
    Millis epochTimeout{300'000};
    /// Threads for local work: the whole computation when P = 1.
    std::size_t localThreads = 0;
    OutputSink* sink = nullptr;
    std::function<void(const EpochReport&)> onEpoch;
    std::optional<CodeBook> initialCodebook;
    /// Records every frame on every worker channel, tagged by rank.
    std::shared_ptr<TrafficLog> log;
};

/// Drives P = workers.size() workers through a full training run.
///
/// With P >= 2 the coordinator only reduces: per epoch it broadcasts the
/// codebook, waits for every rank's accumulators, merges them in rank order
/// and blends. With P = 1 it computes locally after the handshake, so the
/// result equals `train` bit for bit. Any failure aborts the run; a dropped
/// connection surfaces as WorkerLost naming the rank.
TrainedMap coordinator_run(const DataView& data, const TrainConfig& cfg, std::vector<std::unique_ptr<Channel>> workers,
                           const CoordinatorOptions& options = {});

struct WorkerOptions {
    std::size_t threads = 0;
    std::uint32_t proposedRank = kAnyRank;
    /// Longest silence from the coordinator before giving up.
    Millis timeout{600'000};
};

struct WorkerSummary {
    std::uint32_t rank = 0;
    std::uint32_t epochsServed = 0;
};

/// Serves one coordinator until Shutdown. Throws CoordinatorLost when the
/// link drops and ShapeMismatch on inconsistent assignments.
WorkerSummary worker_run(Channel& coordinator, const WorkerOptions& options = {});

/// Accepts `count` worker connections.
std::vector<std::unique_ptr<Channel>> accept_workers(TcpListener& listener, std::uint32_t count, Millis timeout);

}  // namespace batchsom::dist
