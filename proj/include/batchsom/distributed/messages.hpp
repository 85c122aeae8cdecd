#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "batchsom/config.hpp"
#include "batchsom/dataset.hpp"
#include "batchsom/distributed/wire.hpp"

namespace batchsom::dist {

inline constexpr std::uint32_t kProtocolVersion = 1;
/// Hello rank from a worker that lets the coordinator choose.
inline constexpr std::uint32_t kAnyRank = std::numeric_limits<std::uint32_t>::max();

enum class Tag : std::uint8_t {
    Hello = 1,
    AssignMeta = 2,
    AssignChunk = 3,
    BroadcastCodebook = 4,
    LocalAccumulators = 5,
    EpochAck = 6,
    Shutdown = 7,
};

inline constexpr std::size_t kTagCount = 8;

const char* to_string(Tag tag);

/// Worker -> coordinator: proposed rank. Coordinator -> worker: assigned rank.
struct Hello {
    std::uint32_t rank = kAnyRank;
    std::uint32_t protocolVersion = kProtocolVersion;
};

struct AssignMeta {
    TrainConfig config;
    std::uint32_t nDimensions = 0;
    std::uint32_t workerCount = 0;
    std::uint64_t totalInstances = 0;
};

struct AssignChunk {
    std::uint64_t firstInstance = 0;
    std::uint64_t instanceCount = 0;
    Dataset data;
};

struct BroadcastCodebook {
    std::uint32_t epoch = 0;
    std::vector<float> weights;
};

struct LocalAccumulators {
    std::uint32_t epoch = 0;
    std::uint32_t rank = 0;
    std::vector<float> numerators;
    std::vector<float> denominators;
    /// Flat BMU node per local instance; empty unless requested for this epoch.
    std::vector<std::uint32_t> bmuNodes;
    /// Sum of Euclidean distances to the BMUs, for the quantization error.
    double distanceSum = 0.0;
};

/// Worker -> coordinator: chunk stored, ready for `epoch`.
struct EpochAck {
    std::uint32_t epoch = 0;
};

struct Shutdown {};

using Message =
    std::variant<Hello, AssignMeta, AssignChunk, BroadcastCodebook, LocalAccumulators, EpochAck, Shutdown>;

Tag tag_of(const Message& m) noexcept;

/// Canonical byte encoding of a config; its CRC32 is the digest carried in
/// AssignMeta.
std::vector<std::uint8_t> serialize_config(const TrainConfig& cfg);
std::uint32_t config_digest(const TrainConfig& cfg);

std::vector<std::uint8_t> encode_payload(const Message& m);
Message decode_payload(Tag tag, std::span<const std::uint8_t> payload);

/// Complete wire frame for a message.
std::vector<std::uint8_t> encode_message(const Message& m);
Message decode_message(const Frame& frame);

}  // namespace batchsom::dist
