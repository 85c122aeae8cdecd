#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "batchsom/grid.hpp"

namespace batchsom {

enum class Cooling { Linear, Exponential };

/// Kernel slots keep the numbering of the command-line `-k` flag.
enum class KernelType : int { DenseNaive = 0, DenseBlocked = 1, Sparse = 2 };

Cooling parse_cooling(std::string_view name);
std::string_view to_string(Cooling c);
KernelType kernel_from_int(int k);

inline constexpr double kDefaultInfluenceCutoff = 1e-3;
inline constexpr std::size_t kDefaultBlockSize = 256;

/// Fully resolved training parameters.
struct TrainConfig {
    std::uint32_t nEpochs = 10;
    std::uint32_t nSomX = 50;
    std::uint32_t nSomY = 50;
    MapType mapType = MapType::Planar;
    KernelType kernel = KernelType::DenseNaive;
    double radius0 = 25.0;
    double radiusN = 1.0;
    Cooling radiusCooling = Cooling::Linear;
    double scale0 = 1.0;
    double scaleN = 0.01;
    Cooling scaleCooling = Cooling::Linear;
    int snapshotLevel = 0;
    std::uint32_t seed = 1;
    /// Neighbourhood contributions below this weight are skipped; 0 keeps all.
    double influenceCutoff = kDefaultInfluenceCutoff;
    /// Instances per distance block in the Gram-matrix kernel.
    std::size_t blockSize = kDefaultBlockSize;

    GridShape shape() const noexcept { return GridShape{nSomX, nSomY, mapType}; }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws ConfigError when the invariants of a resolved config do not hold.
void validate(const TrainConfig& cfg);

/// User-facing parameters where 0 means "use the default" for the radius and
/// scale endpoints.
struct RawConfig {
    std::uint32_t nEpochs = 10;
    MapType mapType = MapType::Planar;
    KernelType kernel = KernelType::DenseNaive;
    double radius0 = 0.0;
    double radiusN = 0.0;
    Cooling radiusCooling = Cooling::Linear;
    double scale0 = 0.0;
    double scaleN = 0.0;
    Cooling scaleCooling = Cooling::Linear;
    int snapshotLevel = 0;
    std::uint32_t seed = 1;
    double influenceCutoff = kDefaultInfluenceCutoff;
    std::size_t blockSize = kDefaultBlockSize;
};

TrainConfig resolve_defaults(const RawConfig& raw, std::uint32_t nSomX, std::uint32_t nSomY);

/// Value of a cooling schedule at `epoch`. Returns `start` exactly at epoch 0
/// and `end` exactly at epoch nEpochs - 1; with a single epoch it returns
/// `start`.
double schedule(double start, double end, Cooling cooling, std::uint32_t epoch, std::uint32_t nEpochs);

struct EpochState {
    std::uint32_t currentEpoch = 0;
    double radius = 0.0;
    double scale = 0.0;
};

EpochState epoch_state(const TrainConfig& cfg, std::uint32_t epoch);

}  // namespace batchsom
