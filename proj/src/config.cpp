#include "batchsom/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "batchsom/errors.hpp"

namespace batchsom {

Cooling parse_cooling(std::string_view name) {
    if (name == "linear") {
        return Cooling::Linear;
    }
    if (name == "exponential") {
        return Cooling::Exponential;
    }
    throw ConfigError("unknown cooling strategy '" + std::string(name) + "' (expected linear or exponential)");
}

std::string_view to_string(Cooling c) {
    return c == Cooling::Exponential ? "exponential" : "linear";
}

KernelType kernel_from_int(int k) {
    if (k < 0 || k > 2) {
        throw ConfigError("kernel type must be 0, 1 or 2, got " + std::to_string(k));
    }
    return static_cast<KernelType>(k);
}

void validate(const TrainConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError("invalid configuration: " + what); };
    if (cfg.nEpochs < 1) {
        fail("at least one epoch is required");
    }
    if (cfg.nSomX < 1 || cfg.nSomY < 1) {
        fail("map dimensions must be positive");
    }
    if (!std::isfinite(cfg.radius0) || !std::isfinite(cfg.radiusN) || cfg.radiusN <= 0.0) {
        fail("radii must be finite and positive");
    }
    if (cfg.radiusN > cfg.radius0) {
        fail("final radius " + std::to_string(cfg.radiusN) + " exceeds start radius " +
             std::to_string(cfg.radius0));
    }
    if (!std::isfinite(cfg.scale0) || !std::isfinite(cfg.scaleN) || cfg.scaleN <= 0.0) {
        fail("learning rates must be finite and positive");
    }
    if (cfg.scaleN > cfg.scale0) {
        fail("final learning rate " + std::to_string(cfg.scaleN) + " exceeds start rate " +
             std::to_string(cfg.scale0));
    }
    if (cfg.snapshotLevel < 0 || cfg.snapshotLevel > 2) {
        fail("snapshot level must be 0, 1 or 2");
    }
    if (!(cfg.influenceCutoff >= 0.0 && cfg.influenceCutoff < 1.0)) {
        fail("influence cutoff must lie in [0, 1)");
    }
    if (cfg.blockSize < 1) {
        fail("block size must be at least 1");
    }
}

TrainConfig resolve_defaults(const RawConfig& raw, std::uint32_t nSomX, std::uint32_t nSomY) {
    TrainConfig cfg;
    cfg.nEpochs = raw.nEpochs;
    cfg.nSomX = nSomX;
    cfg.nSomY = nSomY;
    cfg.mapType = raw.mapType;
    cfg.kernel = raw.kernel;
    cfg.radiusCooling = raw.radiusCooling;
    cfg.scaleCooling = raw.scaleCooling;
    cfg.snapshotLevel = raw.snapshotLevel;
    cfg.seed = raw.seed;
    cfg.influenceCutoff = raw.influenceCutoff;
    cfg.blockSize = raw.blockSize;

    cfg.radiusN = raw.radiusN == 0.0 ? 1.0 : raw.radiusN;
    if (raw.radius0 == 0.0) {
        // Never below the final radius.
        cfg.radius0 = std::max(std::min(nSomX, nSomY) / 2.0, cfg.radiusN);
    } else {
        cfg.radius0 = raw.radius0;
    }
    cfg.scale0 = raw.scale0 == 0.0 ? 1.0 : raw.scale0;
    cfg.scaleN = raw.scaleN == 0.0 ? 0.01 : raw.scaleN;

    validate(cfg);
    return cfg;
}

double schedule(double start, double end, Cooling cooling, std::uint32_t epoch, std::uint32_t nEpochs) {
    if (epoch == 0) {
        return start;
    }
    if (epoch + 1 >= nEpochs) {
        return end;
    }
    const double t = static_cast<double>(epoch) / static_cast<double>(std::max<std::uint32_t>(nEpochs - 1, 1));
    if (cooling == Cooling::Linear) {
        return std::lerp(start, end, t);
    }
    return start * std::pow(end / start, t);
}

EpochState epoch_state(const TrainConfig& cfg, std::uint32_t epoch) {
    return EpochState{epoch, schedule(cfg.radius0, cfg.radiusN, cfg.radiusCooling, epoch, cfg.nEpochs),
                      schedule(cfg.scale0, cfg.scaleN, cfg.scaleCooling, epoch, cfg.nEpochs)};
}

}  // namespace batchsom
