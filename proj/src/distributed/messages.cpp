#include "batchsom/distributed/messages.hpp"

#include <type_traits>

namespace batchsom::dist {

namespace {

[[noreturn]] void malformed(const std::string& detail) {
    throw ProtocolError(ProtocolError::Kind::MalformedMessage, detail);
}

template <class E>
E read_enum(ByteReader& r, std::uint8_t maxValue, const char* what) {
    const std::uint8_t v = r.u8();
    if (v > maxValue) {
        malformed(std::string("bad ") + what + " " + std::to_string(v));
    }
    return static_cast<E>(v);
}

void write_config(ByteWriter& w, const TrainConfig& cfg) {
    w.u32(cfg.nEpochs);
    w.u32(cfg.nSomX);
    w.u32(cfg.nSomY);
    w.u8(static_cast<std::uint8_t>(cfg.mapType));
    w.u8(static_cast<std::uint8_t>(cfg.kernel));
    w.f64(cfg.radius0);
    w.f64(cfg.radiusN);
    w.u8(static_cast<std::uint8_t>(cfg.radiusCooling));
    w.f64(cfg.scale0);
    w.f64(cfg.scaleN);
    w.u8(static_cast<std::uint8_t>(cfg.scaleCooling));
    w.u8(static_cast<std::uint8_t>(cfg.snapshotLevel));
    w.u32(cfg.seed);
    w.f64(cfg.influenceCutoff);
    w.u64(cfg.blockSize);
}

TrainConfig read_config(ByteReader& r) {
    TrainConfig cfg;
    cfg.nEpochs = r.u32();
    cfg.nSomX = r.u32();
    cfg.nSomY = r.u32();
    cfg.mapType = read_enum<MapType>(r, 1, "map type");
    cfg.kernel = read_enum<KernelType>(r, 2, "kernel");
    cfg.radius0 = r.f64();
    cfg.radiusN = r.f64();
    cfg.radiusCooling = read_enum<Cooling>(r, 1, "cooling");
    cfg.scale0 = r.f64();
    cfg.scaleN = r.f64();
    cfg.scaleCooling = read_enum<Cooling>(r, 1, "cooling");
    cfg.snapshotLevel = r.u8();
    cfg.seed = r.u32();
    cfg.influenceCutoff = r.f64();
    cfg.blockSize = r.u64();
    return cfg;
}

std::size_t checked_product(std::uint64_t a, std::uint64_t b) {
    if (b != 0 && a > kMaxPayload / b) {
        malformed("matrix shape " + std::to_string(a) + "x" + std::to_string(b) + " too large");
    }
    return static_cast<std::size_t>(a * b);
}

void write_dataset(ByteWriter& w, const Dataset& data) {
    if (const auto* dense = std::get_if<DenseDataset>(&data)) {
        w.u8(0);
        w.u64(dense->nVectors);
        w.u64(dense->nDimensions);
        w.floats(dense->values);
        return;
    }
    const auto& sparse = std::get<SparseDataset>(data);
    w.u8(1);
    w.u64(sparse.nVectors);
    w.u64(sparse.nDimensions);
    w.u64(sparse.nonzeros());
    for (std::size_t off : sparse.rowOffsets) {
        w.u64(off);
    }
    w.u32s(sparse.colIndices);
    w.floats(sparse.values);
}

Dataset read_dataset(ByteReader& r) {
    const std::uint8_t kind = r.u8();
    const std::uint64_t n = r.u64();
    const std::uint64_t d = r.u64();
    if (kind == 0) {
        const std::size_t count = checked_product(n, d);
        return DenseDataset(n, d, r.floats(count));
    }
    if (kind != 1) {
        malformed("bad dataset kind " + std::to_string(kind));
    }
    const std::uint64_t nnz = r.u64();
    if (n >= r.remaining() / 8 || nnz > kMaxPayload) {
        malformed("sparse chunk shape exceeds payload");
    }
    SparseDataset s;
    s.nVectors = n;
    s.nDimensions = d;
    s.rowOffsets.resize(n + 1);
    for (auto& off : s.rowOffsets) {
        off = r.u64();
    }
    s.colIndices = r.u32s(nnz);
    s.values = r.floats(nnz);
    if (s.rowOffsets.front() != 0 || s.rowOffsets.back() != nnz) {
        malformed("sparse row offsets do not span the nonzeros");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (s.rowOffsets[i] > s.rowOffsets[i + 1]) {
            malformed("sparse row offsets decrease");
        }
    }
    for (std::uint32_t c : s.colIndices) {
        if (c >= d) {
            malformed("sparse column index out of range");
        }
    }
    return s;
}

std::vector<float> read_float_array(ByteReader& r) {
    const std::uint64_t count = r.u64();
    if (count > r.remaining()) {
        malformed("array length exceeds payload");
    }
    return r.floats(count);
}

}  // namespace

const char* to_string(Tag tag) {
    switch (tag) {
        case Tag::Hello: return "Hello";
        case Tag::AssignMeta: return "AssignMeta";
        case Tag::AssignChunk: return "AssignChunk";
        case Tag::BroadcastCodebook: return "BroadcastCodebook";
        case Tag::LocalAccumulators: return "LocalAccumulators";
        case Tag::EpochAck: return "EpochAck";
        case Tag::Shutdown: return "Shutdown";
    }
    return "Unknown";
}

Tag tag_of(const Message& m) noexcept {
    return static_cast<Tag>(m.index() + 1);
}

std::vector<std::uint8_t> serialize_config(const TrainConfig& cfg) {
    ByteWriter w;
    write_config(w, cfg);
    return std::move(w.bytes());
}

std::uint32_t config_digest(const TrainConfig& cfg) {
    return crc32(serialize_config(cfg));
}

std::vector<std::uint8_t> encode_payload(const Message& m) {
    ByteWriter w;
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, Hello>) {
                w.u32(msg.rank);
                w.u32(msg.protocolVersion);
            } else if constexpr (std::is_same_v<T, AssignMeta>) {
                write_config(w, msg.config);
                w.u32(config_digest(msg.config));
                w.u32(msg.nDimensions);
                w.u32(msg.workerCount);
                w.u64(msg.totalInstances);
            } else if constexpr (std::is_same_v<T, AssignChunk>) {
                w.u64(msg.firstInstance);
                w.u64(msg.instanceCount);
                write_dataset(w, msg.data);
            } else if constexpr (std::is_same_v<T, BroadcastCodebook>) {
                w.u32(msg.epoch);
                w.u64(msg.weights.size());
                w.floats(msg.weights);
            } else if constexpr (std::is_same_v<T, LocalAccumulators>) {
                w.u32(msg.epoch);
                w.u32(msg.rank);
                w.u64(msg.numerators.size());
                w.floats(msg.numerators);
                w.u64(msg.denominators.size());
                w.floats(msg.denominators);
                w.u64(msg.bmuNodes.size());
                w.u32s(msg.bmuNodes);
                w.f64(msg.distanceSum);
            } else if constexpr (std::is_same_v<T, EpochAck>) {
                w.u32(msg.epoch);
            }
        },
        m);
    return std::move(w.bytes());
}

Message decode_payload(Tag tag, std::span<const std::uint8_t> payload) {
    ByteReader r(payload);
    Message out;
    switch (tag) {
        case Tag::Hello: {
            Hello h;
            h.rank = r.u32();
            h.protocolVersion = r.u32();
            out = h;
            break;
        }
        case Tag::AssignMeta: {
            AssignMeta meta;
            meta.config = read_config(r);
            if (r.u32() != config_digest(meta.config)) {
                malformed("config digest mismatch");
            }
            meta.nDimensions = r.u32();
            meta.workerCount = r.u32();
            meta.totalInstances = r.u64();
            out = meta;
            break;
        }
        case Tag::AssignChunk: {
            AssignChunk chunk;
            chunk.firstInstance = r.u64();
            chunk.instanceCount = r.u64();
            chunk.data = read_dataset(r);
            if (vector_count(view_of(chunk.data)) != chunk.instanceCount) {
                malformed("chunk instance count disagrees with its data");
            }
            out = std::move(chunk);
            break;
        }
        case Tag::BroadcastCodebook: {
            BroadcastCodebook b;
            b.epoch = r.u32();
            b.weights = read_float_array(r);
            out = std::move(b);
            break;
        }
        case Tag::LocalAccumulators: {
            LocalAccumulators acc;
            acc.epoch = r.u32();
            acc.rank = r.u32();
            acc.numerators = read_float_array(r);
            acc.denominators = read_float_array(r);
            const std::uint64_t bmuCount = r.u64();
            if (bmuCount > r.remaining()) {
                malformed("array length exceeds payload");
            }
            acc.bmuNodes = r.u32s(bmuCount);
            acc.distanceSum = r.f64();
            out = std::move(acc);
            break;
        }
        case Tag::EpochAck:
            out = EpochAck{r.u32()};
            break;
        case Tag::Shutdown:
            out = Shutdown{};
            break;
        default:
            malformed("unknown message tag " + std::to_string(static_cast<int>(tag)));
    }
    r.finish();
    return out;
}

std::vector<std::uint8_t> encode_message(const Message& m) {
    return encode_frame(static_cast<std::uint8_t>(tag_of(m)), encode_payload(m));
}

Message decode_message(const Frame& frame) {
    return decode_payload(static_cast<Tag>(frame.tag), frame.payload);
}

}  // namespace batchsom::dist
