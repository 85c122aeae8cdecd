#include "batchsom/distributed/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include <zlib.h>

namespace batchsom::dist {

static_assert(std::endian::native == std::endian::little, "wire encoding assumes a little-endian host");

namespace {

std::string protocol_message(ProtocolError::Kind kind, const std::string& detail,
                             std::optional<std::uint32_t> rank) {
    std::string msg = to_string(kind);
    if (rank) {
        msg += "(rank " + std::to_string(*rank) + ")";
    }
    if (!detail.empty()) {
        msg += ": " + detail;
    }
    return msg;
}

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> bytes) {
    T v;
    std::memcpy(&v, bytes.data(), sizeof(T));
    return v;
}

}  // namespace

ProtocolError::ProtocolError(Kind kind, const std::string& detail, std::optional<std::uint32_t> rank)
    : Error(protocol_message(kind, detail, rank)), kind_(kind), rank_(rank) {}

const char* to_string(ProtocolError::Kind kind) {
    switch (kind) {
        case ProtocolError::Kind::WorkerLost: return "WorkerLost";
        case ProtocolError::Kind::CoordinatorLost: return "CoordinatorLost";
        case ProtocolError::Kind::VersionMismatch: return "VersionMismatch";
        case ProtocolError::Kind::ShapeMismatch: return "ShapeMismatch";
        case ProtocolError::Kind::Timeout: return "Timeout";
        case ProtocolError::Kind::ConnectionRefused: return "ConnectionRefused";
        case ProtocolError::Kind::ConnectionClosed: return "ConnectionClosed";
        case ProtocolError::Kind::FrameCorruption: return "FrameCorruption";
        case ProtocolError::Kind::MalformedMessage: return "MalformedMessage";
        case ProtocolError::Kind::UnexpectedMessage: return "UnexpectedMessage";
    }
    return "ProtocolError";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    const std::uint8_t* p = bytes.data();
    std::size_t left = bytes.size();
    while (left > 0) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
        crc = ::crc32(crc, p, n);
        p += n;
        left -= n;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_frame(std::uint8_t tag, std::span<const std::uint8_t> payload) {
    if (payload.size() > kMaxPayload) {
        throw ProtocolError(ProtocolError::Kind::MalformedMessage,
                            "payload of " + std::to_string(payload.size()) + " bytes exceeds frame limit");
    }
    std::vector<std::uint8_t> out;
    out.reserve(payload.size() + kFrameOverhead);
    out.insert(out.end(), kFrameMagic.begin(), kFrameMagic.end());
    out.push_back(tag);
    put(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    put(out, crc32(payload));
    return out;
}

std::uint32_t payload_length(std::span<const std::uint8_t> header) {
    if (header.size() < kFrameHeaderSize || !std::equal(kFrameMagic.begin(), kFrameMagic.end(), header.begin())) {
        throw ProtocolError(ProtocolError::Kind::FrameCorruption, "bad frame magic");
    }
    const auto length = get<std::uint32_t>(header.subspan(5));
    if (length > kMaxPayload) {
        throw ProtocolError(ProtocolError::Kind::FrameCorruption, "frame length " + std::to_string(length));
    }
    return length;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
    const std::uint32_t length = payload_length(bytes);
    if (bytes.size() != kFrameOverhead + length) {
        throw ProtocolError(ProtocolError::Kind::FrameCorruption,
                            "frame is " + std::to_string(bytes.size()) + " bytes, header says " +
                                std::to_string(kFrameOverhead + length));
    }
    const auto payload = bytes.subspan(kFrameHeaderSize, length);
    const auto expected = get<std::uint32_t>(bytes.subspan(kFrameHeaderSize + length));
    if (crc32(payload) != expected) {
        throw ProtocolError(ProtocolError::Kind::FrameCorruption, "checksum mismatch");
    }
    return Frame{bytes[4], std::vector<std::uint8_t>(payload.begin(), payload.end())};
}

void ByteWriter::u32(std::uint32_t v) { put(bytes_, v); }
void ByteWriter::u64(std::uint64_t v) { put(bytes_, v); }
void ByteWriter::f64(double v) { put(bytes_, v); }

void ByteWriter::floats(std::span<const float> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
}

void ByteWriter::u32s(std::span<const std::uint32_t> values) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
    bytes_.insert(bytes_.end(), p, p + values.size_bytes());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
    if (n > remaining()) {
        throw ProtocolError(ProtocolError::Kind::MalformedMessage, "truncated payload");
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }
std::uint32_t ByteReader::u32() { return get<std::uint32_t>(take(4)); }
std::uint64_t ByteReader::u64() { return get<std::uint64_t>(take(8)); }
double ByteReader::f64() { return get<double>(take(8)); }

std::vector<float> ByteReader::floats(std::size_t count) {
    if (count > remaining() / sizeof(float)) {
        throw ProtocolError(ProtocolError::Kind::MalformedMessage, "truncated float array");
    }
    auto s = take(count * sizeof(float));
    std::vector<float> out(count);
    std::memcpy(out.data(), s.data(), s.size());
    return out;
}

std::vector<std::uint32_t> ByteReader::u32s(std::size_t count) {
    if (count > remaining() / sizeof(std::uint32_t)) {
        throw ProtocolError(ProtocolError::Kind::MalformedMessage, "truncated index array");
    }
    auto s = take(count * sizeof(std::uint32_t));
    std::vector<std::uint32_t> out(count);
    std::memcpy(out.data(), s.data(), s.size());
    return out;
}

void ByteReader::finish() const {
    if (remaining() != 0) {
        throw ProtocolError(ProtocolError::Kind::MalformedMessage,
                            std::to_string(remaining()) + " trailing bytes in payload");
    }
}

}  // namespace batchsom::dist
