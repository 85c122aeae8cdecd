#pragma once

// Frame layout, all integers little-endian:
//   magic "BSOM" (4) | tag (1) | payload length (4) | payload | CRC32 of payload (4)

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "batchsom/errors.hpp"

namespace batchsom::dist {

class ProtocolError : public Error {
public:
    enum class Kind {
        WorkerLost,
        CoordinatorLost,
        VersionMismatch,
        ShapeMismatch,
        Timeout,
        ConnectionRefused,
        ConnectionClosed,
        FrameCorruption,
        MalformedMessage,
        UnexpectedMessage,
    };

    ProtocolError(Kind kind, const std::string& detail, std::optional<std::uint32_t> rank = std::nullopt);

    Kind kind() const noexcept { return kind_; }
    std::optional<std::uint32_t> rank() const noexcept { return rank_; }

private:
    Kind kind_;
    std::optional<std::uint32_t> rank_;
};

const char* to_string(ProtocolError::Kind kind);

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'B', 'S', 'O', 'M'};
inline constexpr std::size_t kFrameHeaderSize = 9;
inline constexpr std::size_t kFrameTrailerSize = 4;
inline constexpr std::size_t kFrameOverhead = kFrameHeaderSize + kFrameTrailerSize;
/// Upper bound on a payload; larger length fields are treated as corruption.
inline constexpr std::uint32_t kMaxPayload = 1u << 30;

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

struct Frame {
    std::uint8_t tag = 0;
    std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_frame(std::uint8_t tag, std::span<const std::uint8_t> payload);

/// Validates magic and length of a 9-byte header and returns the payload
/// length.
std::uint32_t payload_length(std::span<const std::uint8_t> header);

/// Decodes one complete frame; throws FrameCorruption on bad magic, length or
/// checksum.
Frame decode_frame(std::span<const std::uint8_t> bytes);

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void floats(std::span<const float> values);
    void u32s(std::span<const std::uint32_t> values);

    std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Reads back what ByteWriter wrote; throws MalformedMessage on truncation.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::vector<float> floats(std::size_t count);
    std::vector<std::uint32_t> u32s(std::size_t count);

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    /// Throws MalformedMessage unless every byte was consumed.
    void finish() const;

private:
    std::span<const std::uint8_t> take(std::size_t n);

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace batchsom::dist
