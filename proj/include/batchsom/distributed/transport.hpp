#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "batchsom/distributed/messages.hpp"

namespace batchsom::dist {

using Millis = std::chrono::milliseconds;

enum class Direction { Sent, Received };

struct TrafficEvent {
    std::uint64_t sequence = 0;
    std::uint32_t peer = 0;
    Direction direction = Direction::Sent;
    Tag tag = Tag::Hello;
    std::size_t bytes = 0;  // whole frame, header and checksum included
};

/// Thread-safe record of every frame moved by the channels attached to it.
class TrafficLog {
public:
    void record(std::uint32_t peer, Direction direction, Tag tag, std::size_t bytes);

    std::vector<TrafficEvent> events() const;
    std::uint64_t bytes(Direction direction, Tag tag) const;
    std::uint64_t total(Direction direction) const;

private:
    mutable std::mutex mutex_;
    std::vector<TrafficEvent> events_;
    std::array<std::array<std::uint64_t, kTagCount>, 2> bytes_{};
};

/// Ordered, reliable, message-framed duplex link.
class Channel {
public:
    virtual ~Channel() = default;

    void send(const Message& m);
    /// Blocks until a frame arrives. Throws ProtocolError: Timeout,
    /// ConnectionClosed, FrameCorruption or MalformedMessage.
    Message receive(std::optional<Millis> timeout = std::nullopt);

    /// Writes pre-encoded frame bytes unchanged.
    void send_raw(std::vector<std::uint8_t> frame) { write_frame(std::move(frame)); }

    /// Unblocks pending receives on both ends; later sends fail.
    virtual void close() = 0;

    void attach_log(std::shared_ptr<TrafficLog> log, std::uint32_t peer);

protected:
    virtual void write_frame(std::vector<std::uint8_t> frame) = 0;
    virtual std::vector<std::uint8_t> read_frame(std::optional<Millis> timeout) = 0;

private:
    std::shared_ptr<TrafficLog> log_;
    std::uint32_t peer_ = 0;
};

/// Two connected in-process endpoints. Frames are encoded and checksummed
/// exactly as on a socket.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> inproc_pair();

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};

/// Parses "host:port" (host may be empty for the listen side).
Endpoint parse_endpoint(const std::string& text);

class TcpListener {
public:
    explicit TcpListener(const Endpoint& where);
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    /// Bound port; useful after listening on port 0.
    std::uint16_t port() const noexcept { return port_; }
    std::unique_ptr<Channel> accept(Millis timeout);

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Connects, retrying refused attempts until `timeout`; then throws
/// ConnectionRefused.
std::unique_ptr<Channel> connect_tcp(const Endpoint& where, Millis timeout);

}  // namespace batchsom::dist
