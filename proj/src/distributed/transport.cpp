#include "batchsom/distributed/transport.hpp"

#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <thread>

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace batchsom::dist {

void TrafficLog::record(std::uint32_t peer, Direction direction, Tag tag, std::size_t bytes) {
    std::lock_guard lock(mutex_);
    events_.push_back(TrafficEvent{events_.size(), peer, direction, tag, bytes});
    const auto t = static_cast<std::size_t>(tag);
    if (t < kTagCount) {
        bytes_[static_cast<std::size_t>(direction)][t] += bytes;
    }
}

std::vector<TrafficEvent> TrafficLog::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

std::uint64_t TrafficLog::bytes(Direction direction, Tag tag) const {
    std::lock_guard lock(mutex_);
    return bytes_[static_cast<std::size_t>(direction)][static_cast<std::size_t>(tag)];
}

std::uint64_t TrafficLog::total(Direction direction) const {
    std::lock_guard lock(mutex_);
    std::uint64_t sum = 0;
    for (auto b : bytes_[static_cast<std::size_t>(direction)]) {
        sum += b;
    }
    return sum;
}

void Channel::send(const Message& m) {
    auto frame = encode_message(m);
    const std::size_t size = frame.size();
    write_frame(std::move(frame));
    if (log_) {
        log_->record(peer_, Direction::Sent, tag_of(m), size);
    }
}

Message Channel::receive(std::optional<Millis> timeout) {
    const auto bytes = read_frame(timeout);
    Message m = decode_message(decode_frame(bytes));
    if (log_) {
        log_->record(peer_, Direction::Received, tag_of(m), bytes.size());
    }
    return m;
}

void Channel::attach_log(std::shared_ptr<TrafficLog> log, std::uint32_t peer) {
    log_ = std::move(log);
    peer_ = peer;
}

namespace {

[[noreturn]] void fail(ProtocolError::Kind kind, const std::string& detail) {
    throw ProtocolError(kind, detail);
}

struct Pipe {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::vector<std::uint8_t>> frames;
    bool closed = false;
};

class InprocChannel final : public Channel {
public:
    InprocChannel(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out) : in_(std::move(in)), out_(std::move(out)) {}
    ~InprocChannel() override { close(); }

    void close() override {
        for (auto* p : {in_.get(), out_.get()}) {
            std::lock_guard lock(p->mutex);
            p->closed = true;
            p->cv.notify_all();
        }
    }

protected:
    void write_frame(std::vector<std::uint8_t> frame) override {
        std::lock_guard lock(out_->mutex);
        if (out_->closed) {
            fail(ProtocolError::Kind::ConnectionClosed, "in-process peer closed");
        }
        out_->frames.push_back(std::move(frame));
        out_->cv.notify_one();
    }

    std::vector<std::uint8_t> read_frame(std::optional<Millis> timeout) override {
        std::unique_lock lock(in_->mutex);
        auto ready = [&] { return !in_->frames.empty() || in_->closed; };
        if (timeout) {
            if (!in_->cv.wait_for(lock, *timeout, ready)) {
                fail(ProtocolError::Kind::Timeout, "no frame within " + std::to_string(timeout->count()) + " ms");
            }
        } else {
            in_->cv.wait(lock, ready);
        }
        if (in_->frames.empty()) {
            fail(ProtocolError::Kind::ConnectionClosed, "in-process peer closed");
        }
        auto frame = std::move(in_->frames.front());
        in_->frames.pop_front();
        return frame;
    }

private:
    std::shared_ptr<Pipe> in_;
    std::shared_ptr<Pipe> out_;
};

using Clock = std::chrono::steady_clock;

class TcpChannel final : public Channel {
public:
    explicit TcpChannel(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpChannel() override {
        close();
        ::close(fd_);
    }

    void close() override { ::shutdown(fd_, SHUT_RDWR); }

protected:
    void write_frame(std::vector<std::uint8_t> frame) override {
        std::size_t sent = 0;
        while (sent < frame.size()) {
            const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                fail(ProtocolError::Kind::ConnectionClosed, std::string("send: ") + std::strerror(errno));
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    std::vector<std::uint8_t> read_frame(std::optional<Millis> timeout) override {
        std::optional<Clock::time_point> deadline;
        if (timeout) {
            deadline = Clock::now() + *timeout;
        }
        std::vector<std::uint8_t> frame(kFrameHeaderSize);
        read_exact(frame.data(), kFrameHeaderSize, deadline);
        const std::uint32_t length = payload_length(frame);
        frame.resize(kFrameOverhead + length);
        read_exact(frame.data() + kFrameHeaderSize, length + kFrameTrailerSize, deadline);
        return frame;
    }

private:
    void read_exact(std::uint8_t* dst, std::size_t count, std::optional<Clock::time_point> deadline) {
        std::size_t got = 0;
        while (got < count) {
            int waitMs = -1;
            if (deadline) {
                const auto left = std::chrono::duration_cast<Millis>(*deadline - Clock::now()).count();
                if (left <= 0) {
                    fail(ProtocolError::Kind::Timeout, "socket read deadline passed");
                }
                waitMs = static_cast<int>(std::min<long long>(left, 1 << 30));
            }
            pollfd p{fd_, POLLIN, 0};
            const int r = ::poll(&p, 1, waitMs);
            if (r < 0) {
                if (errno == EINTR) {
                    continue;
                }
                fail(ProtocolError::Kind::ConnectionClosed, std::string("poll: ") + std::strerror(errno));
            }
            if (r == 0) {
                fail(ProtocolError::Kind::Timeout, "socket read deadline passed");
            }
            const ssize_t n = ::recv(fd_, dst + got, count - got, 0);
            if (n == 0) {
                fail(ProtocolError::Kind::ConnectionClosed, "peer closed the connection");
            }
            if (n < 0) {
                if (errno == EINTR || errno == EAGAIN) {
                    continue;
                }
                fail(ProtocolError::Kind::ConnectionClosed, std::string("recv: ") + std::strerror(errno));
            }
            got += static_cast<std::size_t>(n);
        }
    }

    int fd_;
};

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo() {
        if (head != nullptr) {
            ::freeaddrinfo(head);
        }
    }
};

void resolve(const Endpoint& where, bool passive, AddrInfo& out) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = passive ? AI_PASSIVE : 0;
    const std::string port = std::to_string(where.port);
    const char* host = where.host.empty() ? (passive ? nullptr : "127.0.0.1") : where.host.c_str();
    const int rc = ::getaddrinfo(host, port.c_str(), &hints, &out.head);
    if (rc != 0) {
        fail(ProtocolError::Kind::ConnectionRefused,
             "cannot resolve '" + where.host + "': " + ::gai_strerror(rc));
    }
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> inproc_pair() {
    auto a = std::make_shared<Pipe>();
    auto b = std::make_shared<Pipe>();
    return {std::make_unique<InprocChannel>(a, b), std::make_unique<InprocChannel>(b, a)};
}

Endpoint parse_endpoint(const std::string& text) {
    const auto colon = text.rfind(':');
    const std::string portText = colon == std::string::npos ? text : text.substr(colon + 1);
    unsigned port = 0;
    const auto [ptr, ec] = std::from_chars(portText.data(), portText.data() + portText.size(), port);
    if (ec != std::errc{} || ptr != portText.data() + portText.size() || port > 65535) {
        throw ConfigError("bad endpoint '" + text + "': expected host:port");
    }
    Endpoint e;
    e.host = colon == std::string::npos ? std::string() : text.substr(0, colon);
    e.port = static_cast<std::uint16_t>(port);
    return e;
}

TcpListener::TcpListener(const Endpoint& where) {
    AddrInfo info;
    resolve(where, true, info);
    std::string lastError = "no address";
    for (addrinfo* ai = info.head; ai != nullptr; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            lastError = std::strerror(errno);
            continue;
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            fd_ = fd;
            break;
        }
        lastError = std::strerror(errno);
        ::close(fd);
    }
    if (fd_ < 0) {
        fail(ProtocolError::Kind::ConnectionRefused, "cannot listen on port " + std::to_string(where.port) + ": " +
                                                         lastError);
    }
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                       : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

std::unique_ptr<Channel> TcpListener::accept(Millis timeout) {
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (r <= 0) {
        fail(ProtocolError::Kind::Timeout, "no worker connected within " + std::to_string(timeout.count()) + " ms");
    }
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) {
        fail(ProtocolError::Kind::ConnectionRefused, std::string("accept: ") + std::strerror(errno));
    }
    return std::make_unique<TcpChannel>(fd);
}

std::unique_ptr<Channel> connect_tcp(const Endpoint& where, Millis timeout) {
    const auto deadline = Clock::now() + timeout;
    std::string lastError;
    do {
        AddrInfo info;
        resolve(where, false, info);
        for (addrinfo* ai = info.head; ai != nullptr; ai = ai->ai_next) {
            const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) {
                lastError = std::strerror(errno);
                continue;
            }
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                return std::make_unique<TcpChannel>(fd);
            }
            lastError = std::strerror(errno);
            ::close(fd);
        }
        std::this_thread::sleep_for(Millis(50));
    } while (Clock::now() < deadline);
    fail(ProtocolError::Kind::ConnectionRefused,
         "cannot connect to " + where.host + ":" + std::to_string(where.port) + ": " + lastError);
}

}  // namespace batchsom::dist
