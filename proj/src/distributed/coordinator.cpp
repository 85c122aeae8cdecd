#include <atomic>
#include <condition_variable>
#include <deque>
#include <thread>

#include "batchsom/distributed/protocol.hpp"
#include "batchsom/kernels.hpp"
#include "batchsom/umatrix.hpp"

namespace batchsom::dist {

std::vector<ChunkRange> partition(std::uint64_t nVectors, std::uint32_t workers) {
    if (workers == 0) {
        throw ConfigError("partition needs at least one worker");
    }
    std::vector<ChunkRange> out(workers);
    const std::uint64_t base = nVectors / workers;
    const std::uint64_t extra = nVectors % workers;
    std::uint64_t first = 0;
    for (std::uint32_t r = 0; r < workers; ++r) {
        out[r].firstInstance = first;
        out[r].instanceCount = base + (r < extra ? 1 : 0);
        first += out[r].instanceCount;
    }
    return out;
}

std::vector<std::unique_ptr<Channel>> accept_workers(TcpListener& listener, std::uint32_t count, Millis timeout) {
    std::vector<std::unique_ptr<Channel>> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        out.push_back(listener.accept(timeout));
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Inbound {
    std::uint32_t rank = 0;
    std::optional<Message> message;
    std::exception_ptr error;
};

class Inbox {
public:
    void push(Inbound in) {
        std::lock_guard lock(mutex_);
        queue_.push_back(std::move(in));
        cv_.notify_one();
    }

    std::optional<Inbound> pop(Clock::time_point deadline) {
        std::unique_lock lock(mutex_);
        if (!cv_.wait_until(lock, deadline, [&] { return !queue_.empty(); })) {
            return std::nullopt;
        }
        Inbound in = std::move(queue_.front());
        queue_.pop_front();
        return in;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Inbound> queue_;
};

ProtocolError with_rank(const ProtocolError& e, std::uint32_t rank) {
    if (e.kind() == ProtocolError::Kind::ConnectionClosed) {
        return ProtocolError(ProtocolError::Kind::WorkerLost, "connection dropped", rank);
    }
    return ProtocolError(e.kind(), e.what(), rank);
}

[[noreturn]] void unexpected(const Message& m, std::uint32_t rank, const char* expected) {
    throw ProtocolError(ProtocolError::Kind::UnexpectedMessage,
                        std::string("got ") + to_string(tag_of(m)) + ", expected " + expected, rank);
}

class Coordinator {
public:
    Coordinator(const DataView& data, const TrainConfig& cfg, std::vector<std::unique_ptr<Channel>> workers,
                const CoordinatorOptions& options)
        : data_(data), cfg_(cfg), options_(options), channels_(std::move(workers)) {}

    ~Coordinator() {
        stopping_ = true;
        for (auto& ch : channels_) {
            if (ch) {
                ch->close();
            }
        }
        for (auto& t : readers_) {
            t.join();
        }
    }

    TrainedMap run() {
        try {
            handshake();
            TrainedMap map = channels_.size() == 1 ? run_local() : run_remote();
            broadcast_shutdown();
            return map;
        } catch (...) {
            broadcast_shutdown();
            throw;
        }
    }

private:
    std::uint32_t workers() const { return static_cast<std::uint32_t>(channels_.size()); }

    Message receive_direct(std::uint32_t rank) {
        try {
            return channels_[rank]->receive(options_.handshakeTimeout);
        } catch (const ProtocolError& e) {
            throw with_rank(e, rank);
        }
    }

    void send(std::uint32_t rank, const Message& m) {
        try {
            channels_[rank]->send(m);
        } catch (const ProtocolError& e) {
            throw with_rank(e, rank);
        }
    }

    void handshake() {
        const std::uint32_t p = workers();
        std::vector<std::uint32_t> rankOf(p, kAnyRank);
        std::vector<bool> taken(p, false);
        for (std::uint32_t i = 0; i < p; ++i) {
            const Message m = receive_direct(i);
            const auto* hello = std::get_if<Hello>(&m);
            if (hello == nullptr) {
                unexpected(m, i, "Hello");
            }
            if (hello->protocolVersion != kProtocolVersion) {
                throw ProtocolError(ProtocolError::Kind::VersionMismatch,
                                    "worker speaks version " + std::to_string(hello->protocolVersion) +
                                        ", coordinator " + std::to_string(kProtocolVersion));
            }
            if (hello->rank != kAnyRank) {
                if (hello->rank >= p || taken[hello->rank]) {
                    throw ProtocolError(ProtocolError::Kind::UnexpectedMessage,
                                        "requested rank " + std::to_string(hello->rank) + " is unavailable");
                }
                rankOf[i] = hello->rank;
                taken[hello->rank] = true;
            }
        }
        std::uint32_t next = 0;
        for (auto& r : rankOf) {
            if (r == kAnyRank) {
                while (taken[next]) {
                    ++next;
                }
                r = next;
                taken[next] = true;
            }
        }
        std::vector<std::unique_ptr<Channel>> ordered(p);
        for (std::uint32_t i = 0; i < p; ++i) {
            ordered[rankOf[i]] = std::move(channels_[i]);
        }
        channels_ = std::move(ordered);

        const AssignMeta meta{cfg_, static_cast<std::uint32_t>(dimension_count(data_)), p,
                              vector_count(data_)};
        for (std::uint32_t r = 0; r < p; ++r) {
            if (options_.log) {
                channels_[r]->attach_log(options_.log, r);
            }
            send(r, Hello{r, kProtocolVersion});
            send(r, meta);
        }
        if (p == 1) {
            return;
        }
        const auto chunks = partition(vector_count(data_), p);
        for (std::uint32_t r = 0; r < p; ++r) {
            const auto& c = chunks[r];
            send(r, AssignChunk{c.firstInstance, c.instanceCount,
                                materialize(slice(data_, c.firstInstance, c.instanceCount))});
        }
        for (std::uint32_t r = 0; r < p; ++r) {
            const Message m = receive_direct(r);
            const auto* ack = std::get_if<EpochAck>(&m);
            if (ack == nullptr || ack->epoch != 0) {
                unexpected(m, r, "EpochAck for epoch 0");
            }
        }
    }

    TrainedMap run_local() {
        TrainOptions opts;
        opts.workerThreads = options_.localThreads;
        opts.sink = options_.sink;
        opts.onEpoch = options_.onEpoch;
        opts.initialCodebook = options_.initialCodebook;
        return train(data_, cfg_, opts);
    }

    void start_readers() {
        for (std::uint32_t r = 0; r < workers(); ++r) {
            readers_.emplace_back([this, r] {
                while (!stopping_) {
                    try {
                        inbox_.push(Inbound{r, channels_[r]->receive(), nullptr});
                    } catch (const ProtocolError& e) {
                        if (!stopping_) {
                            inbox_.push(Inbound{r, std::nullopt, std::make_exception_ptr(with_rank(e, r))});
                        }
                        return;
                    } catch (...) {
                        if (!stopping_) {
                            inbox_.push(Inbound{r, std::nullopt, std::current_exception()});
                        }
                        return;
                    }
                }
            });
        }
    }

    std::vector<LocalAccumulators> gather(std::uint32_t epoch, bool wantBmus,
                                          const std::vector<ChunkRange>& chunks) {
        const std::uint32_t p = workers();
        const std::size_t nodes = std::size_t{cfg_.nSomX} * cfg_.nSomY;
        const std::size_t numeratorSize = nodes * dimension_count(data_);
        std::vector<std::optional<LocalAccumulators>> got(p);
        std::uint32_t received = 0;
        const auto deadline = Clock::now() + options_.epochTimeout;
        while (received < p) {
            auto in = inbox_.pop(deadline);
            if (!in) {
                std::string missing;
                for (std::uint32_t r = 0; r < p; ++r) {
                    if (!got[r]) {
                        missing += (missing.empty() ? "" : ",") + std::to_string(r);
                    }
                }
                throw ProtocolError(ProtocolError::Kind::Timeout,
                                    "epoch " + std::to_string(epoch) + " accumulators missing from rank " + missing);
            }
            if (in->error) {
                std::rethrow_exception(in->error);
            }
            auto* acc = std::get_if<LocalAccumulators>(&*in->message);
            if (acc == nullptr) {
                unexpected(*in->message, in->rank, "LocalAccumulators");
            }
            if (acc->epoch != epoch || acc->rank != in->rank || got[in->rank]) {
                throw ProtocolError(ProtocolError::Kind::UnexpectedMessage,
                                    "accumulators for epoch " + std::to_string(acc->epoch) + " during epoch " +
                                        std::to_string(epoch),
                                    in->rank);
            }
            const std::size_t expectedBmus = wantBmus ? chunks[in->rank].instanceCount : 0;
            if (acc->numerators.size() != numeratorSize || acc->denominators.size() != nodes ||
                acc->bmuNodes.size() != expectedBmus) {
                throw ProtocolError(ProtocolError::Kind::ShapeMismatch, "accumulator shapes do not match the map",
                                    in->rank);
            }
            got[in->rank] = std::move(*acc);
            ++received;
        }
        std::vector<LocalAccumulators> out;
        out.reserve(p);
        for (auto& g : got) {
            out.push_back(std::move(*g));
        }
        return out;
    }

    TrainedMap run_remote() {
        const std::uint32_t p = workers();
        const std::size_t n = vector_count(data_);
        const auto chunks = partition(n, p);
        TrainedMap map;
        map.codebook = options_.initialCodebook ? *options_.initialCodebook
                                                : init_codebook(cfg_, dimension_count(data_));
        start_readers();

        for (std::uint32_t epoch = 0; epoch < cfg_.nEpochs; ++epoch) {
            const EpochState state = epoch_state(cfg_, epoch);
            const bool wantBmus = epoch + 1 == cfg_.nEpochs || cfg_.snapshotLevel == 2;
            const Message broadcast = BroadcastCodebook{epoch, map.codebook.weights};
            for (std::uint32_t r = 0; r < p; ++r) {
                send(r, broadcast);
            }

            const auto parts = gather(epoch, wantBmus, chunks);
            Accumulators acc(map.codebook.nodes(), map.codebook.nDimensions);
            double distanceSum = 0.0;
            std::vector<std::uint32_t> bmuNodes;
            for (const auto& part : parts) {
                acc.add(part.numerators, part.denominators);
                distanceSum += part.distanceSum;
                bmuNodes.insert(bmuNodes.end(), part.bmuNodes.begin(), part.bmuNodes.end());
            }
            blend(map.codebook, acc, state.scale);
            if (wantBmus) {
                map.bmus = BmuTable::from_nodes(bmuNodes, cfg_.nSomX);
            }

            if (options_.onEpoch) {
                const double qe = n == 0 ? 0.0 : distanceSum / static_cast<double>(n);
                options_.onEpoch(EpochReport{epoch, state.radius, state.scale, qe});
            }
            if (options_.sink != nullptr && cfg_.snapshotLevel >= 1) {
                options_.sink->umatrix_snapshot(epoch, compute_umatrix(map.codebook, cfg_.mapType));
                if (cfg_.snapshotLevel == 2) {
                    options_.sink->full_snapshot(epoch, map.codebook, map.bmus);
                }
            }
        }
        map.umatrix = compute_umatrix(map.codebook, cfg_.mapType);
        if (options_.sink != nullptr) {
            options_.sink->final_outputs(map);
        }
        return map;
    }

    void broadcast_shutdown() noexcept {
        stopping_ = true;
        for (auto& ch : channels_) {
            if (!ch) {
                continue;
            }
            try {
                ch->send(Shutdown{});
            } catch (...) {
            }
        }
    }

    const DataView& data_;
    const TrainConfig& cfg_;
    const CoordinatorOptions& options_;
    std::vector<std::unique_ptr<Channel>> channels_;
    std::vector<std::thread> readers_;
    Inbox inbox_;
    std::atomic<bool> stopping_{false};
};

}  // namespace

TrainedMap coordinator_run(const DataView& data, const TrainConfig& cfg, std::vector<std::unique_ptr<Channel>> workers,
                           const CoordinatorOptions& options) {
    check_training_inputs(data, cfg, options.initialCodebook);
    if (workers.empty()) {
        throw ConfigError("coordinator needs at least one worker");
    }
    Coordinator coordinator(data, cfg, std::move(workers), options);
    return coordinator.run();
}

}  // namespace batchsom::dist
