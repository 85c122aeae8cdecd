#include <cmath>

#include "batchsom/distributed/protocol.hpp"
#include "batchsom/kernels.hpp"

namespace batchsom::dist {

namespace {

[[noreturn]] void shape_mismatch(const std::string& detail, std::uint32_t rank) {
    throw ProtocolError(ProtocolError::Kind::ShapeMismatch, detail, rank);
}

class Worker {
public:
    Worker(Channel& link, const WorkerOptions& options) : link_(link), options_(options), pool_(options.threads) {}

    WorkerSummary run() {
        link_.send(Hello{options_.proposedRank, kProtocolVersion});
        const Message reply = receive();
        const auto* hello = std::get_if<Hello>(&reply);
        if (hello == nullptr) {
            unexpected(reply);
        }
        if (hello->protocolVersion != kProtocolVersion) {
            throw ProtocolError(ProtocolError::Kind::VersionMismatch,
                                "coordinator speaks version " + std::to_string(hello->protocolVersion));
        }
        summary_.rank = hello->rank;

        for (;;) {
            Message m = receive();
            if (std::holds_alternative<Shutdown>(m)) {
                return summary_;
            }
            if (auto* meta = std::get_if<AssignMeta>(&m)) {
                on_meta(std::move(*meta));
            } else if (auto* chunk = std::get_if<AssignChunk>(&m)) {
                on_chunk(std::move(*chunk));
            } else if (auto* cb = std::get_if<BroadcastCodebook>(&m)) {
                on_codebook(std::move(*cb));
            } else {
                unexpected(m);
            }
        }
    }

private:
    Message receive() {
        try {
            return link_.receive(options_.timeout);
        } catch (const ProtocolError& e) {
            if (e.kind() == ProtocolError::Kind::ConnectionClosed || e.kind() == ProtocolError::Kind::Timeout) {
                throw ProtocolError(ProtocolError::Kind::CoordinatorLost, e.what(), summary_.rank);
            }
            throw;
        }
    }

    [[noreturn]] void unexpected(const Message& m) const {
        throw ProtocolError(ProtocolError::Kind::UnexpectedMessage,
                            std::string("worker did not expect ") + to_string(tag_of(m)), summary_.rank);
    }

    void on_meta(AssignMeta meta) {
        try {
            validate(meta.config);
        } catch (const ConfigError& e) {
            shape_mismatch(std::string("assigned config is invalid: ") + e.what(), summary_.rank);
        }
        meta_ = std::move(meta);
    }

    void on_chunk(AssignChunk chunk) {
        if (!meta_) {
            throw ProtocolError(ProtocolError::Kind::UnexpectedMessage, "chunk before metadata", summary_.rank);
        }
        const DataView view = view_of(chunk.data);
        if (dimension_count(view) != meta_->nDimensions) {
            shape_mismatch("chunk has " + std::to_string(dimension_count(view)) + " dimensions, metadata " +
                               std::to_string(meta_->nDimensions),
                           summary_.rank);
        }
        if (is_sparse(view) != (meta_->config.kernel == KernelType::Sparse)) {
            shape_mismatch("chunk representation does not suit the kernel", summary_.rank);
        }
        chunk_ = std::move(chunk);
        link_.send(EpochAck{0});
    }

    void on_codebook(BroadcastCodebook b) {
        if (!meta_ || !chunk_) {
            throw ProtocolError(ProtocolError::Kind::UnexpectedMessage, "codebook before assignment", summary_.rank);
        }
        const TrainConfig& cfg = meta_->config;
        if (b.epoch >= cfg.nEpochs || (lastEpoch_ && b.epoch <= *lastEpoch_)) {
            throw ProtocolError(ProtocolError::Kind::UnexpectedMessage,
                                "codebook for epoch " + std::to_string(b.epoch) + " out of sequence", summary_.rank);
        }
        CodeBook cb(cfg.nSomX, cfg.nSomY, meta_->nDimensions);
        if (b.weights.size() != cb.weights.size()) {
            shape_mismatch("codebook has " + std::to_string(b.weights.size()) + " weights, expected " +
                               std::to_string(cb.weights.size()),
                           summary_.rank);
        }
        cb.weights = std::move(b.weights);
        lastEpoch_ = b.epoch;

        const DataView view = view_of(chunk_->data);
        const EpochState state = epoch_state(cfg, b.epoch);
        const BmuSearchResult search = find_bmus(view, cb, cfg.kernel, cfg.blockSize, pool_);
        const Accumulators acc = accumulate(view, search.nodes, state.radius, cfg.influenceCutoff, cfg.shape(), pool_);

        LocalAccumulators out;
        out.epoch = b.epoch;
        out.rank = summary_.rank;
        out.numerators.assign(acc.numerators.begin(), acc.numerators.end());
        out.denominators.assign(acc.denominators.begin(), acc.denominators.end());
        if (b.epoch + 1 == cfg.nEpochs || cfg.snapshotLevel == 2) {
            out.bmuNodes = search.nodes;
        }
        for (float d : search.sqDistances) {
            out.distanceSum += std::sqrt(static_cast<double>(d));
        }
        link_.send(out);
        ++summary_.epochsServed;
    }

    Channel& link_;
    const WorkerOptions& options_;
    WorkerPool pool_;
    WorkerSummary summary_;
    std::optional<AssignMeta> meta_;
    std::optional<AssignChunk> chunk_;
    std::optional<std::uint32_t> lastEpoch_;
};

}  // namespace

WorkerSummary worker_run(Channel& coordinator, const WorkerOptions& options) {
    Worker worker(coordinator, options);
    return worker.run();
}

}  // namespace batchsom::dist
