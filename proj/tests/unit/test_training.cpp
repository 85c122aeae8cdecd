#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "batchsom/errors.hpp"
#include "batchsom/kernels.hpp"
#include "batchsom/training.hpp"
#include "batchsom/umatrix.hpp"
#include "support.hpp"

using namespace batchsom;
using testsupport::Rng;

namespace {

struct RecordingSink : OutputSink {
    std::vector<std::uint32_t> umatrixEpochs;
    std::vector<std::uint32_t> fullEpochs;
    std::vector<BmuTable> snapshotBmus;
    int finals = 0;
    void umatrix_snapshot(std::uint32_t epoch, const UMatrix&) override { umatrixEpochs.push_back(epoch); }
    void full_snapshot(std::uint32_t epoch, const CodeBook&, const BmuTable& bmus) override {
        fullEpochs.push_back(epoch);
        snapshotBmus.push_back(bmus);
    }
    void final_outputs(const TrainedMap&) override { ++finals; }
};

TrainConfig small_config(std::uint32_t x, std::uint32_t y, std::uint32_t epochs) {
    RawConfig raw;
    raw.nEpochs = epochs;
    return resolve_defaults(raw, x, y);
}

std::size_t count_files(const std::filesystem::path& dir) {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("random initialisation is a pure function of the seed") {
    auto cfg = small_config(5, 4, 1);
    const auto a = init_codebook(cfg, 7);
    const auto b = init_codebook(cfg, 7);
    CHECK(a == b);
    CHECK(a.nSomX == 5);
    CHECK(a.nSomY == 4);
    CHECK(a.weights.size() == 5 * 4 * 7);
    for (float w : a.weights) {
        CHECK(w >= 0.0f);
        CHECK(w < 1.0f);
    }
    cfg.seed = 2;
    CHECK_FALSE(init_codebook(cfg, 7) == a);
}

TEST_CASE("initial codebook passthrough and shape checks") {
    const auto cfg = small_config(3, 2, 1);
    HeaderedMatrix m;
    m.matrix = DenseDataset(6, 2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    m.rows = 2;
    m.columns = 3;
    CHECK(init_codebook(cfg, 2, &m).weights == m.matrix.values);

    auto kind_of = [&](const HeaderedMatrix& h, std::size_t d) {
        try {
            init_codebook(cfg, d, &h);
        } catch (const ShapeError& e) {
            return e.kind();
        }
        return ShapeError::Kind::BufferSize;
    };
    CHECK(kind_of(m, 3) == ShapeError::Kind::CodebookShapeMismatch);
    HeaderedMatrix wrongGrid = m;
    wrongGrid.rows = 3;
    wrongGrid.columns = 2;
    CHECK(kind_of(wrongGrid, 2) == ShapeError::Kind::CodebookShapeMismatch);
    HeaderedMatrix tooFew = m;
    tooFew.matrix = DenseDataset(4, 2);
    tooFew.rows.reset();
    tooFew.columns.reset();
    CHECK(kind_of(tooFew, 2) == ShapeError::Kind::CodebookShapeMismatch);
}

TEST_CASE("40x40 codebook on a 50x50 map is rejected") {
    const auto dir = testsupport::scratch_dir("init");
    CodeBook small(40, 40, 2);
    write_codebook(dir / "small.wts", small);
    const auto cfg = small_config(50, 50, 1);
    CHECK_THROWS_AS(load_initial_codebook(cfg, 2, (dir / "small.wts").string()), ShapeError);
    CodeBook right(50, 50, 2);
    Rng rng(81);
    for (float& w : right.weights) {
        w = static_cast<float>(rng.integer(0, 1000)) / 8.0f;
    }
    write_codebook(dir / "right.wts", right);
    CHECK(load_initial_codebook(cfg, 2, (dir / "right.wts").string()) == right);
    std::filesystem::remove_all(dir);
}

TEST_CASE("single instance on a 1x1 map lands exactly on it") {
    const DenseDataset x(1, 4, {0.1f, -7.25f, 3.0f, 1e-3f});
    const auto cfg = small_config(1, 1, 1);
    const auto r = train_one_epoch(x.view(), init_codebook(cfg, 4), cfg, 0, true);
    CHECK(r.codebook.weights == x.values);
    CHECK(r.report.scale == 1.0);
    REQUIRE(r.umatrix.has_value());
    CHECK(r.umatrix->heights == std::vector<float>{0.0f});
}

TEST_CASE("property: tiny radius reproduces per-node means") {
    Rng rng(82);
    for (int iter = 0; iter < 40; ++iter) {
        const auto X = static_cast<std::uint32_t>(rng.integer(1, 3));
        const auto Y = static_cast<std::uint32_t>(rng.integer(1, 3));
        const auto d = static_cast<std::size_t>(rng.integer(1, 5));
        const auto data = testsupport::random_dense(rng, rng.integer(1, 20), d);
        RawConfig raw;
        raw.nEpochs = 1;
        raw.radius0 = 0.05;
        raw.radiusN = 0.05;
        const auto cfg = resolve_defaults(raw, X, Y);
        const auto cb = testsupport::random_codebook(rng, X, Y, d);
        const auto r = train_one_epoch(data.view(), cb, cfg, 0, false);

        const auto nodes = r.bmus.to_nodes(X);
        const auto before = bmu_search_naive(data.view(), cb);
        CHECK(r.bmus == before);
        for (std::size_t j = 0; j < cb.nodes(); ++j) {
            std::vector<double> mean(d, 0.0);
            std::size_t members = 0;
            for (std::size_t t = 0; t < data.nVectors; ++t) {
                if (nodes[t] == j) {
                    ++members;
                    for (std::size_t k = 0; k < d; ++k) {
                        mean[k] += data.at(t, k);
                    }
                }
            }
            for (std::size_t k = 0; k < d; ++k) {
                if (members == 0) {
                    CHECK(r.codebook.node(j)[k] == cb.node(j)[k]);
                } else {
                    CHECK(testsupport::close_rel(r.codebook.node(j)[k], mean[k] / members, 1e-6));
                }
            }
        }
    }
}

TEST_CASE("zero-denominator nodes are untouched") {
    CodeBook cb(10, 1, 1);
    for (std::size_t j = 0; j < 10; ++j) {
        cb.weights[j] = 100.0f * static_cast<float>(j);
    }
    const DenseDataset data(2, 1, {1.0f, 2.0f});
    RawConfig raw;
    raw.nEpochs = 1;
    raw.radius0 = 1.0;
    raw.radiusN = 1.0;
    const auto r = train_one_epoch(data.view(), cb, resolve_defaults(raw, 10, 1), 0, false);
    // exp(-d) drops below the 1e-3 cutoff past d = 6.9.
    for (std::size_t j = 0; j < 10; ++j) {
        if (j <= 6) {
            CHECK(r.codebook.weights[j] == 1.5f);
        } else {
            CHECK(r.codebook.weights[j] == cb.weights[j]);
        }
    }
    raw.radius0 = raw.radiusN = 0.1;
    const auto tight = train_one_epoch(data.view(), cb, resolve_defaults(raw, 10, 1), 0, false);
    CHECK(tight.codebook.weights[0] == 1.5f);
    for (std::size_t j = 1; j < 10; ++j) {
        CHECK(tight.codebook.weights[j] == cb.weights[j]);
    }
}

TEST_CASE("epoch reports follow the schedules") {
    Rng rng(83);
    const auto data = testsupport::random_dense(rng, 30, 3);
    RawConfig raw;
    raw.nEpochs = 4;
    raw.radius0 = 3;
    raw.radiusN = 1;
    const auto cfg = resolve_defaults(raw, 4, 4);
    std::vector<EpochReport> reports;
    TrainOptions options;
    options.workerThreads = 1;
    options.onEpoch = [&](const EpochReport& r) { reports.push_back(r); };
    train(data.view(), cfg, options);
    REQUIRE(reports.size() == 4);
    for (std::uint32_t e = 0; e < 4; ++e) {
        CHECK(reports[e].epoch == e);
        CHECK(reports[e].radius == schedule(3, 1, Cooling::Linear, e, 4));
        CHECK(reports[e].scale == schedule(1, 0.01, Cooling::Linear, e, 4));
        CHECK(reports[e].quantizationError >= 0.0);
    }
}

TEST_CASE("final artifacts are consistent") {
    Rng rng(84);
    const auto data = testsupport::random_dense(rng, 50, 4);
    const auto cfg = small_config(5, 5, 3);
    const auto map = train(data.view(), cfg, TrainOptions{1, nullptr, {}, {}});
    CHECK(map.bmus.size() == 50);
    CHECK(map.umatrix == compute_umatrix(map.codebook, cfg.mapType));
    CHECK(map.codebook.nodes() == 25);
    for (std::size_t t = 0; t < map.bmus.size(); ++t) {
        CHECK(cfg.shape().contains(map.bmus[t]));
    }
}

TEST_CASE("snapshot levels drive sink calls") {
    Rng rng(85);
    const auto data = testsupport::random_dense(rng, 20, 3);
    for (int level : {0, 1, 2}) {
        RawConfig raw;
        raw.nEpochs = 3;
        raw.snapshotLevel = level;
        RecordingSink sink;
        TrainOptions options;
        options.workerThreads = 1;
        options.sink = &sink;
        const auto map = train(data.view(), resolve_defaults(raw, 3, 3), options);
        CHECK(sink.finals == 1);
        CHECK(sink.umatrixEpochs.size() == (level >= 1 ? 3u : 0u));
        CHECK(sink.fullEpochs.size() == (level == 2 ? 3u : 0u));
        if (level == 2) {
            CHECK(sink.fullEpochs == std::vector<std::uint32_t>{0, 1, 2});
            CHECK(sink.snapshotBmus.back() == map.bmus);
        }
    }
}

TEST_CASE("snapshot file counts") {
    Rng rng(86);
    const auto data = testsupport::random_dense(rng, 20, 3);
    struct Case {
        std::uint32_t epochs;
        int level;
        std::size_t files;
    };
    for (const Case c : {Case{1, 0, 3}, Case{3, 1, 6}, Case{2, 2, 9}}) {
        const auto dir = testsupport::scratch_dir("snap");
        RawConfig raw;
        raw.nEpochs = c.epochs;
        raw.snapshotLevel = c.level;
        FileSink sink((dir / "out").string());
        TrainOptions options;
        options.workerThreads = 1;
        options.sink = &sink;
        train(data.view(), resolve_defaults(raw, 3, 3), options);
        CHECK(count_files(dir) == c.files);
        CHECK(std::filesystem::exists(dir / "out.wts"));
        CHECK(std::filesystem::exists(dir / "out.bm"));
        CHECK(std::filesystem::exists(dir / "out.umx"));
        if (c.level >= 1) {
            CHECK(std::filesystem::exists(dir / "out.0.umx"));
        }
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("property: training is bit-identical across thread counts and kernels") {
    Rng rng(87);
    for (int iter = 0; iter < 6; ++iter) {
        const auto d = static_cast<std::size_t>(rng.integer(1, 16));
        const auto dense = testsupport::random_sparse_dense(rng, rng.integer(5, 200), d, 0.4);
        const auto sparse = testsupport::sparsify(dense);
        RawConfig raw;
        raw.nEpochs = static_cast<std::uint32_t>(rng.integer(1, 4));
        raw.mapType = rng.coin() ? MapType::Toroid : MapType::Planar;
        raw.seed = rng.seed();
        const auto X = static_cast<std::uint32_t>(rng.integer(1, 8));
        const auto Y = static_cast<std::uint32_t>(rng.integer(1, 8));
        auto cfg = resolve_defaults(raw, X, Y);
        const auto base = train(dense.view(), cfg, TrainOptions{1, nullptr, {}, {}});
        for (std::size_t threads : {2, 4, 8}) {
            const auto other = train(dense.view(), cfg, TrainOptions{threads, nullptr, {}, {}});
            CHECK(other.codebook == base.codebook);
            CHECK(other.bmus == base.bmus);
        }
        cfg.kernel = KernelType::Sparse;
        const auto sp = train(sparse.view(), cfg, TrainOptions{3, nullptr, {}, {}});
        CHECK(sp.bmus == base.bmus);
        CHECK(testsupport::max_rel_diff(sp.codebook.weights, base.codebook.weights) <= 1e-5);
    }
}

TEST_CASE("input checks") {
    const DenseDataset dense(3, 2);
    auto cfg = small_config(2, 2, 1);
    cfg.kernel = KernelType::Sparse;
    CHECK_THROWS_AS(check_training_inputs(dense.view(), cfg, std::nullopt), ShapeError);
    cfg.kernel = KernelType::DenseBlocked;
    CHECK_NOTHROW(check_training_inputs(dense.view(), cfg, std::nullopt));
    CHECK_THROWS_AS(check_training_inputs(dense.view(), cfg, CodeBook(3, 2, 2)), ShapeError);
    CHECK_THROWS_AS(check_training_inputs(dense.view(), cfg, CodeBook(2, 2, 5)), ShapeError);
    cfg.nEpochs = 0;
    CHECK_THROWS_AS(check_training_inputs(dense.view(), cfg, std::nullopt), ConfigError);
}

}
