#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "batchsom/buffers.hpp"
#include "batchsom/cli.hpp"
#include "batchsom/errors.hpp"
#include "batchsom/io.hpp"
#include "batchsom/training.hpp"
#include "support.hpp"

using namespace batchsom;
namespace fs = std::filesystem;

namespace {

struct Outputs {
    std::vector<float> codebook;
    std::vector<std::int32_t> bmus;
    std::vector<float> umatrix;

    Outputs(std::size_t n, std::size_t d, std::uint32_t x, std::uint32_t y)
        : codebook(std::size_t{x} * y * d), bmus(n * 2), umatrix(std::size_t{x} * y) {}
    OutputBuffers spans() { return OutputBuffers{codebook, bmus, umatrix}; }
};

std::string shape_message(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ShapeError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("buffers") {

TEST_CASE("wrong buffer lengths name the expected size") {
    const std::vector<float> data(6 * 3, 0.5f);
    RawConfig raw;
    raw.nEpochs = 1;

    Outputs shortCb(6, 3, 4, 2);
    shortCb.codebook.resize(23);
    auto msg = shape_message([&] { train_into_buffers(data, 6, 3, 4, 2, raw, "", shortCb.spans(), 1); });
    CHECK(msg.find("nSomY*nSomX*nDimensions = 24") != std::string::npos);
    CHECK(msg.find("23") != std::string::npos);

    Outputs shortBmus(6, 3, 4, 2);
    shortBmus.bmus.resize(6);
    msg = shape_message([&] { train_into_buffers(data, 6, 3, 4, 2, raw, "", shortBmus.spans(), 1); });
    CHECK(msg.find("nVectors*2 = 12") != std::string::npos);

    Outputs shortU(6, 3, 4, 2);
    shortU.umatrix.resize(9);
    msg = shape_message([&] { train_into_buffers(data, 6, 3, 4, 2, raw, "", shortU.spans(), 1); });
    CHECK(msg.find("nSomY*nSomX = 8") != std::string::npos);

    Outputs ok(6, 3, 4, 2);
    msg = shape_message([&] { train_into_buffers(data, 7, 3, 4, 2, raw, "", ok.spans(), 1); });
    CHECK(msg.find("nVectors*nDimensions = 21") != std::string::npos);

    raw.kernel = KernelType::Sparse;
    msg = shape_message([&] { train_into_buffers(data, 6, 3, 4, 2, raw, "", ok.spans(), 1); });
    CHECK(msg.find("KernelDataMismatch") != std::string::npos);
}

TEST_CASE("results equal train on the same config") {
    testsupport::Rng rng(111);
    const auto data = testsupport::random_dense(rng, 40, 5);
    RawConfig raw;
    raw.nEpochs = 3;
    raw.mapType = MapType::Toroid;
    Outputs out(40, 5, 4, 3);
    train_into_buffers(data.values, 40, 5, 4, 3, raw, "", out.spans(), 2);
    const auto map = train(data.view(), resolve_defaults(raw, 4, 3), TrainOptions{1, nullptr, {}, {}});
    CHECK(out.codebook == map.codebook.weights);
    CHECK(out.umatrix == map.umatrix.heights);
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(out.bmus[2 * i] == static_cast<std::int32_t>(map.bmus[i].col));
        CHECK(out.bmus[2 * i + 1] == static_cast<std::int32_t>(map.bmus[i].row));
    }
}

TEST_CASE("caller data is read in place") {
    testsupport::Rng rng(112);
    auto data = testsupport::random_dense(rng, 10, 2);
    RawConfig raw;
    raw.nEpochs = 1;
    Outputs before(10, 2, 1, 1);
    train_into_buffers(data.values, 10, 2, 1, 1, raw, "", before.spans(), 1);
    // A 1x1 map at scale 1 lands on the data mean.
    for (float& v : data.values) {
        v += 10.0f;
    }
    Outputs after(10, 2, 1, 1);
    train_into_buffers(data.values, 10, 2, 1, 1, raw, "", after.spans(), 1);
    CHECK(after.codebook[0] == doctest::Approx(before.codebook[0] + 10.0f).epsilon(1e-5));
    CHECK(after.codebook[1] == doctest::Approx(before.codebook[1] + 10.0f).epsilon(1e-5));
}

TEST_CASE("parity with the command line") {
    const auto dir = testsupport::scratch_dir("buffers");
    const std::string input = std::string(BATCHSOM_DATA_DIR) + "/rgbs.txt";
    std::ostringstream out, err;
    REQUIRE(cli::main_entry({"-x", "4", "-y", "3", "-e", "3", "--seed", "5", input, (dir / "cli").string()}, out,
                            err) == 0);

    const auto data = std::get<DenseDataset>(read_dataset(input));
    RawConfig raw;
    raw.nEpochs = 3;
    raw.seed = 5;
    Outputs buf(data.nVectors, data.nDimensions, 4, 3);
    train_into_buffers(data.values, data.nVectors, data.nDimensions, 4, 3, raw, "", buf.spans());

    CodeBook cb(4, 3, data.nDimensions);
    cb.weights = buf.codebook;
    std::ostringstream wts;
    write_codebook(wts, cb);
    CHECK(wts.str() == testsupport::slurp(dir / "cli.wts"));
    const auto fileCb = read_codebook_file(dir / "cli.wts");
    CHECK(testsupport::max_rel_diff(fileCb.matrix.values, buf.codebook) <= 5e-6);

    Outputs seeded(data.nVectors, data.nDimensions, 4, 3);
    raw.nEpochs = 1;
    train_into_buffers(data.values, data.nVectors, data.nDimensions, 4, 3, raw, (dir / "cli.wts").string(),
                       seeded.spans(), 1);
    CHECK(seeded.codebook.size() == buf.codebook.size());
    fs::remove_all(dir);
}

}
