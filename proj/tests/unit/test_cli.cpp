#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "batchsom/cli.hpp"
#include "batchsom/io.hpp"
#include "support.hpp"

using namespace batchsom;
using namespace batchsom::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = main_entry(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kData = BATCHSOM_DATA_DIR;

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults") {
    const auto inv = parse_args({"data/rgbs.txt", "data/rgbs"});
    CHECK(inv.role == Role::Local);
    CHECK(inv.inputFile == "data/rgbs.txt");
    CHECK(inv.outputPrefix == "data/rgbs");
    CHECK(inv.columns == 50);
    CHECK(inv.rows == 50);
    CHECK(inv.config.mapType == MapType::Planar);
    CHECK(inv.config.kernel == KernelType::DenseNaive);
    CHECK(inv.config.radiusCooling == Cooling::Linear);
    CHECK(inv.config.scaleCooling == Cooling::Linear);
    CHECK(inv.config.snapshotLevel == 0);
    CHECK(inv.config.nEpochs == 10);
    CHECK(inv.initialCodebook.empty());
}

TEST_CASE("flag table") {
    struct Row {
        std::vector<std::string> args;
        std::function<bool(const CliInvocation&)> check;
    };
    const std::vector<Row> rows{
        {{"--rows", "20", "--columns", "20", "-k", "0"},
         [](const CliInvocation& i) { return i.rows == 20 && i.columns == 20 && i.config.kernel == KernelType::DenseNaive; }},
        {{"-x", "7", "-y", "3"}, [](const CliInvocation& i) { return i.columns == 7 && i.rows == 3; }},
        {{"-k", "1"}, [](const CliInvocation& i) { return i.config.kernel == KernelType::DenseBlocked; }},
        {{"-k", "2"}, [](const CliInvocation& i) { return i.config.kernel == KernelType::Sparse; }},
        {{"-e", "4"}, [](const CliInvocation& i) { return i.config.nEpochs == 4; }},
        {{"-m", "toroid"}, [](const CliInvocation& i) { return i.config.mapType == MapType::Toroid; }},
        {{"-t", "exponential"}, [](const CliInvocation& i) { return i.config.radiusCooling == Cooling::Exponential; }},
        {{"-T", "exponential"}, [](const CliInvocation& i) { return i.config.scaleCooling == Cooling::Exponential; }},
        {{"-r", "12", "-R", "2"}, [](const CliInvocation& i) { return i.config.radius0 == 12 && i.config.radiusN == 2; }},
        {{"-l", "0.5", "-L", "0.05"}, [](const CliInvocation& i) { return i.config.scale0 == 0.5 && i.config.scaleN == 0.05; }},
        {{"-s", "2"}, [](const CliInvocation& i) { return i.config.snapshotLevel == 2; }},
        {{"-c", "init.wts"}, [](const CliInvocation& i) { return i.initialCodebook == "init.wts"; }},
        {{"--seed", "42", "--threads", "3"}, [](const CliInvocation& i) { return i.config.seed == 42 && i.threads == 3; }},
    };
    for (const auto& row : rows) {
        auto args = row.args;
        args.push_back("in.txt");
        args.push_back("out");
        CAPTURE(args.front());
        CHECK(row.check(parse_args(args)));
    }
}

TEST_CASE("usage errors") {
    const std::vector<std::vector<std::string>> bad{
        {"-s", "3", "in.txt", "out"},
        {"-k", "5", "in.txt", "out"},
        {"-m", "hex", "in.txt", "out"},
        {"-t", "cubic", "in.txt", "out"},
        {"-e", "0", "in.txt", "out"},
        {"--bogus", "in.txt", "out"},
        {"in.txt"},
        {},
        {"-x", "-3", "in.txt", "out"},
        {"coordinator", "in.txt", "out"},
        {"worker"},
        {"bench", "spec.txt"},
    };
    for (const auto& args : bad) {
        CAPTURE(args.size());
        CHECK_THROWS_AS(parse_args(args), UsageError);
        const auto r = invoke(args);
        CHECK(r.code == kExitUsage);
        CHECK_FALSE(r.err.empty());
    }
}

TEST_CASE("help exits cleanly") {
    const auto r = invoke({"--help"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("-k") != std::string::npos);
}

TEST_CASE("distributed role flags") {
    const auto c = parse_args({"coordinator", "--listen", ":7000", "--workers", "4", "--timeout", "9", "-e", "2",
                               "in.txt", "out"});
    CHECK(c.role == Role::Coordinator);
    CHECK(c.endpoint == ":7000");
    CHECK(c.workers == 4);
    CHECK(c.timeoutSeconds == 9.0);
    CHECK(c.config.nEpochs == 2);

    const auto w = parse_args({"worker", "--connect", "host:7000", "--threads", "2", "--rank", "1"});
    CHECK(w.role == Role::Worker);
    CHECK(w.endpoint == "host:7000");
    CHECK(w.threads == 2);
    CHECK(w.rank == 1);

    const auto b = parse_args({"bench", "spec.txt", "out.csv", "--dat", "out.dat"});
    CHECK(b.role == Role::Bench);
    CHECK(b.benchSpec == "spec.txt");
    CHECK(b.benchCsv == "out.csv");
    CHECK(b.benchDat == "out.dat");
}

TEST_CASE("happy path writes exactly the final files") {
    const auto dir = testsupport::scratch_dir("cli");
    const auto prefix = (dir / "rgbs").string();
    const auto r = invoke({"-x", "5", "-y", "4", "-e", "3", "--threads", "1", kData + "/rgbs.txt", prefix});
    CHECK(r.code == kExitOk);
    CHECK(r.err.empty());
    CHECK(r.out.find("epoch 0 radius 2 scale 1 qe ") == 0);
    CHECK(r.out.find("epoch 2 radius 1 scale 0.01 qe ") != std::string::npos);
    const auto paths = snapshot_paths(prefix);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) {
        ++files;
    }
    CHECK(files == 3);
    for (const auto& p : {paths.codebook, paths.bmus, paths.umatrix}) {
        CHECK(fs::exists(p));
    }
    const auto cb = read_codebook_file(paths.codebook);
    CHECK(cb.rows == 4u);
    CHECK(cb.columns == 5u);
    CHECK(cb.matrix.nDimensions == 3);
    CHECK(parse_bmus(read_text_file(paths.bmus)).size() == 8);
    fs::remove_all(dir);
}

TEST_CASE("input failures exit with code 2") {
    const auto dir = testsupport::scratch_dir("cli_bad");
    const auto missing = (dir / "nowhere.txt").string();
    auto r = invoke({missing, (dir / "out").string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find(missing) != std::string::npos);

    r = invoke({"-k", "2", kData + "/rgbs.txt", (dir / "out").string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("KernelDataMismatch") != std::string::npos);

    r = invoke({"-k", "0", kData + "/sparse.txt", (dir / "out").string()});
    CHECK(r.code == kExitInput);

    testsupport::spit(dir / "ragged.txt", "1 2 3\n4 5\n");
    r = invoke({(dir / "ragged.txt").string(), (dir / "out").string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("line 2") != std::string::npos);

    testsupport::spit(dir / "init.wts", "% 2 2\n% 3\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n");
    r = invoke({"-c", (dir / "init.wts").string(), kData + "/rgbs.txt", (dir / "out").string()});
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("CodebookShapeMismatch") != std::string::npos);

    r = invoke({"-r", "1", "-R", "5", kData + "/rgbs.txt", (dir / "out").string()});
    CHECK(r.code == kExitUsage);
    fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
    const auto dir = testsupport::scratch_dir("cli_det");
    std::vector<std::string> prefixes;
    for (const char* threads : {"1", "1", "3"}) {
        const auto prefix = (dir / ("run" + std::to_string(prefixes.size()))).string();
        const auto r = invoke({"-x", "6", "-y", "6", "-e", "4", "-m", "toroid", "--seed", "1", "--threads", threads,
                               kData + "/rgbs.txt", prefix});
        REQUIRE(r.code == kExitOk);
        prefixes.push_back(prefix);
    }
    for (const char* ext : {".wts", ".bm", ".umx"}) {
        const auto first = testsupport::slurp(prefixes[0] + ext);
        CHECK_FALSE(first.empty());
        CHECK(testsupport::slurp(prefixes[1] + ext) == first);
        CHECK(testsupport::slurp(prefixes[2] + ext) == first);
    }
    fs::remove_all(dir);
}

TEST_CASE("initial codebook from a previous run") {
    const auto dir = testsupport::scratch_dir("cli_init");
    const auto first = (dir / "first").string();
    REQUIRE(invoke({"-x", "3", "-y", "2", "-e", "2", "--threads", "1", kData + "/rgbs.txt", first}).code == kExitOk);
    const auto second = (dir / "second").string();
    const auto r = invoke({"-x", "3", "-y", "2", "-e", "1", "-c", first + ".wts", "--threads", "1",
                           kData + "/rgbs.txt", second});
    CHECK(r.code == kExitOk);
    fs::remove_all(dir);
}

TEST_CASE("bench role writes the CSV") {
    const auto dir = testsupport::scratch_dir("cli_bench");
    testsupport::spit(dir / "spec.txt", "n = 40\nd = 6\ncolumns = 3\nrows = 3\nkernels = 0, 2\nepochs = 1\n");
    const auto r = invoke({"bench", (dir / "spec.txt").string(), (dir / "out.csv").string(), "--dat",
                           (dir / "out.dat").string()});
    CHECK(r.code == kExitOk);
    const auto csv = testsupport::slurp(dir / "out.csv");
    CHECK(csv.rfind("kernel,n,d,map,workers,median_seconds,elements_allocated\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(fs::exists(dir / "out.dat"));
    fs::remove_all(dir);
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(UsageError("x")) == kExitUsage);
    CHECK(exit_code_for(ConfigError("x")) == kExitUsage);
    CHECK(exit_code_for(IoError("x")) == kExitInput);
    CHECK(exit_code_for(ShapeError(ShapeError::Kind::DimensionMismatch, "x")) == kExitInput);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitRuntime);
}

}
