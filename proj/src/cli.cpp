#include "batchsom/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "batchsom/bench.hpp"
#include "batchsom/distributed/protocol.hpp"
#include "batchsom/io.hpp"
#include "batchsom/training.hpp"

namespace batchsom::cli {

namespace {

struct TextFlags {
    std::string mapType = "planar";
    std::string radiusCooling = "linear";
    std::string scaleCooling = "linear";
    int kernel = 0;
};

void add_training_flags(CLI::App& app, CliInvocation& inv, TextFlags& text) {
    RawConfig& c = inv.config;
    app.add_option("-c", inv.initialCodebook, "Initial codebook file");
    app.add_option("-e", c.nEpochs, "Number of epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("-k", text.kernel, "Kernel: 0 dense naive, 1 dense blocked, 2 sparse")
        ->capture_default_str()
        ->check(CLI::Range(0, 2));
    app.add_option("-m", text.mapType, "Map type: planar or toroid")
        ->capture_default_str()
        ->check(CLI::IsMember({"planar", "toroid"}));
    app.add_option("-t", text.radiusCooling, "Radius cooling: linear or exponential")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "exponential"}));
    app.add_option("-r", c.radius0, "Start radius (default: half of the smaller map side)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("-R", c.radiusN, "End radius (default 1)")->check(CLI::NonNegativeNumber);
    app.add_option("-T", text.scaleCooling, "Learning rate cooling: linear or exponential")
        ->capture_default_str()
        ->check(CLI::IsMember({"linear", "exponential"}));
    app.add_option("-l", c.scale0, "Start learning rate (default 1.0)")->check(CLI::NonNegativeNumber);
    app.add_option("-L", c.scaleN, "End learning rate (default 0.01)")->check(CLI::NonNegativeNumber);
    app.add_option("-s", c.snapshotLevel, "Snapshots: 0 none, 1 U-matrix, 2 all outputs")
        ->capture_default_str()
        ->check(CLI::Range(0, 2));
    app.add_option("-x,--columns", inv.columns, "Map columns")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("-y,--rows", inv.rows, "Map rows")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", c.seed, "Random seed for codebook initialisation")->capture_default_str();
    app.add_option("--threads", inv.threads, "Worker threads (0: all logical cores)")->capture_default_str();
}

void apply_text_flags(CliInvocation& inv, const TextFlags& text) {
    inv.config.mapType = parse_map_type(text.mapType);
    inv.config.radiusCooling = parse_cooling(text.radiusCooling);
    inv.config.scaleCooling = parse_cooling(text.scaleCooling);
    inv.config.kernel = kernel_from_int(text.kernel);
}

void parse_with(CLI::App& app, std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
}

dist::Millis timeout_of(const CliInvocation& inv) {
    return dist::Millis(static_cast<long long>(std::llround(inv.timeoutSeconds * 1000.0)));
}

void print_epoch(std::ostream& out, const EpochReport& r) {
    out << "epoch " << r.epoch << " radius " << format_value(r.radius) << " scale " << format_value(r.scale)
        << " qe " << format_value(r.quantizationError) << std::endl;
}

struct Prepared {
    Dataset data;
    TrainConfig config;
    std::optional<CodeBook> initial;
};

Prepared prepare(const CliInvocation& inv) {
    Prepared p;
    p.data = read_dataset(inv.inputFile);
    p.config = resolve_defaults(inv.config, inv.columns, inv.rows);
    const DataView view = view_of(p.data);
    if (!inv.initialCodebook.empty()) {
        p.initial = load_initial_codebook(p.config, dimension_count(view), inv.initialCodebook);
    }
    check_training_inputs(view, p.config, p.initial);
    return p;
}

int run_local(const CliInvocation& inv, std::ostream& out) {
    Prepared p = prepare(inv);
    FileSink sink(inv.outputPrefix);
    TrainOptions options;
    options.workerThreads = inv.threads;
    options.sink = &sink;
    options.onEpoch = [&](const EpochReport& r) { print_epoch(out, r); };
    options.initialCodebook = std::move(p.initial);
    train(view_of(p.data), p.config, options);
    return kExitOk;
}

int run_coordinator(const CliInvocation& inv, std::ostream& out) {
    Prepared p = prepare(inv);
    dist::TcpListener listener(dist::parse_endpoint(inv.endpoint));
    out << "listening on port " << listener.port() << ", waiting for " << inv.workers << " worker(s)" << std::endl;
    auto channels = dist::accept_workers(listener, inv.workers, timeout_of(inv));

    FileSink sink(inv.outputPrefix);
    dist::CoordinatorOptions options;
    options.handshakeTimeout = timeout_of(inv);
    options.epochTimeout = timeout_of(inv);
    options.localThreads = inv.threads;
    options.sink = &sink;
    options.onEpoch = [&](const EpochReport& r) { print_epoch(out, r); };
    options.initialCodebook = std::move(p.initial);
    dist::coordinator_run(view_of(p.data), p.config, std::move(channels), options);
    return kExitOk;
}

int run_worker(const CliInvocation& inv, std::ostream& out) {
    auto link = dist::connect_tcp(dist::parse_endpoint(inv.endpoint), timeout_of(inv));
    dist::WorkerOptions options;
    options.threads = inv.threads;
    options.proposedRank = inv.rank;
    options.timeout = timeout_of(inv);
    const auto summary = dist::worker_run(*link, options);
    out << "worker rank " << summary.rank << " served " << summary.epochsServed << " epoch(s)" << std::endl;
    return kExitOk;
}

int run_bench_role(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    const BenchSpec spec = read_bench_spec(inv.benchSpec);
    const BenchResult result = run_bench(spec, &err);
    std::ofstream csv(inv.benchCsv, std::ios::binary);
    if (!csv) {
        throw IoError("cannot open '" + inv.benchCsv + "' for writing");
    }
    write_bench_csv(csv, result);
    if (!inv.benchDat.empty()) {
        std::ofstream dat(inv.benchDat, std::ios::binary);
        if (!dat) {
            throw IoError("cannot open '" + inv.benchDat + "' for writing");
        }
        write_bench_dat(dat, result);
    }
    write_bench_csv(out, result);
    return kExitOk;
}

}  // namespace

CliInvocation parse_args(const std::vector<std::string>& args) {
    CliInvocation inv;
    std::vector<std::string> rest = args;
    if (!rest.empty() && (rest.front() == "coordinator" || rest.front() == "worker" || rest.front() == "bench")) {
        inv.role = rest.front() == "coordinator" ? Role::Coordinator
                   : rest.front() == "worker"    ? Role::Worker
                                                 : Role::Bench;
        rest.erase(rest.begin());
    }

    TextFlags text;
    switch (inv.role) {
        case Role::Local: {
            CLI::App app("Batch self-organizing map training", "batchsom");
            add_training_flags(app, inv, text);
            app.add_option("INPUT_FILE", inv.inputFile, "Dense, headered dense or sparse input")->required();
            app.add_option("OUTPUT_PREFIX", inv.outputPrefix, "Prefix of the .wts/.bm/.umx outputs")->required();
            parse_with(app, rest);
            break;
        }
        case Role::Coordinator: {
            CLI::App app("Distributed training coordinator", "batchsom coordinator");
            add_training_flags(app, inv, text);
            app.add_option("--listen", inv.endpoint, "host:port to listen on")->required();
            app.add_option("--workers", inv.workers, "Number of workers to wait for")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
            app.add_option("--timeout", inv.timeoutSeconds, "Seconds to wait for workers and each epoch")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
            app.add_option("INPUT_FILE", inv.inputFile, "Dense, headered dense or sparse input")->required();
            app.add_option("OUTPUT_PREFIX", inv.outputPrefix, "Prefix of the .wts/.bm/.umx outputs")->required();
            parse_with(app, rest);
            break;
        }
        case Role::Worker: {
            CLI::App app("Distributed training worker", "batchsom worker");
            app.add_option("--connect", inv.endpoint, "Coordinator host:port")->required();
            app.add_option("--threads", inv.threads, "Worker threads (0: all logical cores)")->capture_default_str();
            app.add_option("--rank", inv.rank, "Requested rank (default: assigned by the coordinator)");
            app.add_option("--timeout", inv.timeoutSeconds, "Seconds to wait for the coordinator")
                ->capture_default_str()
                ->check(CLI::PositiveNumber);
            parse_with(app, rest);
            break;
        }
        case Role::Bench: {
            CLI::App app("Kernel and scaling benchmarks", "batchsom bench");
            app.add_option("SPEC_FILE", inv.benchSpec, "key=value benchmark description")->required();
            app.add_option("OUTPUT_CSV", inv.benchCsv, "CSV output path")->required();
            app.add_option("--dat", inv.benchDat, "Optional gnuplot data output path");
            parse_with(app, rest);
            break;
        }
    }
    try {
        apply_text_flags(inv, text);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return inv;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e) != nullptr || dynamic_cast<const ConfigError*>(&e) != nullptr) {
        return kExitUsage;
    }
    if (dynamic_cast<const ParseError*>(&e) != nullptr || dynamic_cast<const IoError*>(&e) != nullptr ||
        dynamic_cast<const ShapeError*>(&e) != nullptr) {
        return kExitInput;
    }
    return kExitRuntime;
}

int run(const CliInvocation& invocation, std::ostream& out, std::ostream& err) {
    switch (invocation.role) {
        case Role::Local: return run_local(invocation, out);
        case Role::Coordinator: return run_coordinator(invocation, out);
        case Role::Worker: return run_worker(invocation, out);
        case Role::Bench: return run_bench_role(invocation, out, err);
    }
    return kExitUsage;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliInvocation inv;
    try {
        inv = parse_args(args);
    } catch (const HelpRequested& h) {
        out << h.what();
        return kExitOk;
    } catch (const UsageError& e) {
        err << "batchsom: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }
    try {
        return run(inv, out, err);
    } catch (const std::exception& e) {
        err << "batchsom: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace batchsom::cli
