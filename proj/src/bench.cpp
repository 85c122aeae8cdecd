#include "batchsom/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "batchsom/errors.hpp"
#include "batchsom/io.hpp"
#include "batchsom/kernels.hpp"
#include "batchsom/training.hpp"

namespace batchsom {

namespace {

float unit_float(std::mt19937& rng) {
    return static_cast<float>(rng() >> 8) * 0x1p-24f;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("bench spec: bad value '" + std::string(text) + "' for " + std::string(key));
    }
    return value;
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
    std::vector<T> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (!item.empty()) {
            out.push_back(parse_number<T>(key, item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
    }
    return out;
}

std::string number(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string map_label(const BenchRow& row) {
    return std::to_string(row.columns) + "x" + std::to_string(row.rows);
}

}  // namespace

DenseDataset gen_random_dense(std::size_t n, std::size_t d, std::uint32_t seed) {
    DenseDataset out(n, d);
    std::mt19937 rng(seed);
    for (float& v : out.values) {
        v = unit_float(rng);
    }
    return out;
}

SparseDataset gen_random_sparse(std::size_t n, std::size_t d, double density, std::uint32_t seed) {
    if (!(density > 0.0 && density <= 1.0)) {
        throw ConfigError("density must lie in (0, 1], got " + number(density));
    }
    const auto perRow = static_cast<std::size_t>(std::lround(density * static_cast<double>(d)));
    SparseDataset out;
    out.nVectors = n;
    out.nDimensions = d;
    out.rowOffsets.reserve(n + 1);
    out.colIndices.reserve(n * perRow);
    out.values.reserve(n * perRow);
    std::mt19937 rng(seed);
    std::vector<std::uint32_t> columns(d);
    std::iota(columns.begin(), columns.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) {
        // Partial Fisher-Yates: the first perRow entries become a uniform subset.
        for (std::size_t k = 0; k < perRow; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, d - 1);
            std::swap(columns[k], columns[pick(rng)]);
        }
        std::vector<std::uint32_t> chosen(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(perRow));
        std::sort(chosen.begin(), chosen.end());
        for (std::uint32_t c : chosen) {
            out.colIndices.push_back(c);
            out.values.push_back(unit_float(rng));
        }
        out.rowOffsets.push_back(out.colIndices.size());
    }
    return out;
}

BenchSpec parse_bench_spec(std::string_view text) {
    BenchSpec spec;
    std::size_t lineNo = 0;
    while (!text.empty()) {
        ++lineNo;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("bench spec line " + std::to_string(lineNo) + ": expected key=value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "n") {
            spec.nVectors = parse_list<std::size_t>(key, value);
        } else if (key == "d") {
            spec.nDimensions = parse_number<std::size_t>(key, value);
        } else if (key == "density") {
            spec.density = parse_number<double>(key, value);
        } else if (key == "columns") {
            spec.columns = parse_number<std::uint32_t>(key, value);
        } else if (key == "rows") {
            spec.rows = parse_number<std::uint32_t>(key, value);
        } else if (key == "map") {
            spec.mapType = parse_map_type(value);
        } else if (key == "kernels") {
            spec.kernels.clear();
            for (int k : parse_list<int>(key, value)) {
                spec.kernels.push_back(kernel_from_int(k));
            }
        } else if (key == "workers") {
            spec.workerCounts = parse_list<std::size_t>(key, value);
        } else if (key == "repetitions") {
            spec.repetitions = parse_number<std::uint32_t>(key, value);
        } else if (key == "seed") {
            spec.seed = parse_number<std::uint32_t>(key, value);
        } else if (key == "epochs") {
            spec.epochs = parse_number<std::uint32_t>(key, value);
        } else if (key == "budget") {
            spec.budgetElements = parse_number<std::size_t>(key, value);
        } else {
            throw ConfigError("bench spec line " + std::to_string(lineNo) + ": unknown key '" + std::string(key) +
                              "'");
        }
    }
    if (spec.repetitions < 3) {
        throw ConfigError("bench spec: repetitions must be at least 3");
    }
    if (spec.epochs < 1 || spec.columns < 1 || spec.rows < 1 || spec.nDimensions < 1) {
        throw ConfigError("bench spec: epochs, columns, rows and d must be positive");
    }
    if (!(spec.density > 0.0 && spec.density <= 1.0)) {
        throw ConfigError("bench spec: density must lie in (0, 1]");
    }
    for (std::size_t w : spec.workerCounts) {
        if (w == 0) {
            throw ConfigError("bench spec: worker counts must be positive");
        }
    }
    return spec;
}

BenchSpec read_bench_spec(const std::string& path) {
    return parse_bench_spec(read_text_file(path));
}

std::size_t estimate_elements(KernelType kernel, std::size_t n, std::size_t d, double density, std::uint32_t columns,
                              std::uint32_t rows) {
    const std::size_t nodes = std::size_t{columns} * rows;
    std::size_t data = n * d;
    if (kernel == KernelType::Sparse) {
        const auto perRow = static_cast<std::size_t>(std::lround(density * static_cast<double>(d)));
        data = n + 1 + 2 * n * perRow;
    }
    return data + nodes * d + (nodes * d + nodes);
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

BenchResult run_bench(const BenchSpec& spec, std::ostream* notices) {
    BenchResult result;
    for (KernelType kernel : spec.kernels) {
        for (std::size_t n : spec.nVectors) {
            const std::size_t estimate =
                estimate_elements(kernel, n, spec.nDimensions, spec.density, spec.columns, spec.rows);
            if (spec.budgetElements != 0 && estimate > spec.budgetElements) {
                std::string notice = "skipping kernel " + std::to_string(static_cast<int>(kernel)) + " n=" +
                                     std::to_string(n) + ": " + std::to_string(estimate) +
                                     " elements exceeds budget " + std::to_string(spec.budgetElements);
                if (notices != nullptr) {
                    *notices << notice << '\n';
                }
                result.skipped.push_back(std::move(notice));
                continue;
            }
            Dataset data;
            if (kernel == KernelType::Sparse) {
                data = gen_random_sparse(n, spec.nDimensions, spec.density, spec.seed);
            } else {
                data = gen_random_dense(n, spec.nDimensions, spec.seed);
            }
            const DataView view = view_of(data);
            const std::size_t dataElements =
                std::visit([](const auto& x) { return x.elements(); }, data);

            RawConfig raw;
            raw.nEpochs = spec.epochs;
            raw.mapType = spec.mapType;
            raw.kernel = kernel;
            raw.seed = spec.seed;
            const TrainConfig cfg = resolve_defaults(raw, spec.columns, spec.rows);
            const CodeBook initial = init_codebook(cfg, spec.nDimensions);

            const std::size_t firstRow = result.rows.size();
            for (std::size_t workers : spec.workerCounts) {
                WorkerPool pool(workers);
                std::vector<double> times;
                std::size_t peakWorkspace = 0;
                for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
                    CodeBook cb = initial;
                    const auto start = std::chrono::steady_clock::now();
                    for (std::uint32_t epoch = 0; epoch < cfg.nEpochs; ++epoch) {
                        const EpochState state = epoch_state(cfg, epoch);
                        EpochStats stats;
                        run_epoch(view, cb,
                                  KernelParams{state.radius, state.scale, cfg.influenceCutoff, cfg.kernel,
                                               cfg.blockSize},
                                  cfg.mapType, pool, &stats);
                        peakWorkspace = std::max(peakWorkspace, stats.workspaceElements);
                    }
                    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
                }
                BenchRow row;
                row.kernel = kernel;
                row.nVectors = n;
                row.nDimensions = spec.nDimensions;
                row.columns = spec.columns;
                row.rows = spec.rows;
                row.workers = workers;
                row.medianSeconds = median(times);
                row.elementsAllocated = dataElements + initial.weights.size() + peakWorkspace;
                result.rows.push_back(row);
            }
            const auto single = std::find_if(result.rows.begin() + static_cast<std::ptrdiff_t>(firstRow),
                                             result.rows.end(), [](const BenchRow& r) { return r.workers == 1; });
            if (single != result.rows.end()) {
                const double base = single->medianSeconds;
                for (std::size_t i = firstRow; i < result.rows.size(); ++i) {
                    auto& r = result.rows[i];
                    r.speedup = r.medianSeconds > 0.0 ? base / r.medianSeconds : 0.0;
                }
            }
        }
    }
    return result;
}

void write_bench_csv(std::ostream& out, const BenchResult& result) {
    out << kBenchCsvHeader << '\n';
    for (const auto& r : result.rows) {
        out << static_cast<int>(r.kernel) << ',' << r.nVectors << ',' << r.nDimensions << ',' << map_label(r) << ','
            << r.workers << ',' << number(r.medianSeconds) << ',' << r.elementsAllocated << '\n';
    }
}

void write_bench_dat(std::ostream& out, const BenchResult& result) {
    out << "# kernel n d columns rows workers median_seconds elements_allocated speedup\n";
    for (const auto& r : result.rows) {
        out << static_cast<int>(r.kernel) << ' ' << r.nVectors << ' ' << r.nDimensions << ' ' << r.columns << ' '
            << r.rows << ' ' << r.workers << ' ' << number(r.medianSeconds) << ' ' << r.elementsAllocated << ' '
            << number(r.speedup) << '\n';
    }
}

}  // namespace batchsom
