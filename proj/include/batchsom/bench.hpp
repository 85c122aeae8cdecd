#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "batchsom/config.hpp"
#include "batchsom/dataset.hpp"

namespace batchsom {

/// Uniform [0, 1) values, deterministic per seed.
DenseDataset gen_random_dense(std::size_t n, std::size_t d, std::uint32_t seed);

/// Each row holds round(density * d) nonzeros at distinct uniformly chosen
/// columns (sorted), with uniform [0, 1) values.
SparseDataset gen_random_sparse(std::size_t n, std::size_t d, double density, std::uint32_t seed);

struct BenchSpec {
    std::vector<std::size_t> nVectors{10'000};
    std::size_t nDimensions = 100;
    double density = 0.05;
    std::uint32_t columns = 50;
    std::uint32_t rows = 50;
    MapType mapType = MapType::Planar;
    std::vector<KernelType> kernels{KernelType::DenseNaive};
    std::vector<std::size_t> workerCounts{1};
    std::uint32_t repetitions = 3;
    std::uint32_t seed = 1;
    std::uint32_t epochs = 3;
    /// Largest permitted elements_allocated estimate; 0 disables the check.
    std::size_t budgetElements = 500'000'000;
};

/// Parses "key = value" lines; '#' starts a comment. Keys: n (comma list),
/// d, density, columns, rows, map, kernels (comma list of 0/1/2), workers
/// (comma list), repetitions, seed, epochs, budget. Throws ConfigError.
BenchSpec parse_bench_spec(std::string_view text);
BenchSpec read_bench_spec(const std::string& path);

struct BenchRow {
    KernelType kernel = KernelType::DenseNaive;
    std::size_t nVectors = 0;
    std::size_t nDimensions = 0;
    std::uint32_t columns = 0;
    std::uint32_t rows = 0;
    std::size_t workers = 1;
    double medianSeconds = 0.0;
    /// Dataset + codebook + peak per-epoch workspace, in elements.
    std::size_t elementsAllocated = 0;
    /// Median time of the single-worker row of the same configuration
    /// divided by this row's; 0 when no single-worker row was run.
    double speedup = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<std::string> skipped;
};

/// Element count charged to a configuration before it runs: dataset,
/// codebook and accumulators.
std::size_t estimate_elements(KernelType kernel, std::size_t n, std::size_t d, double density, std::uint32_t columns,
                              std::uint32_t rows);

/// Runs every (n, kernel, workers) configuration serially. Configurations
/// over budget are skipped with a notice on `notices`.
BenchResult run_bench(const BenchSpec& spec, std::ostream* notices = nullptr);

inline constexpr std::string_view kBenchCsvHeader = "kernel,n,d,map,workers,median_seconds,elements_allocated";

void write_bench_csv(std::ostream& out, const BenchResult& result);
/// Whitespace-separated columns with a '#' header, for gnuplot.
void write_bench_dat(std::ostream& out, const BenchResult& result);

double median(std::vector<double> values);

}  // namespace batchsom
