#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "batchsom/codebook.hpp"
#include "batchsom/dataset.hpp"

namespace batchsom {

// Text formats
// ------------
// All inputs are UTF-8 text, one instance per line, entries separated by any
// whitespace. Lines whose first non-blank character is '#' are comments. LF
// and CRLF line endings are accepted.
//
//  dense           1.0 2.0 3.0
//  headered dense  "% <nVectors>" (or "% <rows> <cols>"), "% <nDimensions>",
//                  then dense rows. Further '%' lines are ignored.
//  sparse          <index>:<value> pairs with zero-based indices; an empty
//                  line is an all-zero instance.
//
// Outputs are written with LF endings and 6 significant digits:
//  .wts  "% <nSomY> <nSomX>", "% <nDimensions>", one node per line
//  .bm   "% <nVectors>", then "<instance> <row> <col>" per line
//  .umx  nSomY lines of nSomX values, no header (gnuplot `matrix` layout)

enum class InputFormat { Dense, HeaderedDense, Sparse };

std::string_view to_string(InputFormat f);

/// Content-based detection: sparse if the first data token contains ':',
/// headered if the first non-comment line starts with '%', dense otherwise.
InputFormat detect_format(std::string_view text);

DenseDataset parse_dense(std::string_view text);
DenseDataset parse_dense(std::istream& in);

DenseDataset parse_dense_headered(std::string_view text);
DenseDataset parse_dense_headered(std::istream& in);

SparseDataset parse_sparse(std::string_view text, std::optional<std::size_t> nDimensionsHint = std::nullopt);
SparseDataset parse_sparse(std::istream& in, std::optional<std::size_t> nDimensionsHint = std::nullopt);

/// Headered matrix together with the lattice shape when the first header
/// line carries two counts (the codebook layout).
struct HeaderedMatrix {
    DenseDataset matrix;
    std::optional<std::uint32_t> rows;
    std::optional<std::uint32_t> columns;
};
HeaderedMatrix parse_headered_matrix(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Reads and parses an input file after detecting its format.
Dataset read_dataset(const std::filesystem::path& path, InputFormat* detected = nullptr);

/// A stored codebook (headered or plain dense). Lattice shape is known only
/// for headered files that carry it.
HeaderedMatrix read_codebook_file(const std::filesystem::path& path);

/// Formats a value with 6 significant digits, locale-independent.
std::string format_value(double value);

void write_codebook(std::ostream& out, const CodeBook& cb);
void write_bmus(std::ostream& out, const BmuTable& bmus);
void write_umatrix(std::ostream& out, const UMatrix& u);

void write_codebook(const std::filesystem::path& path, const CodeBook& cb);
void write_bmus(const std::filesystem::path& path, const BmuTable& bmus);
void write_umatrix(const std::filesystem::path& path, const UMatrix& u);

/// Reads a BMU file back. Trailing tokens on the header line are ignored.
BmuTable parse_bmus(std::string_view text);

struct SnapshotPaths {
    std::string codebook;  // .wts
    std::string bmus;      // .bm
    std::string umatrix;   // .umx

    friend bool operator==(const SnapshotPaths&, const SnapshotPaths&) = default;
};

/// Final outputs when `epoch` is empty, otherwise "<prefix>.<epoch>.<ext>".
SnapshotPaths snapshot_paths(std::string_view prefix, std::optional<std::uint32_t> epoch = std::nullopt);

}  // namespace batchsom
