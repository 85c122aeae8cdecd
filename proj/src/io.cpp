#include "batchsom/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "batchsom/errors.hpp"

namespace batchsom {

namespace {

struct Line {
    std::string_view text;
    std::size_t number;  // 1-based
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t start = 0;
    std::size_t number = 1;
    while (true) {
        const std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (nl == std::string_view::npos) {
            // A trailing newline does not open another line, except that an
            // entirely empty text is one empty line.
            if (!line.empty() || lines.empty()) {
                lines.push_back({line, number});
            }
            break;
        }
        lines.push_back({line, number});
        start = nl + 1;
        ++number;
    }
    return lines;
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\v' || c == '\f' || c == '\r';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

bool is_comment(std::string_view trimmed) {
    return !trimmed.empty() && trimmed.front() == '#';
}

template <class F>
std::size_t for_each_token(std::string_view s, F&& f) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) {
            ++i;
        }
        if (i >= s.size()) {
            break;
        }
        const std::size_t begin = i;
        while (i < s.size() && !is_space(s[i])) {
            ++i;
        }
        f(s.substr(begin, i - begin));
        ++count;
    }
    return count;
}

std::size_t count_tokens(std::string_view s) {
    return for_each_token(s, [](std::string_view) {});
}

bool try_parse_float(std::string_view token, float& out) {
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

float parse_float(std::string_view token, std::size_t line) {
    float v = 0.0f;
    if (!try_parse_float(token, v)) {
        throw ParseError(ParseErrorKind::NonNumericToken, line, "'" + std::string(token) + "'");
    }
    return v;
}

bool try_parse_count(std::string_view token, std::uint64_t& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

/// Rows of a dense body, validated against `width` (when known).
struct DenseBody {
    std::vector<const Line*> rows;
    std::size_t width = 0;
};

void fill_dense(const DenseBody& body, DenseDataset& out) {
    out = DenseDataset(body.rows.size(), body.width);
    std::size_t pos = 0;
    for (const Line* line : body.rows) {
        for_each_token(line->text, [&](std::string_view tok) { out.values[pos++] = parse_float(tok, line->number); });
    }
}

std::string slurp(std::istream& in) {
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::string_view to_string(InputFormat f) {
    switch (f) {
    case InputFormat::Dense: return "dense";
    case InputFormat::HeaderedDense: return "headered-dense";
    case InputFormat::Sparse: return "sparse";
    }
    return "unknown";
}

InputFormat detect_format(std::string_view text) {
    for (const Line& line : split_lines(text)) {
        const std::string_view t = trim(line.text);
        if (t.empty() || is_comment(t)) {
            continue;
        }
        if (t.front() == '%') {
            return InputFormat::HeaderedDense;
        }
        std::string_view first;
        for_each_token(t, [&](std::string_view tok) {
            if (first.empty()) {
                first = tok;
            }
        });
        return first.find(':') != std::string_view::npos ? InputFormat::Sparse : InputFormat::Dense;
    }
    return InputFormat::Dense;
}

DenseDataset parse_dense(std::string_view text) {
    const auto lines = split_lines(text);
    // Pass 1: shape.
    DenseBody body;
    for (const Line& line : lines) {
        const std::string_view t = trim(line.text);
        if (t.empty() || is_comment(t)) {
            continue;
        }
        const std::size_t n = count_tokens(t);
        if (body.rows.empty()) {
            body.width = n;
        } else if (n != body.width) {
            throw ParseError(ParseErrorKind::RowWidthMismatch, line.number,
                             "expected " + std::to_string(body.width) + " entries, found " + std::to_string(n));
        }
        body.rows.push_back(&line);
    }
    if (body.rows.empty()) {
        throw ParseError(ParseErrorKind::EmptyInput, 0, "no data rows");
    }
    // Pass 2: values.
    DenseDataset out;
    fill_dense(body, out);
    return out;
}

DenseDataset parse_dense(std::istream& in) {
    return parse_dense(slurp(in));
}

HeaderedMatrix parse_headered_matrix(std::string_view text) {
    const auto lines = split_lines(text);
    HeaderedMatrix result;
    std::optional<std::uint64_t> nVectors;
    std::optional<std::uint64_t> nDimensions;
    DenseBody body;
    std::size_t headerLines = 0;

    for (const Line& line : lines) {
        const std::string_view t = trim(line.text);
        if (t.empty() || is_comment(t)) {
            continue;
        }
        if (t.front() == '%') {
            if (headerLines >= 2) {
                continue;
            }
            std::vector<std::string_view> tokens;
            for_each_token(t.substr(1), [&](std::string_view tok) { tokens.push_back(tok); });
            std::uint64_t first = 0;
            if (tokens.empty() || !try_parse_count(tokens[0], first)) {
                throw ParseError(ParseErrorKind::MalformedHeader, line.number, "expected a count after '%'");
            }
            if (headerLines == 0) {
                std::uint64_t second = 0;
                if (tokens.size() >= 2 && try_parse_count(tokens[1], second)) {
                    result.rows = static_cast<std::uint32_t>(first);
                    result.columns = static_cast<std::uint32_t>(second);
                    nVectors = first * second;
                } else {
                    nVectors = first;
                }
            } else {
                nDimensions = first;
            }
            ++headerLines;
            continue;
        }
        if (headerLines < 2) {
            throw ParseError(ParseErrorKind::MalformedHeader, line.number, "data before the two '%' header lines");
        }
        const std::size_t n = count_tokens(t);
        if (n != *nDimensions) {
            throw ParseError(ParseErrorKind::HeaderBodyMismatch, line.number,
                             "header declares " + std::to_string(*nDimensions) + " dimensions, row has " +
                                 std::to_string(n));
        }
        body.rows.push_back(&line);
    }
    if (headerLines < 2) {
        throw ParseError(ParseErrorKind::MalformedHeader, 0, "missing '%' header lines");
    }
    if (body.rows.size() != *nVectors) {
        throw ParseError(ParseErrorKind::HeaderBodyMismatch, 0,
                         "header declares " + std::to_string(*nVectors) + " rows, body has " +
                             std::to_string(body.rows.size()));
    }
    body.width = static_cast<std::size_t>(*nDimensions);
    fill_dense(body, result.matrix);
    return result;
}

DenseDataset parse_dense_headered(std::string_view text) {
    return parse_headered_matrix(text).matrix;
}

DenseDataset parse_dense_headered(std::istream& in) {
    return parse_dense_headered(slurp(in));
}

SparseDataset parse_sparse(std::string_view text, std::optional<std::size_t> nDimensionsHint) {
    const auto lines = split_lines(text);

    struct Entry {
        std::uint32_t index;
        float value;
    };
    auto parse_token = [](std::string_view tok, std::size_t line) {
        const std::size_t colon = tok.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size()) {
            throw ParseError(ParseErrorKind::MalformedToken, line, "'" + std::string(tok) + "'");
        }
        const std::string_view idx = tok.substr(0, colon);
        if (idx.front() == '-') {
            throw ParseError(ParseErrorKind::NegativeIndex, line, "'" + std::string(tok) + "'");
        }
        std::uint64_t index = 0;
        if (!try_parse_count(idx, index) || index > UINT32_MAX - 1) {
            throw ParseError(ParseErrorKind::MalformedToken, line, "bad index in '" + std::string(tok) + "'");
        }
        float value = 0.0f;
        if (!try_parse_float(tok.substr(colon + 1), value)) {
            throw ParseError(ParseErrorKind::MalformedToken, line, "bad value in '" + std::string(tok) + "'");
        }
        return Entry{static_cast<std::uint32_t>(index), value};
    };

    // Pass 1: instance count, nonzeros, feature count.
    std::vector<const Line*> rows;
    std::size_t nnz = 0;
    std::size_t maxIndexPlusOne = 0;
    for (const Line& line : lines) {
        const std::string_view t = trim(line.text);
        if (is_comment(t)) {
            continue;
        }
        rows.push_back(&line);
        nnz += for_each_token(t, [&](std::string_view tok) {
            maxIndexPlusOne = std::max<std::size_t>(maxIndexPlusOne, parse_token(tok, line.number).index + 1);
        });
    }
    std::size_t nDimensions = maxIndexPlusOne;
    if (nDimensionsHint) {
        if (*nDimensionsHint < maxIndexPlusOne) {
            throw ParseError(ParseErrorKind::HintTooSmall, 0,
                             "hint " + std::to_string(*nDimensionsHint) + " but largest index needs " +
                                 std::to_string(maxIndexPlusOne));
        }
        nDimensions = *nDimensionsHint;
    }

    // Pass 2: fill CSR arrays, sorting each row by index.
    SparseDataset out;
    out.nVectors = rows.size();
    out.nDimensions = nDimensions;
    out.rowOffsets.reserve(rows.size() + 1);
    out.colIndices.reserve(nnz);
    out.values.reserve(nnz);
    std::vector<Entry> scratch;
    for (const Line* line : rows) {
        scratch.clear();
        for_each_token(line->text, [&](std::string_view tok) { scratch.push_back(parse_token(tok, line->number)); });
        std::sort(scratch.begin(), scratch.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
        for (std::size_t k = 0; k < scratch.size(); ++k) {
            if (k > 0 && scratch[k].index == scratch[k - 1].index) {
                throw ParseError(ParseErrorKind::DuplicateIndexInRow, line->number,
                                 "index " + std::to_string(scratch[k].index) + " repeated");
            }
            out.colIndices.push_back(scratch[k].index);
            out.values.push_back(scratch[k].value);
        }
        out.rowOffsets.push_back(out.values.size());
    }
    return out;
}

SparseDataset parse_sparse(std::istream& in, std::optional<std::size_t> nDimensionsHint) {
    return parse_sparse(slurp(in), nDimensionsHint);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::string text = slurp(in);
    if (in.bad()) {
        throw IoError("failed reading '" + path.string() + "'");
    }
    return text;
}

Dataset read_dataset(const std::filesystem::path& path, InputFormat* detected) {
    const std::string text = read_text_file(path);
    const InputFormat format = detect_format(text);
    if (detected != nullptr) {
        *detected = format;
    }
    switch (format) {
    case InputFormat::Sparse: return parse_sparse(text);
    case InputFormat::HeaderedDense: return parse_dense_headered(text);
    case InputFormat::Dense: break;
    }
    return parse_dense(text);
}

HeaderedMatrix read_codebook_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    if (detect_format(text) == InputFormat::HeaderedDense) {
        return parse_headered_matrix(text);
    }
    return HeaderedMatrix{parse_dense(text), std::nullopt, std::nullopt};
}

std::string format_value(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 6);
    (void)ec;
    return std::string(buf, ptr);
}

void write_codebook(std::ostream& out, const CodeBook& cb) {
    out << "% " << cb.nSomY << ' ' << cb.nSomX << '\n' << "% " << cb.nDimensions << '\n';
    std::string line;
    for (std::size_t j = 0; j < cb.nodes(); ++j) {
        line.clear();
        const auto w = cb.node(j);
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (k > 0) {
                line += ' ';
            }
            line += format_value(w[k]);
        }
        line += '\n';
        out << line;
    }
}

void write_bmus(std::ostream& out, const BmuTable& bmus) {
    out << "% " << bmus.size() << '\n';
    for (std::size_t i = 0; i < bmus.size(); ++i) {
        out << i << ' ' << bmus[i].row << ' ' << bmus[i].col << '\n';
    }
}

void write_umatrix(std::ostream& out, const UMatrix& u) {
    std::string line;
    for (std::uint32_t r = 0; r < u.nSomY; ++r) {
        line.clear();
        for (std::uint32_t c = 0; c < u.nSomX; ++c) {
            if (c > 0) {
                line += ' ';
            }
            line += format_value(u.at(c, r));
        }
        line += '\n';
        out << line;
    }
}

namespace {

template <class T, class Writer>
void write_file(const std::filesystem::path& path, const T& value, Writer writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    writer(out, value);
    out.flush();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

}  // namespace

void write_codebook(const std::filesystem::path& path, const CodeBook& cb) {
    write_file(path, cb, [](std::ostream& o, const CodeBook& v) { write_codebook(o, v); });
}

void write_bmus(const std::filesystem::path& path, const BmuTable& bmus) {
    write_file(path, bmus, [](std::ostream& o, const BmuTable& v) { write_bmus(o, v); });
}

void write_umatrix(const std::filesystem::path& path, const UMatrix& u) {
    write_file(path, u, [](std::ostream& o, const UMatrix& v) { write_umatrix(o, v); });
}

BmuTable parse_bmus(std::string_view text) {
    BmuTable table;
    std::optional<std::uint64_t> declared;
    for (const Line& line : split_lines(text)) {
        const std::string_view t = trim(line.text);
        if (t.empty() || is_comment(t)) {
            continue;
        }
        std::vector<std::string_view> tokens;
        for_each_token(t.front() == '%' ? t.substr(1) : t, [&](std::string_view tok) { tokens.push_back(tok); });
        if (t.front() == '%') {
            std::uint64_t n = 0;
            if (declared || tokens.empty() || !try_parse_count(tokens[0], n)) {
                throw ParseError(ParseErrorKind::MalformedHeader, line.number, "bad BMU header");
            }
            declared = n;
            table.units.reserve(n);
            continue;
        }
        std::uint64_t idx = 0;
        std::uint64_t row = 0;
        std::uint64_t col = 0;
        if (tokens.size() != 3 || !try_parse_count(tokens[0], idx) || !try_parse_count(tokens[1], row) ||
            !try_parse_count(tokens[2], col)) {
            throw ParseError(ParseErrorKind::MalformedToken, line.number, "expected '<index> <row> <col>'");
        }
        if (idx != table.units.size()) {
            throw ParseError(ParseErrorKind::MalformedToken, line.number, "instance indices must be consecutive");
        }
        table.units.push_back(GridCoord{static_cast<std::uint32_t>(col), static_cast<std::uint32_t>(row)});
    }
    if (!declared) {
        throw ParseError(ParseErrorKind::MalformedHeader, 0, "missing '%' header");
    }
    if (*declared != table.units.size()) {
        throw ParseError(ParseErrorKind::HeaderBodyMismatch, 0,
                         "header declares " + std::to_string(*declared) + " instances, body has " +
                             std::to_string(table.units.size()));
    }
    return table;
}

SnapshotPaths snapshot_paths(std::string_view prefix, std::optional<std::uint32_t> epoch) {
    std::string base(prefix);
    if (epoch) {
        base += '.';
        base += std::to_string(*epoch);
    }
    return SnapshotPaths{base + ".wts", base + ".bm", base + ".umx"};
}

}  // namespace batchsom
