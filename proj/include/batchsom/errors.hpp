#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace batchsom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
    EmptyInput,
    RowWidthMismatch,
    NonNumericToken,
    HeaderBodyMismatch,
    MalformedHeader,
    NegativeIndex,
    MalformedToken,
    DuplicateIndexInRow,
    HintTooSmall,
};

const char* to_string(ParseErrorKind kind);

/// Input text could not be turned into a dataset. `line()` is 1-based, 0 when
/// the problem is not tied to a single line.
class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail);

    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }

private:
    ParseErrorKind kind_;
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid training configuration (schedules that grow, zero epochs, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Two objects that must agree on a shape do not: data vs codebook
/// dimensionality, a loaded codebook vs the map, a caller buffer vs the
/// configuration.
class ShapeError : public Error {
public:
    enum class Kind { DimensionMismatch, CodebookShapeMismatch, KernelDataMismatch, BufferSize };

    ShapeError(Kind kind, const std::string& detail);

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

const char* to_string(ShapeError::Kind kind);

}  // namespace batchsom
