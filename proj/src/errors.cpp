#include "batchsom/errors.hpp"

namespace batchsom {

const char* to_string(ParseErrorKind kind) {
    switch (kind) {
    case ParseErrorKind::EmptyInput: return "EmptyInput";
    case ParseErrorKind::RowWidthMismatch: return "RowWidthMismatch";
    case ParseErrorKind::NonNumericToken: return "NonNumericToken";
    case ParseErrorKind::HeaderBodyMismatch: return "HeaderBodyMismatch";
    case ParseErrorKind::MalformedHeader: return "MalformedHeader";
    case ParseErrorKind::NegativeIndex: return "NegativeIndex";
    case ParseErrorKind::MalformedToken: return "MalformedToken";
    case ParseErrorKind::DuplicateIndexInRow: return "DuplicateIndexInRow";
    case ParseErrorKind::HintTooSmall: return "HintTooSmall";
    }
    return "ParseError";
}

namespace {

std::string describe(ParseErrorKind kind, std::size_t line, const std::string& detail) {
    std::string msg = to_string(kind);
    if (line > 0) {
        msg += " at line " + std::to_string(line);
    }
    if (!detail.empty()) {
        msg += ": " + detail;
    }
    return msg;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t line, const std::string& detail)
    : Error(describe(kind, line, detail)), kind_(kind), line_(line) {}

const char* to_string(ShapeError::Kind kind) {
    switch (kind) {
        case ShapeError::Kind::DimensionMismatch: return "DimensionMismatch";
        case ShapeError::Kind::CodebookShapeMismatch: return "CodebookShapeMismatch";
        case ShapeError::Kind::KernelDataMismatch: return "KernelDataMismatch";
        case ShapeError::Kind::BufferSize: return "ShapeError";
    }
    return "ShapeError";
}

ShapeError::ShapeError(Kind kind, const std::string& detail)
    : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace batchsom
