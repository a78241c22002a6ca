#ifndef UNIDEX_ERROR_HPP
#define UNIDEX_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace unidex {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 1-based line/column plus the byte offset into the source text.
struct SourceLocation {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t offset = 0;
};

enum class ParseErrorKind {
    Syntax,
    UnknownClass,
    UnknownIdentifier,
    DuplicateIdentifier,
    ConflictingSpecifiers,
    Io,
    InvalidArgument,
};

inline const char* to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::Syntax: return "SyntaxError";
        case ParseErrorKind::UnknownClass: return "UnknownClass";
        case ParseErrorKind::UnknownIdentifier: return "UnknownIdentifier";
        case ParseErrorKind::DuplicateIdentifier: return "DuplicateIdentifier";
        case ParseErrorKind::ConflictingSpecifiers: return "ConflictingSpecifiers";
        case ParseErrorKind::Io: return "IoError";
        case ParseErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "ParseError";
}

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, const std::string& message, SourceLocation loc = {})
        : Error(std::string(to_string(kind)) +
                (kind == ParseErrorKind::Io ? std::string()
                                            : " at " + std::to_string(loc.line) + ":" + std::to_string(loc.column)) +
                ": " + message),
          kind_(kind),
          loc_(loc),
          detail_(message) {}

    ParseErrorKind kind() const noexcept { return kind_; }
    const SourceLocation& location() const noexcept { return loc_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ParseErrorKind kind_;
    SourceLocation loc_;
    std::string detail_;
};

enum class GeometryErrorKind {
    EmptyIntersection,
    EmptySlice,
    EmptyPolytope,
    Unbounded,
    EmptyRegion,
    UnboundedRegion,
    LowerDimensional,
    DimensionMismatch,
    NoFreeDimensions,
    OutsideDomain,
    NotABox,
};

inline const char* to_string(GeometryErrorKind kind) {
    switch (kind) {
        case GeometryErrorKind::EmptyIntersection: return "EmptyIntersection";
        case GeometryErrorKind::EmptySlice: return "EmptySlice";
        case GeometryErrorKind::EmptyPolytope: return "EmptyPolytope";
        case GeometryErrorKind::Unbounded: return "Unbounded";
        case GeometryErrorKind::EmptyRegion: return "EmptyRegion";
        case GeometryErrorKind::UnboundedRegion: return "UnboundedRegion";
        case GeometryErrorKind::LowerDimensional: return "LowerDimensional";
        case GeometryErrorKind::DimensionMismatch: return "DimensionMismatch";
        case GeometryErrorKind::NoFreeDimensions: return "NoFreeDimensions";
        case GeometryErrorKind::OutsideDomain: return "OutsideDomain";
        case GeometryErrorKind::NotABox: return "NotABox";
    }
    return "GeometryError";
}

class GeometryError : public Error {
public:
    GeometryError(GeometryErrorKind kind, const std::string& message)
        : Error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    GeometryErrorKind kind() const noexcept { return kind_; }

private:
    GeometryErrorKind kind_;
};

enum class NumericErrorKind {
    ConvergenceFailure,
    ZeroVolume,
    InvalidN,
    NonFinite,
};

inline const char* to_string(NumericErrorKind kind) {
    switch (kind) {
        case NumericErrorKind::ConvergenceFailure: return "ConvergenceFailure";
        case NumericErrorKind::ZeroVolume: return "ZeroVolume";
        case NumericErrorKind::InvalidN: return "InvalidN";
        case NumericErrorKind::NonFinite: return "NonFinite";
    }
    return "NumericError";
}

class NumericError : public Error {
public:
    NumericError(NumericErrorKind kind, const std::string& message)
        : Error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    NumericErrorKind kind() const noexcept { return kind_; }

private:
    NumericErrorKind kind_;
};

/// Rethrow the in-flight library error with `context` prepended to its
/// message, preserving its category and kind. Call from a catch block.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const ParseError& e) {
        throw ParseError(e.kind(), context + ": " + e.detail(), e.location());
    } catch (const GeometryError& e) {
        throw GeometryError(e.kind(), context + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(e.kind(), context + ": " + e.what());
    }
}

}  // namespace unidex

#endif  // UNIDEX_ERROR_HPP
