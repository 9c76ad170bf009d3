#pragma once

#include <stdexcept>
#include <string>

namespace gplandmark {

/** Base class for all library errors. `code()` is a stable machine-readable tag. */
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/** Malformed input file (bad header, counts, or tokens). Carries a 1-based line number when known. */
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, long line = -1)
        : Error("ParseError", line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg) {}
};

/** Structurally invalid data (out-of-range index, degenerate face, duplicate vertex, bad config value). */
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("ValidationError", msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("IoError", msg) {}
};

/** Geometry that breaks the discrete operators: zero-area face, zero-length edge, isolated vertex. */
class DegenerateGeometryError : public Error {
public:
    explicit DegenerateGeometryError(const std::string& msg) : Error("DegenerateGeometryError", msg) {}
};

/** A curvature term with nonzero coefficient is identically zero, so its normalization is undefined. */
class AllZeroCurvatureError : public Error {
public:
    explicit AllZeroCurvatureError(const std::string& msg) : Error("AllZeroCurvatureError", msg) {}
};

class DegenerateNeighborhoodError : public Error {
public:
    explicit DegenerateNeighborhoodError(const std::string& msg)
        : Error("DegenerateNeighborhoodError", msg) {}
};

class InvalidBandwidth : public Error {
public:
    explicit InvalidBandwidth(const std::string& msg) : Error("InvalidBandwidth", msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error("DimensionMismatch", msg) {}
};

/** The selected-submatrix Cholesky failed under jitter policy `none`. */
class SingularSubmatrixError : public Error {
public:
    explicit SingularSubmatrixError(const std::string& msg) : Error("SingularSubmatrixError", msg) {}
};

/** Nonpositive pivot beyond tolerance: the factorization has exhausted the numerical rank. */
class NumericalBreakdownError : public Error {
public:
    explicit NumericalBreakdownError(const std::string& msg) : Error("NumericalBreakdownError", msg) {}
};

class EmptyDesignError : public Error {
public:
    explicit EmptyDesignError(const std::string& msg) : Error("EmptyDesignError", msg) {}
};

class NonpositiveSigmaError : public Error {
public:
    explicit NonpositiveSigmaError(const std::string& msg) : Error("NonpositiveSigmaError", msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("ConfigError", msg) {}
};

} // namespace gplandmark
