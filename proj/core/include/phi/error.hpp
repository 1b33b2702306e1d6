#pragma once

#include <stdexcept>
#include <string>

namespace phi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated file, bad magic, unsupported header values.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Operands whose dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Index or argument outside its valid range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A Level 1 / Level 2 pair that does not reconstruct to a binary matrix.
class CorruptionError : public Error {
public:
    CorruptionError(std::string what, std::size_t row, std::size_t col)
            : Error(std::move(what)), row_(row), col_(col) {}

    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

/// Invalid configuration (unknown key, zero bandwidth, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace phi
