#pragma once

#include <stdexcept>
#include <string>

namespace semeq {

// Base class for all library errors. The CLI maps these onto exit codes:
// data/format problems -> 2, runtime/divergence problems -> 3.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A line or field could not be parsed (carries location in the message).
struct ParseError : Error {
    using Error::Error;
};

// Structurally invalid input: inconsistent dimensions, bad file layout.
struct FormatError : Error {
    using Error::Error;
};

// A delimited file is missing mapped columns or maps the wrong count.
struct SchemaError : Error {
    using Error::Error;
};

// A caller violated an operation precondition.
struct ArgumentError : Error {
    using Error::Error;
};

// A value lies outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Vector/matrix dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// Operation invoked in the wrong order (e.g. backward without forward).
struct StateError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericError : Error {
    using Error::Error;
};

// Training produced a non-finite loss.
struct DivergenceError : Error {
    DivergenceError(const std::string& msg, int epoch_index)
        : Error(msg), epoch(epoch_index) {}
    int epoch;
};

// A descriptor could not be resolved to any embedding vector.
struct OovError : Error {
    using Error::Error;
};

// File I/O failure.
struct IoError : Error {
    using Error::Error;
};

// Truncated or internally inconsistent binary payload.
struct CorruptError : Error {
    using Error::Error;
};

} // namespace semeq
