#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsynth {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, arguments or preconditions supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problems with input data: unreadable files, schema or row validation.
class DataError : public Error {
public:
    using Error::Error;
};

class SchemaError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    ValidationError(std::size_t row, const std::string& what)
        : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

    /// 1-based data row (the header is row 0).
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Conditioning failures and divergent quantities.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Models or data combined in a way that violates data-use bookkeeping,
/// e.g. evaluating a Bayes factor on data a model has already absorbed.
class ProvenanceError : public Error {
public:
    using Error::Error;
};

}  // namespace bsynth
