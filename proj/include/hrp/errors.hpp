#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hrp {

// Base type for all failures raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Invalid configuration or incompatible artifacts supplied by the user.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Runtime value outside the operation's domain (bad cycle index, empty input, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Numerical failure: divergence, non-finite values.
class NumericError : public Error {
public:
    using Error::Error;
};

// Matrix factorization failed even after jitter escalation.
class ConditioningError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace hrp
