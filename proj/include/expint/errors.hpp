#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace expint {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Grid index triple outside the grid.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Operand sizes or grids do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A user supplied function produced a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Operation not defined for the operator's boundary kind.
class BoundaryKindError : public Error {
public:
    using Error::Error;
};

/// Input outside the domain of a nonlinearity.
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Malformed text input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Polynomial expansion did not reach the requested tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual_estimate)
        : Error(what), residual_(residual_estimate) {}
    double residual_estimate() const noexcept { return residual_; }

private:
    double residual_;
};

/// A size guard was exceeded.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace expint
