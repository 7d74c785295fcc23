#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hsr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid user-supplied configuration (kernel sizes, patch counts, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation (asymmetric, not SPD, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// File or stream failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// A metric that is undefined for the given data (e.g. a zero band mean in ERGAS).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Random generation that could not meet its constraints within the retry budget.
class GenerationError : public Error {
public:
    using Error::Error;
};

/// Raised when a solver's objective blows up; carries the trace up to that point.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<double> trace)
        : Error(what), trace_(std::move(trace)) {}

    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

} // namespace hsr
