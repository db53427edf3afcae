#pragma once

#include <stdexcept>
#include <string>

namespace lvw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// An input violates a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "precondition"; }
};

/// An iterative solve did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), residual_(last_residual) {}
    const char* kind() const noexcept override { return "convergence"; }
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A computed object failed one of its certified properties.
class CheckFailure : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "check"; }
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config"; }
};

}  // namespace lvw
