#pragma once

#include <stdexcept>
#include <string>

namespace mtoa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad parameter, unknown key, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed to produce a trustworthy answer.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual) {}

    /// Last residual observed before giving up (0 when not applicable).
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// No candidate satisfies the requested fairness floor.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Broken internal invariant.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace mtoa
